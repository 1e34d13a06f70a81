#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "manetlab/link/types.hpp"
#include "manetlab/sim/rng.hpp"
#include "manetlab/sim/scheduler.hpp"

namespace manetlab::link {

// Emulated 802.11 medium with binary radio range.
//
// Connectivity: nodes are link neighbors when associated to the same network
// and within radio range; in infrastructure mode the BSS behaves as one link,
// with station-to-station frames relayed through the access point (two
// transmissions on the air).
//
// Capacity: each connected component is a single collision domain served as a
// FIFO. A frame occupies the channel for its airtime at the nominal rate; when
// k distinct transmitters hold backlog, a contention gap precedes each frame
// so that the channel slot runs at nominal * (1 - overhead * (k - 1)). This
// reproduces measured saturation goodput while keeping per-node transmit
// airtime equal to bits sent over the nominal rate.
//
// Energy ledger: a node's receive time counts every frame transmitted within
// carrier-sense range (twice the radio range) inside its collision domain;
// decode is not required to keep the interface busy. A node with locally
// originated backlog additionally owns the contention gaps as "trying to
// send" time. The ledger is bucketed per whole second.
class Medium
{
  public:
    Medium(sim::Scheduler& sched, MediumModel model, PowerSaveModel ps, sim::SeededRng rng);

    // --- topology and membership -------------------------------------------
    void add_node(const NodeId& id, Position pos);
    bool has_node(const NodeId& id) const { return m_nodes.count(id) != 0; }
    void set_waypoints(const NodeId& id, std::vector<Waypoint> waypoints);
    Position position(const NodeId& id) const; // at current sim time
    void set_fault(const NodeId& id, Fault fault);
    Fault fault(const NodeId& id) const;

    // Association is driven by the network-configuration layer.
    // Returns false when the node's driver cannot join (DriverNoIbss + IBSS).
    bool associate(const NodeId& id, LinkMode mode, const std::string& ssid);
    void dissociate(const NodeId& id);
    bool associated(const NodeId& id) const;
    LinkMode mode(const NodeId& id) const;

    // Link neighbors at the current sim time, sorted by id.
    std::vector<NodeId> neighbors(const NodeId& id) const;

    // --- traffic -------------------------------------------------------------
    FrameId transmit(Frame frame, const NodeId& from);
    std::size_t queue_length(const NodeId& id) const;

    using ReceiveFn = std::function<void(const Frame&, sim::SimTime)>;
    void set_receive_handler(const NodeId& id, ReceiveFn fn);

    // Fires after a node's own frame leaves the air; saturation sources use
    // it to keep their backlog topped up.
    using TransmitCompleteFn = std::function<void(FrameId)>;
    void set_transmit_complete_handler(const NodeId& id, TransmitCompleteFn fn);

    // --- accounting -----------------------------------------------------------
    // Exact busy airtime in [t0, t1); bounds must lie on whole-second epochs.
    BusyAirtime busy_airtime(const NodeId& id, sim::SimTime t0, sim::SimTime t1) const;
    // Contention time charged to a saturated source in the same window.
    double contend_airtime(const NodeId& id, sim::SimTime t0, sim::SimTime t1) const;

    const std::map<DropReason, std::uint64_t>& drops() const { return m_drops; }

    struct Delivery
    {
        FrameId id;
        NodeId from;
        NodeId to;
        sim::SimTime at;
    };
    void enable_delivery_trace(bool on) { m_trace_deliveries = on; }
    const std::vector<Delivery>& delivery_trace() const { return m_deliveries; }

    const MediumModel& model() const { return m_model; }
    const PowerSaveModel& power_save() const { return m_ps; }

  private:
    struct Pending
    {
        Frame frame;
        NodeId rf_dst;  // this leg's over-the-air destination; empty = broadcast
        sim::SimTime enqueued_at = 0;
        std::uint64_t seq = 0;
        FrameId id = 0;
        bool relay_leg = false; // hub-originated second leg
    };

    struct EpochBusy
    {
        std::uint64_t tx_us = 0;
        std::uint64_t rx_us = 0;
        std::uint64_t contend_us = 0;
    };

    struct NodeState
    {
        Position home;
        std::vector<Waypoint> waypoints;
        Fault fault = Fault::None;
        bool is_associated = false;
        LinkMode mode = LinkMode::Ibss;
        std::string ssid;
        NodeId ap;  // infrastructure: the AP; fake-AP victims: the hub
        std::deque<Pending> queue;
        sim::SimTime busy_until = 0;
        ReceiveFn on_receive;
        TransmitCompleteFn on_transmit_complete;
        std::vector<EpochBusy> epochs;
    };

    const NodeState& state(const NodeId& id) const;
    NodeState& state(const NodeId& id);
    Position position_at(const NodeState& n, sim::SimTime t) const;
    bool in_range(const NodeId& a, const NodeId& b) const;
    bool bss_member(const NodeState& n, const NodeId& ap) const;
    std::vector<NodeId> domain_of(const NodeId& id) const;
    void request_grant(const NodeId& id);
    void grant(const NodeId& via);
    void complete(const NodeId& tx, Pending pending, sim::SimTime air_start, sim::SimTime air_end);
    void deliver(const NodeId& tx, const Pending& pending, const NodeId& to, sim::SimTime at);
    void charge(std::vector<EpochBusy>& epochs, std::uint64_t EpochBusy::*field,
                sim::SimTime t0, sim::SimTime t1) const;
    sim::SimTime airtime_us(std::uint32_t size_bytes) const;
    void drop(DropReason r) { ++m_drops[r]; }

    sim::Scheduler& m_sched;
    MediumModel m_model;
    PowerSaveModel m_ps;
    sim::SeededRng m_rng;
    std::map<NodeId, NodeState> m_nodes;
    std::uint64_t m_next_seq = 0;
    FrameId m_next_frame = 0;
    std::map<DropReason, std::uint64_t> m_drops;
    bool m_trace_deliveries = false;
    std::vector<Delivery> m_deliveries;
};

} // namespace manetlab::link

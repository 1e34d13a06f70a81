#include "manetlab/link/medium.hpp"

#include <algorithm>
#include <cmath>

#include "manetlab/sim/errors.hpp"

namespace manetlab::link {

namespace {
// Carrier sensing keeps a NIC busy well beyond decode range; the usual
// rule of thumb is about twice the communication range.
constexpr double kCarrierSenseRangeFactor = 2.0;
} // namespace

Medium::Medium(sim::Scheduler& sched, MediumModel model, PowerSaveModel ps, sim::SeededRng rng)
    : m_sched(sched), m_model(model), m_ps(ps), m_rng(rng)
{
}

void Medium::add_node(const NodeId& id, Position pos)
{
    if (m_nodes.count(id))
        throw ValidationError("duplicate node id: " + id);
    NodeState n;
    n.home = pos;
    m_nodes.emplace(id, std::move(n));
}

void Medium::set_waypoints(const NodeId& id, std::vector<Waypoint> waypoints)
{
    state(id).waypoints = std::move(waypoints);
}

const Medium::NodeState& Medium::state(const NodeId& id) const
{
    auto it = m_nodes.find(id);
    if (it == m_nodes.end())
        throw UnknownNode("unknown node: " + id);
    return it->second;
}

Medium::NodeState& Medium::state(const NodeId& id)
{
    return const_cast<NodeState&>(const_cast<const Medium*>(this)->state(id));
}

Position Medium::position_at(const NodeState& n, sim::SimTime t) const
{
    if (n.waypoints.empty())
        return n.home;
    Position prev_pos = n.home;
    sim::SimTime prev_t = 0;
    for (const auto& wp : n.waypoints) {
        if (t <= wp.at) {
            if (wp.at == prev_t)
                return wp.pos;
            double f = static_cast<double>(t - prev_t) / static_cast<double>(wp.at - prev_t);
            return {prev_pos.x + f * (wp.pos.x - prev_pos.x),
                    prev_pos.y + f * (wp.pos.y - prev_pos.y)};
        }
        prev_pos = wp.pos;
        prev_t = wp.at;
    }
    return prev_pos;
}

Position Medium::position(const NodeId& id) const
{
    return position_at(state(id), m_sched.now());
}

void Medium::set_fault(const NodeId& id, Fault fault)
{
    state(id).fault = fault;
}

Fault Medium::fault(const NodeId& id) const
{
    return state(id).fault;
}

bool Medium::associate(const NodeId& id, LinkMode mode, const std::string& ssid)
{
    NodeState& n = state(id);
    if (mode == LinkMode::Ibss && n.fault == Fault::DriverNoIbss)
        return false;
    n.is_associated = true;
    n.mode = mode;
    n.ssid = ssid;
    n.ap.clear();
    if (mode == LinkMode::InfrastructureStation) {
        // Join the in-range AP advertising this network.
        for (const auto& [oid, other] : m_nodes) {
            if (oid != id && other.is_associated && other.mode == LinkMode::InfrastructureAp &&
                other.ssid == ssid && in_range(id, oid)) {
                n.ap = oid;
                break;
            }
        }
        if (n.ap.empty()) {
            n.is_associated = false;
            return false;
        }
    } else if (mode == LinkMode::Ibss && n.fault != Fault::FakeApIbss) {
        // A faulty chipset that joined earlier poses as the cell's hub; late
        // joiners bind to it as if it were an access point.
        for (const auto& [oid, other] : m_nodes) {
            if (oid != id && other.is_associated && other.fault == Fault::FakeApIbss &&
                other.mode == LinkMode::Ibss && other.ssid == ssid && in_range(id, oid)) {
                n.ap = oid;
                break;
            }
        }
    }
    return true;
}

void Medium::dissociate(const NodeId& id)
{
    NodeState& n = state(id);
    n.is_associated = false;
    n.ap.clear();
    n.queue.clear();
}

bool Medium::associated(const NodeId& id) const
{
    return state(id).is_associated;
}

LinkMode Medium::mode(const NodeId& id) const
{
    return state(id).mode;
}

bool Medium::in_range(const NodeId& a, const NodeId& b) const
{
    sim::SimTime now = m_sched.now();
    return distance(position_at(state(a), now), position_at(state(b), now)) <=
           m_model.radio_range_m;
}

bool Medium::bss_member(const NodeState& n, const NodeId& ap) const
{
    return n.is_associated && n.ap == ap;
}

std::vector<NodeId> Medium::neighbors(const NodeId& id) const
{
    const NodeState& n = state(id);
    std::vector<NodeId> out;
    if (!n.is_associated)
        return out;

    auto acts_as_ap = [&](const NodeState& s) {
        return s.mode == LinkMode::InfrastructureAp ||
               (s.fault == Fault::FakeApIbss && s.mode == LinkMode::Ibss);
    };

    if (acts_as_ap(n)) {
        for (const auto& [oid, other] : m_nodes)
            if (oid != id && bss_member(other, id) && in_range(oid, id))
                out.push_back(oid);
        return out;
    }

    if (!n.ap.empty()) {
        // Station view of a BSS: the AP plus every fellow member it can relay
        // to. Everything dies with the AP.
        auto hub_it = m_nodes.find(n.ap);
        if (hub_it == m_nodes.end() || !hub_it->second.is_associated || !in_range(id, n.ap))
            return out;
        out.push_back(n.ap);
        for (const auto& [oid, other] : m_nodes)
            if (oid != id && oid != n.ap && bss_member(other, n.ap) && in_range(oid, n.ap))
                out.push_back(oid);
        std::sort(out.begin(), out.end());
        return out;
    }

    for (const auto& [oid, other] : m_nodes) {
        if (oid == id || !other.is_associated)
            continue;
        if (other.mode != LinkMode::Ibss || other.ssid != n.ssid || !other.ap.empty())
            continue;
        if (other.fault == Fault::FakeApIbss)
            continue; // the hub's cell is a separate world
        if (in_range(id, oid))
            out.push_back(oid);
    }
    return out;
}

std::vector<NodeId> Medium::domain_of(const NodeId& id) const
{
    std::vector<NodeId> members{id};
    std::set<NodeId> seen{id};
    for (std::size_t i = 0; i < members.size(); ++i) {
        for (const NodeId& nb : neighbors(members[i]))
            if (seen.insert(nb).second)
                members.push_back(nb);
    }
    std::sort(members.begin(), members.end());
    return members;
}

sim::SimTime Medium::airtime_us(std::uint32_t size_bytes) const
{
    double bits = static_cast<double>(size_bytes) * 8.0;
    return static_cast<sim::SimTime>(std::llround(bits / m_model.nominal_capacity_bps * 1e6));
}

FrameId Medium::transmit(Frame frame, const NodeId& from)
{
    NodeState& n = state(from);
    if (!n.is_associated)
        throw NotAssociated("transmit from unassociated node " + from);
    if (frame.dst.empty())
        frame.multicast = true; // broadcast is a multicast frame
    frame.src = from;
    if (frame.origin.empty())
        frame.origin = from;

    FrameId id = m_next_frame++;
    Pending p;
    p.frame = std::move(frame);
    p.id = id;
    p.enqueued_at = m_sched.now();
    p.seq = m_next_seq++;

    if (!n.ap.empty()) {
        // Everything from a BSS member goes through its hub first.
        auto hub_it = m_nodes.find(n.ap);
        if (hub_it == m_nodes.end() || !hub_it->second.is_associated || !in_range(from, n.ap)) {
            drop(DropReason::HubLost);
            return id;
        }
        p.rf_dst = n.ap;
    } else {
        p.rf_dst = p.frame.dst;
    }

    n.queue.push_back(std::move(p));
    request_grant(from);
    return id;
}

std::size_t Medium::queue_length(const NodeId& id) const
{
    return state(id).queue.size();
}

void Medium::set_receive_handler(const NodeId& id, ReceiveFn fn)
{
    state(id).on_receive = std::move(fn);
}

void Medium::set_transmit_complete_handler(const NodeId& id, TransmitCompleteFn fn)
{
    state(id).on_transmit_complete = std::move(fn);
}

void Medium::request_grant(const NodeId& id)
{
    sim::SimTime busy_until = 0;
    for (const NodeId& m : domain_of(id))
        busy_until = std::max(busy_until, state(m).busy_until);
    sim::SimTime at = std::max(m_sched.now(), busy_until);
    m_sched.schedule(at, [this, id] { grant(id); });
}

void Medium::grant(const NodeId& via)
{
    sim::SimTime now = m_sched.now();
    std::vector<NodeId> members = domain_of(via);

    for (const NodeId& m : members)
        if (state(m).busy_until > now)
            return; // slot in progress; its completion re-arms the domain

    // FIFO across the domain: the member whose head frame waited longest
    // transmits next.
    const NodeId* next = nullptr;
    std::uint64_t best_seq = 0;
    int backlogged = 0;
    for (const NodeId& m : members) {
        const NodeState& s = state(m);
        if (s.queue.empty())
            continue;
        ++backlogged;
        if (!next || s.queue.front().seq < best_seq) {
            next = &m;
            best_seq = s.queue.front().seq;
        }
    }
    if (!next)
        return;

    NodeId tx = *next;
    NodeState& txs = state(tx);
    Pending pending = std::move(txs.queue.front());
    txs.queue.pop_front();

    sim::SimTime air = airtime_us(pending.frame.size_bytes);
    double factor = 1.0 - m_model.contention_overhead * (backlogged - 1);
    factor = std::max(factor, 0.1);
    sim::SimTime slot = (backlogged > 1)
                            ? static_cast<sim::SimTime>(
                                  std::llround(static_cast<double>(air) / factor))
                            : air;
    sim::SimTime gap = slot - air;
    sim::SimTime air_start = now + gap;
    sim::SimTime air_end = now + slot;

    // Ledger: the frame occupies [air_start, air_end); a preceding contention
    // gap is owned, as tx-attempt time, by members stuck with locally
    // originated backlog.
    charge(txs.epochs, &EpochBusy::tx_us, air_start, air_end);
    if (gap > 0) {
        for (const NodeId& m : members) {
            NodeState& s = state(m);
            bool head_local =
                (m == tx) ? (pending.frame.origin == m)
                          : (!s.queue.empty() && s.queue.front().frame.origin == m);
            if (head_local)
                charge(s.epochs, &EpochBusy::contend_us, now, air_start);
        }
    }
    double cs_range = m_model.radio_range_m * kCarrierSenseRangeFactor;
    for (const NodeId& m : members) {
        if (m == tx)
            continue;
        if (distance(position_at(state(m), now), position_at(txs, now)) <= cs_range)
            charge(state(m).epochs, &EpochBusy::rx_us, air_start, air_end);
    }

    for (const NodeId& m : members)
        state(m).busy_until = air_end;

    m_sched.schedule(air_end, [this, tx, p = std::move(pending), air_start, air_end]() mutable {
        complete(tx, std::move(p), air_start, air_end);
    });
}

void Medium::complete(const NodeId& tx, Pending pending, sim::SimTime, sim::SimTime air_end)
{
    NodeState& txs = state(tx);
    sim::SimTime proc = sim::from_seconds(m_model.per_hop_processing_s);

    if (pending.rf_dst.empty()) {
        // Broadcast: receivers are whoever neighbors the transmitter when the
        // frame leaves the air.
        for (const NodeId& to : neighbors(tx)) {
            if (to == pending.frame.src)
                continue;
            m_sched.schedule(air_end + proc,
                             [this, tx, pending, to] { deliver(tx, pending, to, m_sched.now()); });
        }
    } else {
        NodeId to = pending.rf_dst;
        sim::SimTime extra = 0;
        const NodeState& rcv = state(to);
        bool tx_is_hub = txs.mode == LinkMode::InfrastructureAp;
        if (tx_is_hub && m_ps.enabled && rcv.is_associated &&
            rcv.mode == LinkMode::InfrastructureStation && rcv.queue.empty()) {
            // Power save: a dozing station's frame waits for a DTIM beacon
            // unless more downlink traffic is keeping it awake.
            bool more_queued = false;
            for (const Pending& q : txs.queue)
                if (q.rf_dst == to || q.frame.dst == to)
                    more_queued = true;
            if (!more_queued)
                extra = sim::from_seconds(power_save_delay(m_rng, m_ps));
        }
        m_sched.schedule(air_end + proc + extra,
                         [this, tx, pending, to] { deliver(tx, pending, to, m_sched.now()); });
    }

    if (txs.on_transmit_complete)
        txs.on_transmit_complete(pending.id);
    grant(tx);
}

void Medium::deliver(const NodeId& tx, const Pending& pending, const NodeId& to, sim::SimTime at)
{
    // Connectivity must still hold when the frame lands; teardown or motion
    // in the meantime loses it.
    std::vector<NodeId> nbrs = neighbors(tx);
    if (std::find(nbrs.begin(), nbrs.end(), to) == nbrs.end()) {
        drop(state(to).is_associated ? DropReason::OutOfRange : DropReason::Unassociated);
        return;
    }

    NodeState& rcv = state(to);
    const Frame& frame = pending.frame;

    bool final_hop = frame.dst.empty() || frame.dst == to;
    if (!final_hop) {
        // BSS relay: the hub puts the frame back on the air toward its true
        // destination.
        Pending leg2;
        leg2.frame = frame;
        leg2.rf_dst = frame.dst;
        leg2.relay_leg = true;
        leg2.id = pending.id;
        leg2.enqueued_at = at;
        leg2.seq = m_next_seq++;
        rcv.queue.push_back(std::move(leg2));
        request_grant(to);
        return;
    }

    if (m_trace_deliveries)
        m_deliveries.push_back({pending.id, frame.src, to, at});
    if (rcv.on_receive)
        rcv.on_receive(frame, at);
}

void Medium::charge(std::vector<EpochBusy>& epochs, std::uint64_t EpochBusy::*field,
                    sim::SimTime t0, sim::SimTime t1) const
{
    while (t0 < t1) {
        std::size_t epoch = t0 / sim::kMicrosPerSecond;
        sim::SimTime edge = (epoch + 1) * sim::kMicrosPerSecond;
        sim::SimTime upto = std::min(edge, t1);
        if (epochs.size() <= epoch)
            epochs.resize(epoch + 1);
        epochs[epoch].*field += upto - t0;
        t0 = upto;
    }
}

BusyAirtime Medium::busy_airtime(const NodeId& id, sim::SimTime t0, sim::SimTime t1) const
{
    const NodeState& n = state(id);
    BusyAirtime out;
    std::uint64_t tx_us = 0, rx_us = 0;
    for (std::size_t e = t0 / sim::kMicrosPerSecond; e < (t1 + sim::kMicrosPerSecond - 1) / sim::kMicrosPerSecond; ++e) {
        if (e >= n.epochs.size())
            break;
        tx_us += n.epochs[e].tx_us;
        rx_us += n.epochs[e].rx_us;
    }
    out.tx_s = static_cast<double>(tx_us) / 1e6;
    out.rx_s = static_cast<double>(rx_us) / 1e6;
    return out;
}

double Medium::contend_airtime(const NodeId& id, sim::SimTime t0, sim::SimTime t1) const
{
    const NodeState& n = state(id);
    std::uint64_t us = 0;
    for (std::size_t e = t0 / sim::kMicrosPerSecond; e < (t1 + sim::kMicrosPerSecond - 1) / sim::kMicrosPerSecond; ++e) {
        if (e >= n.epochs.size())
            break;
        us += n.epochs[e].contend_us;
    }
    return static_cast<double>(us) / 1e6;
}

} // namespace manetlab::link

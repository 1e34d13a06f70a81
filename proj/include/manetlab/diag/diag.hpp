#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "manetlab/routing/engine.hpp"

namespace manetlab::diag {

struct PingRecord
{
    int seq = 0;
    sim::SimTime sent_at = 0;
    std::optional<sim::SimTime> received_at;

    bool lost() const { return !received_at.has_value(); }
    std::optional<double> rtt_s() const
    {
        if (!received_at)
            return std::nullopt;
        return sim::to_seconds(*received_at - sent_at);
    }
};

struct PingOptions
{
    int count = 30;
    double interval_s = 1.0;
    double timeout_s = 2.0;
    std::uint32_t size_bytes = 64;
};

struct PingSeries
{
    std::vector<PingRecord> records;
    double timeout_s = 2.0;
    bool done = false;

    int received() const;
    double loss_rate() const; // 1.0 when nothing was sent
    std::optional<double> median_rtt_s() const;
    std::optional<double> max_rtt_s() const;
};

struct TraceHop
{
    routing::Ipv4 addr;
    double rtt_s = 0.0;
};

struct TraceResult
{
    std::vector<TraceHop> hops;
    bool reached = false;
    bool done = false;
};

struct PositionSample
{
    sim::SimTime at = 0;
    link::NodeId node;
    link::Position pos;
};

// Samples scripted node positions at a fixed period.
class PositionLog
{
  public:
    PositionLog(sim::Scheduler& sched, link::Medium& medium, std::vector<link::NodeId> nodes,
                double period_s = 1.0);

    // Schedules samples from now to now + duration, both ends included.
    void start(double duration_s);
    const std::vector<PositionSample>& samples() const { return m_samples; }

  private:
    sim::Scheduler& m_sched;
    link::Medium& m_medium;
    std::vector<link::NodeId> m_nodes;
    double m_period_s;
    std::vector<PositionSample> m_samples;
};

// The tools layer: ping, traceroute and routing-table dumps over the
// emulated network. Results fill in as the simulation advances.
class Diag
{
  public:
    Diag(sim::Scheduler& sched, routing::Engine& engine, netconfig::NetConfig& net);

    // Installs the responders (echo, trace) a standard node answers with.
    void install_node(const link::NodeId& node);

    std::shared_ptr<PingSeries> ping(const link::NodeId& src, routing::Ipv4 dst,
                                     PingOptions options = {});

    // TTL-sweep probing, three probes per level; `reached == false` after the
    // sweep means the destination never answered (unreachable).
    std::shared_ptr<TraceResult> traceroute(const link::NodeId& src, routing::Ipv4 dst,
                                            int max_ttl = 16, int probes_per_ttl = 3,
                                            double timeout_s = 2.0);

    // Deterministic rendering of the node's routing table, one line per
    // destination in address order.
    std::string route_dump(const link::NodeId& node) const;

  private:
    struct EchoPayload
    {
        std::uint64_t token = 0;
        int seq = 0;
    };
    struct TracePayload
    {
        std::uint64_t token = 0;
        int ttl = 0;
    };
    struct TraceState
    {
        std::shared_ptr<TraceResult> result;
        link::NodeId src;
        routing::Ipv4 dst;
        int ttl = 1;
        int attempt = 0;
        int max_ttl = 16;
        int probes_per_ttl = 3;
        double timeout_s = 2.0;
        sim::SimTime sent_at = 0;
        std::optional<sim::EventId> timeout_event;
    };

    void ensure_dispatchers(const link::NodeId& node);
    void send_trace_probe(std::uint64_t token);
    void on_trace_timeout(std::uint64_t token);
    void on_trace_answer(const link::NodeId& node, const routing::NetPacket& pkt,
                         sim::SimTime at, bool final_hop);
    std::string render(routing::Ipv4 addr) const;

    sim::Scheduler& m_sched;
    routing::Engine& m_engine;
    netconfig::NetConfig& m_net;
    std::uint64_t m_next_token = 1;
    std::set<link::NodeId> m_dispatching;
    std::map<link::NodeId, std::map<std::uint64_t, std::shared_ptr<PingSeries>>> m_pings;
    std::map<std::uint64_t, TraceState> m_traces;
};

} // namespace manetlab::diag

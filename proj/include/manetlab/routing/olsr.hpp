#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "manetlab/routing/plugin.hpp"

namespace manetlab::routing {

enum class LinkStatus { None, Asym, Sym };

struct OlsrParams
{
    double hello_interval_s = 2.0;
    double tc_interval_s = 5.0;
    double hold_time_s = 6.0;

    static OlsrParams from_json(const nlohmann::json& j);
};

// HELLO advertises the sender's links: the neighbor, how the sender sees the
// link, and whether the sender picked that neighbor as a multipoint relay.
struct HelloLink
{
    Ipv4 neighbor;
    LinkStatus status = LinkStatus::Asym;
    bool is_mpr = false;
};

struct HelloMsg
{
    Ipv4 origin;
    std::vector<HelloLink> links;
};

struct TcMsg
{
    Ipv4 origin;
    std::uint16_t seq = 0;
    std::vector<Ipv4> selectors;
};

// Proactive link-state routing: HELLO neighbor sensing, multipoint-relay
// selection, and TC topology flooding, with shortest-hop route computation.
class OlsrPlugin : public RoutingPlugin
{
  public:
    OlsrPlugin(RouterHost host, OlsrParams params);

    void start() override;
    void stop() override;
    void on_control_packet(const NetPacket& pkt, Ipv4 from) override;
    void tick(sim::SimTime now) override;
    RouteTable routes() const override;
    std::string name() const override { return "olsr"; }

    // --- introspection (tests, diagnostics) ----------------------------------
    struct Stats
    {
        std::uint64_t hellos_rx = 0;
        std::uint64_t tcs_rx = 0;
        std::uint64_t tcs_forwarded = 0;
        std::uint64_t duplicate_tcs_dropped = 0;
        std::uint64_t malformed_dropped = 0;
    };
    struct TopoEdge
    {
        Ipv4 dest;
        Ipv4 last_hop;
        auto operator<=>(const TopoEdge&) const = default;
    };

    const OlsrParams& params() const { return m_params; }
    LinkStatus link_status(Ipv4 neighbor) const;
    std::set<Ipv4> symmetric_neighbors() const;
    std::map<Ipv4, std::set<Ipv4>> two_hop() const; // neighbor -> reachable set
    const std::set<Ipv4>& mpr_set() const { return m_mpr_set; }
    std::set<Ipv4> mpr_selectors() const;
    std::vector<TopoEdge> topology() const;
    const Stats& stats() const { return m_stats; }

    // Called after every MPR recomputation (coverage invariant checks).
    void set_mpr_observer(std::function<void(const OlsrPlugin&)> fn) { m_observer = std::move(fn); }

  private:
    struct LinkTuple
    {
        sim::SimTime asym_until = 0;
        sim::SimTime sym_until = 0;
    };
    struct TopologyTuple
    {
        Ipv4 dest;
        Ipv4 last_hop;
        std::uint16_t seq = 0;
        sim::SimTime until = 0;
    };

    void emit_hello();
    void emit_tc();
    void process_hello(const HelloMsg& msg, sim::SimTime now);
    void process_tc(const TcMsg& msg, Ipv4 from, const NetPacket& pkt, sim::SimTime now);
    void recompute_mprs();
    void schedule_hello();
    void schedule_tc();
    void schedule_tick();
    sim::SimTime jittered(double interval_s);
    bool link_sym(const LinkTuple& t, sim::SimTime now) const { return t.sym_until > now; }

    RouterHost m_host;
    OlsrParams m_params;
    bool m_started = false;

    std::map<Ipv4, LinkTuple> m_links;
    std::map<std::pair<Ipv4, Ipv4>, sim::SimTime> m_two_hop;  // (neighbor, 2-hop) -> expiry
    std::set<Ipv4> m_mpr_set;
    std::map<Ipv4, sim::SimTime> m_selectors;                 // selector -> expiry
    std::vector<TopologyTuple> m_topology;
    std::map<std::pair<Ipv4, std::uint16_t>, sim::SimTime> m_duplicates;
    std::uint16_t m_seq = 0;

    std::optional<sim::EventId> m_hello_timer;
    std::optional<sim::EventId> m_tc_timer;
    std::optional<sim::EventId> m_tick_timer;

    Stats m_stats;
    std::function<void(const OlsrPlugin&)> m_observer;
};

} // namespace manetlab::routing

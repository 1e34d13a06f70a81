#include "manetlab/harness/runner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <set>

#include "manetlab/harness/workbench.hpp"
#include "manetlab/sim/errors.hpp"

namespace manetlab::harness {

namespace {

struct FlowState
{
    FlowSpec spec;
    std::string label;
    std::map<std::int64_t, std::uint64_t> buckets; // delivered bits per second
    std::uint64_t total_bits = 0;
    std::shared_ptr<diag::PingSeries> series;

    // discovery bookkeeping
    bool found = false;
    std::optional<routing::Ipv4> peer;
    std::set<int> acked;
    int session_total = 20;
    bool session_ok = false;
};

class Runner
{
  public:
    explicit Runner(const Scenario& sc) : m_sc(sc), m_wb(sc) {}

    MetricsBundle run()
    {
        m_bundle.scenario = m_sc.name;
        m_bundle.setup_failures = m_wb.setup_failures();
        m_bundle.addresses = m_wb.addresses();
        for (const NodeSpec& n : m_sc.nodes) {
            energy::BatteryState st;
            st.percent = n.battery_percent;
            m_battery.emplace(n.id, st);
        }

        setup_flows();
        install_feeders();
        main_loop();
        finalize();
        return std::move(m_bundle);
    }

  private:
    bool try_send(const link::NodeId& src, routing::NetPacket pkt)
    {
        try {
            m_wb.engine.send(src, std::move(pkt));
            return true;
        } catch (const NotAssociated&) {
            return false; // sender is down; the traffic simply never airs
        }
    }

    void setup_flows()
    {
        std::map<std::string, int> seen;
        for (const FlowSpec& spec : m_sc.flows) {
            auto state = std::make_shared<FlowState>();
            state->spec = spec;
            state->label = spec.label();
            if (int n = seen[state->label]++; n > 0)
                state->label += "#" + std::to_string(n + 1);
            m_flows.push_back(state);

            switch (spec.kind) {
            case FlowKind::UdpSaturation: setup_saturation(state); break;
            case FlowKind::Cbr: setup_cbr(state); break;
            case FlowKind::PingSeries: setup_ping(state); break;
            case FlowKind::Discovery: setup_discovery(state); break;
            }
        }
    }

    // Counts payload bits delivered at the flow's destination, bucketed by
    // whole simulated seconds.
    void subscribe_sink(const std::shared_ptr<FlowState>& flow)
    {
        m_wb.engine.subscribe(
            flow->spec.dst, "data:" + flow->label,
            [flow](const routing::NetPacket& pkt, routing::Ipv4, sim::SimTime at) {
                double at_s = sim::to_seconds(at);
                if (at_s < flow->spec.start_s || at_s >= flow->spec.stop_s)
                    return;
                std::uint64_t bits = std::uint64_t{pkt.size_bytes} * 8;
                flow->buckets[static_cast<std::int64_t>(at / sim::kMicrosPerSecond)] += bits;
                flow->total_bits += bits;
            });
    }

    void setup_saturation(const std::shared_ptr<FlowState>& flow)
    {
        subscribe_sink(flow);
        const FlowSpec& spec = flow->spec;
        auto feed = [this, flow] {
            const FlowSpec& f = flow->spec;
            double now = sim::to_seconds(m_wb.sched.now());
            if (now < f.start_s || now >= f.stop_s)
                return;
            auto dst = m_wb.address_of(f.dst);
            if (!dst)
                return;
            // Keep a two-deep transmit backlog, the way a benchmark tool
            // pushing faster than the channel always has a frame ready.
            while (m_wb.medium.queue_length(f.src) < 2) {
                routing::NetPacket pkt;
                pkt.dst = *dst;
                pkt.kind = "data:" + flow->label;
                pkt.size_bytes = f.size_or(1470);
                if (!try_send(f.src, std::move(pkt)))
                    return;
            }
        };
        m_feeders[spec.src].push_back(feed);
        m_wb.sched.schedule(sim::from_seconds(spec.start_s), feed);
    }

    void setup_cbr(const std::shared_ptr<FlowState>& flow)
    {
        subscribe_sink(flow);
        const FlowSpec& spec = flow->spec;
        std::uint32_t size = spec.size_or(1470);
        auto interval = static_cast<sim::SimTime>(
            std::llround(static_cast<double>(size) * 8.0 / spec.rate_bps * 1e6));
        auto tick = std::make_shared<std::function<void()>>();
        *tick = [this, flow, size, interval, tick] {
            const FlowSpec& f = flow->spec;
            if (sim::to_seconds(m_wb.sched.now()) >= f.stop_s)
                return;
            if (auto dst = m_wb.address_of(f.dst)) {
                routing::NetPacket pkt;
                pkt.dst = *dst;
                pkt.kind = "data:" + flow->label;
                pkt.size_bytes = size;
                try_send(f.src, std::move(pkt));
            }
            m_wb.sched.schedule_in(interval, *tick);
        };
        m_wb.sched.schedule(sim::from_seconds(spec.start_s), *tick);
    }

    void setup_ping(const std::shared_ptr<FlowState>& flow)
    {
        const FlowSpec& spec = flow->spec;
        m_wb.sched.schedule(sim::from_seconds(spec.start_s), [this, flow] {
            const FlowSpec& f = flow->spec;
            auto dst = m_wb.address_of(f.dst);
            if (!dst || !m_wb.address_of(f.src))
                return; // an endpoint never came up; the series stays empty
            diag::PingOptions opts;
            opts.count = f.count;
            opts.interval_s = f.interval_s;
            opts.size_bytes = f.size_or(64);
            flow->series = m_wb.dx.ping(f.src, *dst, opts);
        });
    }

    void setup_discovery(const std::shared_ptr<FlowState>& flow)
    {
        const FlowSpec& spec = flow->spec;
        const std::string& label = flow->label;

        // The advertised service answers multicast queries with a unicast
        // reply carrying its address.
        m_wb.engine.subscribe(spec.dst, "disco-query:" + label,
                              [this, flow](const routing::NetPacket& pkt, routing::Ipv4,
                                           sim::SimTime) {
                                  routing::NetPacket reply;
                                  reply.dst = pkt.src;
                                  reply.kind = "disco-reply:" + flow->label;
                                  reply.size_bytes = 64;
                                  try_send(flow->spec.dst, std::move(reply));
                              });
        m_wb.engine.subscribe(spec.src, "disco-reply:" + label,
                              [flow](const routing::NetPacket& pkt, routing::Ipv4, sim::SimTime) {
                                  flow->found = true;
                                  flow->peer = pkt.src;
                              });

        // Echo-style session: each packet is acknowledged, the pump retries
        // the lowest unacknowledged sequence once a second.
        m_wb.engine.subscribe(spec.dst, "session:" + label,
                              [this, flow](const routing::NetPacket& pkt, routing::Ipv4,
                                           sim::SimTime) {
                                  const int* seq = std::any_cast<int>(&pkt.payload);
                                  if (!seq)
                                      return;
                                  routing::NetPacket ack;
                                  ack.dst = pkt.src;
                                  ack.kind = "session-ack:" + flow->label;
                                  ack.size_bytes = 64;
                                  ack.payload = *seq;
                                  try_send(flow->spec.dst, std::move(ack));
                              });
        m_wb.engine.subscribe(spec.src, "session-ack:" + label,
                              [flow](const routing::NetPacket& pkt, routing::Ipv4, sim::SimTime) {
                                  if (const int* seq = std::any_cast<int>(&pkt.payload)) {
                                      flow->acked.insert(*seq);
                                      if (static_cast<int>(flow->acked.size()) >=
                                          flow->session_total)
                                          flow->session_ok = true;
                                  }
                              });

        // Three multicast queries, one second apart.
        for (int i = 0; i < 3; ++i)
            m_wb.sched.schedule(sim::from_seconds(spec.start_s + i), [this, flow] {
                routing::NetPacket query;
                query.multicast = true;
                query.kind = "disco-query:" + flow->label;
                query.size_bytes = 120;
                try_send(flow->spec.src, std::move(query));
            });

        auto pump = std::make_shared<std::function<void()>>();
        *pump = [this, flow, pump] {
            const FlowSpec& f = flow->spec;
            if (sim::to_seconds(m_wb.sched.now()) >= f.stop_s || flow->session_ok)
                return;
            if (!flow->peer)
                flow->peer = m_wb.address_of(f.dst); // manual address entry fallback
            if (flow->peer) {
                int seq = 0;
                while (flow->acked.count(seq))
                    ++seq;
                if (seq < flow->session_total) {
                    routing::NetPacket pkt;
                    pkt.dst = *flow->peer;
                    pkt.kind = "session:" + flow->label;
                    pkt.size_bytes = 200;
                    pkt.payload = seq;
                    try_send(f.src, std::move(pkt));
                }
            }
            m_wb.sched.schedule_in(sim::from_seconds(1.0), *pump);
        };
        m_wb.sched.schedule(sim::from_seconds(spec.start_s + 3.0), *pump);
    }

    // A node may source several saturation flows; the medium has one
    // transmit-complete hook per node, so fan out from a single handler.
    void install_feeders()
    {
        for (auto& [node, fns] : m_feeders) {
            auto* list = &fns;
            m_wb.medium.set_transmit_complete_handler(node, [list](link::FrameId) {
                for (auto& fn : *list)
                    fn();
            });
        }
    }

    void main_loop()
    {
        bool stop_on_depletion = std::any_of(m_sc.flows.begin(), m_sc.flows.end(),
                                             [](const FlowSpec& f) { return f.until_depletion; });
        bool ps_enabled = m_wb.medium.power_save().enabled;

        double t = 0.0;
        while (t < m_sc.duration_s) {
            double dt = std::min(1.0, m_sc.duration_s - t);
            sim::SimTime t0 = m_wb.sched.now();
            m_wb.sched.run_until(t0 + sim::from_seconds(dt));

            bool depleted_now = false;
            for (auto& [id, state] : m_battery) {
                auto busy = m_wb.medium.busy_airtime(id, t0, m_wb.sched.now());
                double contend = m_wb.medium.contend_airtime(id, t0, m_wb.sched.now());
                bool newly = energy::energy_step(state, m_sc.energy, dt,
                                                 busy.tx_s + contend, busy.rx_s,
                                                 m_wb.medium.mode(id), ps_enabled,
                                                 m_wb.engine.plugin(id) != nullptr);
                depleted_now = depleted_now || newly;
            }
            t += dt;
            poll_convergence(t);
            if (stop_on_depletion && depleted_now) {
                m_bundle.stopped_on_depletion = true;
                break;
            }
        }
        m_bundle.duration_s = t;
    }

    void poll_convergence(double t)
    {
        for (const link::NodeId& u : m_wb.routing_nodes()) {
            routing::RouteTable table = m_wb.engine.routes(u);
            for (const link::NodeId& v : m_wb.routing_nodes()) {
                if (u == v)
                    continue;
                auto dst = m_bundle.addresses.find(v);
                bool present = dst != m_bundle.addresses.end() &&
                               table.entries.count(dst->second) != 0;
                if (!present)
                    m_last_absent[{u, v}] = t;
            }
        }
        m_last_poll = t;
    }

    void finalize()
    {
        for (const auto& flow : m_flows) {
            const FlowSpec& spec = flow->spec;
            if (spec.kind == FlowKind::UdpSaturation || spec.kind == FlowKind::Cbr) {
                auto first = static_cast<std::int64_t>(std::floor(spec.start_s));
                auto last = static_cast<std::int64_t>(
                    std::ceil(std::min(spec.stop_s, m_bundle.duration_s)));
                if (!flow->buckets.empty())
                    last = std::max(last, flow->buckets.rbegin()->first + 1);
                for (std::int64_t s = first; s < last; ++s) {
                    auto it = flow->buckets.find(s);
                    m_bundle.throughput.push_back(
                        {s, flow->label, it == flow->buckets.end() ? 0 : it->second});
                }
                m_bundle.delivered_bits[flow->label] = flow->total_bits;
            } else if (spec.kind == FlowKind::PingSeries) {
                m_bundle.pings.push_back({flow->label, flow->series});
            } else if (spec.kind == FlowKind::Discovery) {
                m_bundle.discoveries.push_back({flow->label, flow->found, flow->session_ok});
            }
        }

        for (auto& [id, state] : m_battery)
            m_bundle.battery.emplace(id, std::move(state));

        for (const link::NodeId& u : m_wb.routing_nodes()) {
            m_bundle.final_routes[u] = m_wb.engine.routes(u);
            for (const link::NodeId& v : m_wb.routing_nodes()) {
                if (u == v)
                    continue;
                auto dst = m_bundle.addresses.find(v);
                bool present_at_end = dst != m_bundle.addresses.end() &&
                                      m_bundle.final_routes[u].entries.count(dst->second) != 0;
                auto absent = m_last_absent.find({u, v});
                double converged = absent == m_last_absent.end() ? 1.0 : absent->second + 1.0;
                m_bundle.convergence.push_back(
                    {u, v, present_at_end && converged <= m_last_poll ? converged : -1.0});
            }
        }

        m_bundle.drops = m_wb.engine.drops();
        for (const auto& [reason, count] : m_wb.medium.drops())
            m_bundle.drops[reason] += count;
    }

    const Scenario& m_sc;
    Workbench m_wb;
    std::map<link::NodeId, energy::BatteryState> m_battery;
    std::vector<std::shared_ptr<FlowState>> m_flows;
    std::map<link::NodeId, std::vector<std::function<void()>>> m_feeders;
    std::map<std::pair<link::NodeId, link::NodeId>, double> m_last_absent;
    double m_last_poll = 0.0;
    MetricsBundle m_bundle;
};

} // namespace

MetricsBundle run(const Scenario& scenario)
{
    scenario.validate();
    Runner runner(scenario);
    return runner.run();
}

} // namespace manetlab::harness

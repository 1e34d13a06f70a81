#include "manetlab/diag/diag.hpp"

namespace manetlab::diag {

std::shared_ptr<TraceResult> Diag::traceroute(const link::NodeId& src, routing::Ipv4 dst,
                                              int max_ttl, int probes_per_ttl, double timeout_s)
{
    auto result = std::make_shared<TraceResult>();
    std::uint64_t token = m_next_token++;
    TraceState state;
    state.result = result;
    state.src = src;
    state.dst = dst;
    state.max_ttl = max_ttl;
    state.probes_per_ttl = probes_per_ttl;
    state.timeout_s = timeout_s;
    m_traces[token] = std::move(state);
    ensure_dispatchers(src);
    send_trace_probe(token);
    return result;
}

void Diag::send_trace_probe(std::uint64_t token)
{
    TraceState& state = m_traces.at(token);
    state.sent_at = m_sched.now();

    routing::NetPacket pkt;
    pkt.dst = state.dst;
    pkt.ttl = state.ttl;
    pkt.kind = "trace-probe";
    pkt.size_bytes = 64;
    pkt.payload = TracePayload{token, state.ttl};
    m_engine.send(state.src, pkt);

    state.timeout_event = m_sched.schedule(state.sent_at + sim::from_seconds(state.timeout_s),
                                           [this, token] { on_trace_timeout(token); });
}

void Diag::on_trace_timeout(std::uint64_t token)
{
    auto it = m_traces.find(token);
    if (it == m_traces.end())
        return;
    TraceState& state = it->second;
    state.timeout_event.reset();
    if (++state.attempt < state.probes_per_ttl) {
        send_trace_probe(token);
        return;
    }
    // Every probe at this distance went unanswered. Hops that exist always
    // report back in the emulation, so deeper levels cannot do better; stop
    // here instead of sweeping the remaining TTLs.
    state.result->done = true;
    m_traces.erase(it);
}

void Diag::on_trace_answer(const link::NodeId& node, const routing::NetPacket& pkt,
                           sim::SimTime at, bool final_hop)
{
    const auto* probe = std::any_cast<TracePayload>(&pkt.payload);
    if (!probe)
        return;
    auto it = m_traces.find(probe->token);
    if (it == m_traces.end())
        return;
    TraceState& state = it->second;
    if (node != state.src || probe->ttl != state.ttl)
        return; // late answer from an already-finished level
    if (state.timeout_event) {
        m_sched.cancel(*state.timeout_event);
        state.timeout_event.reset();
    }
    state.result->hops.push_back({pkt.src, sim::to_seconds(at - state.sent_at)});
    if (final_hop) {
        state.result->reached = true;
        state.result->done = true;
        m_traces.erase(it);
        return;
    }
    if (++state.ttl > state.max_ttl) {
        state.result->done = true;
        m_traces.erase(it);
        return;
    }
    state.attempt = 0;
    send_trace_probe(probe->token);
}

} // namespace manetlab::diag

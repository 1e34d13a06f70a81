#include <algorithm>

#include "manetlab/diag/diag.hpp"

namespace manetlab::diag {

int PingSeries::received() const
{
    int n = 0;
    for (const auto& r : records)
        if (!r.lost())
            ++n;
    return n;
}

double PingSeries::loss_rate() const
{
    if (records.empty())
        return 1.0;
    return 1.0 - static_cast<double>(received()) / static_cast<double>(records.size());
}

std::optional<double> PingSeries::median_rtt_s() const
{
    std::vector<double> rtts;
    for (const auto& r : records)
        if (auto rtt = r.rtt_s())
            rtts.push_back(*rtt);
    if (rtts.empty())
        return std::nullopt;
    std::sort(rtts.begin(), rtts.end());
    std::size_t mid = rtts.size() / 2;
    if (rtts.size() % 2 == 1)
        return rtts[mid];
    return (rtts[mid - 1] + rtts[mid]) / 2.0;
}

std::optional<double> PingSeries::max_rtt_s() const
{
    std::optional<double> best;
    for (const auto& r : records)
        if (auto rtt = r.rtt_s())
            best = best ? std::max(*best, *rtt) : *rtt;
    return best;
}

Diag::Diag(sim::Scheduler& sched, routing::Engine& engine, netconfig::NetConfig& net)
    : m_sched(sched), m_engine(engine), m_net(net)
{
}

void Diag::install_node(const link::NodeId& node)
{
    m_engine.subscribe(node, "echo-request",
                       [this, node](const routing::NetPacket& pkt, routing::Ipv4, sim::SimTime) {
                           routing::NetPacket reply;
                           reply.dst = pkt.src;
                           reply.kind = "echo-reply";
                           reply.size_bytes = pkt.size_bytes;
                           reply.payload = pkt.payload;
                           m_engine.send(node, reply);
                       });
    m_engine.subscribe(node, "trace-probe",
                       [this, node](const routing::NetPacket& pkt, routing::Ipv4, sim::SimTime) {
                           routing::NetPacket reply;
                           reply.dst = pkt.src;
                           reply.kind = "trace-reply";
                           reply.size_bytes = 64;
                           reply.payload = pkt.payload;
                           m_engine.send(node, reply);
                       });
}

std::shared_ptr<PingSeries> Diag::ping(const link::NodeId& src, routing::Ipv4 dst,
                                       PingOptions options)
{
    auto series = std::make_shared<PingSeries>();
    series->timeout_s = options.timeout_s;
    series->records.reserve(static_cast<std::size_t>(options.count));
    std::uint64_t token = m_next_token++;
    m_pings[src][token] = series;
    ensure_dispatchers(src);

    sim::SimTime start = m_sched.now();
    for (int i = 0; i < options.count; ++i) {
        m_sched.schedule(start + sim::from_seconds(options.interval_s * i),
                         [this, src, dst, series, token, i, options] {
                             PingRecord rec;
                             rec.seq = i;
                             rec.sent_at = m_sched.now();
                             series->records.push_back(rec);

                             routing::NetPacket pkt;
                             pkt.dst = dst;
                             pkt.kind = "echo-request";
                             pkt.size_bytes = options.size_bytes;
                             pkt.payload = EchoPayload{token, i};
                             m_engine.send(src, pkt);
                         });
    }
    m_sched.schedule(start + sim::from_seconds(options.interval_s * (options.count - 1) +
                                               options.timeout_s),
                     [series] { series->done = true; });
    return series;
}

void Diag::ensure_dispatchers(const link::NodeId& node)
{
    if (!m_dispatching.insert(node).second)
        return;

    m_engine.subscribe(
        node, "echo-reply",
        [this, node](const routing::NetPacket& pkt, routing::Ipv4, sim::SimTime at) {
            const auto* echo = std::any_cast<EchoPayload>(&pkt.payload);
            if (!echo)
                return;
            auto by_token = m_pings.find(node);
            if (by_token == m_pings.end())
                return;
            auto it = by_token->second.find(echo->token);
            if (it == by_token->second.end())
                return;
            PingSeries& series = *it->second;
            auto rec = std::find_if(series.records.begin(), series.records.end(),
                                    [&](const PingRecord& r) { return r.seq == echo->seq; });
            if (rec == series.records.end() || !rec->lost())
                return;
            if (sim::to_seconds(at - rec->sent_at) <= series.timeout_s)
                rec->received_at = at;
        });

    m_engine.subscribe(node, "trace-reply",
                       [this, node](const routing::NetPacket& pkt, routing::Ipv4,
                                    sim::SimTime at) { on_trace_answer(node, pkt, at, true); });
    m_engine.subscribe(node, "time-exceeded",
                       [this, node](const routing::NetPacket& pkt, routing::Ipv4,
                                    sim::SimTime at) { on_trace_answer(node, pkt, at, false); });
}

} // namespace manetlab::diag

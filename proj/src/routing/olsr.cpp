#include "manetlab/routing/olsr.hpp"

#include <algorithm>

namespace manetlab::routing {

OlsrParams OlsrParams::from_json(const nlohmann::json& j)
{
    OlsrParams p;
    p.hello_interval_s = j.value("hello_interval_s", p.hello_interval_s);
    p.tc_interval_s = j.value("tc_interval_s", p.tc_interval_s);
    p.hold_time_s = j.value("hold_time_s", p.hold_time_s);
    return p;
}

OlsrPlugin::OlsrPlugin(RouterHost host, OlsrParams params)
    : m_host(std::move(host)), m_params(params)
{
}

void OlsrPlugin::start()
{
    if (m_started)
        return;
    m_started = true;
    // First HELLO goes out after a small random offset so co-started nodes
    // do not emit in lockstep; intervals are jittered the same way after.
    m_hello_timer = m_host.sched->schedule_in(
        sim::from_seconds(m_host.rng.uniform(0.1, 0.5)), [this] { emit_hello(); });
    schedule_tc();
    schedule_tick();
}

void OlsrPlugin::stop()
{
    if (!m_started)
        return;
    m_started = false;
    for (auto* timer : {&m_hello_timer, &m_tc_timer, &m_tick_timer}) {
        if (*timer)
            m_host.sched->cancel(**timer);
        timer->reset();
    }
    m_links.clear();
    m_two_hop.clear();
    m_mpr_set.clear();
    m_selectors.clear();
    m_topology.clear();
    m_duplicates.clear();
}

sim::SimTime OlsrPlugin::jittered(double interval_s)
{
    return sim::from_seconds(interval_s * (1.0 + 0.1 * m_host.rng.uniform(-1.0, 1.0)));
}

void OlsrPlugin::schedule_hello()
{
    m_hello_timer = m_host.sched->schedule_in(jittered(m_params.hello_interval_s),
                                              [this] { emit_hello(); });
}

void OlsrPlugin::schedule_tc()
{
    m_tc_timer = m_host.sched->schedule_in(jittered(m_params.tc_interval_s), [this] {
        if (!mpr_selectors().empty())
            emit_tc();
        schedule_tc();
    });
}

void OlsrPlugin::schedule_tick()
{
    m_tick_timer = m_host.sched->schedule_in(sim::from_seconds(1.0), [this] {
        tick(m_host.sched->now());
        schedule_tick();
    });
}

void OlsrPlugin::emit_hello()
{
    sim::SimTime now = m_host.sched->now();
    HelloMsg msg;
    msg.origin = m_host.self;
    for (const auto& [addr, tuple] : m_links) {
        if (tuple.asym_until <= now && tuple.sym_until <= now)
            continue;
        HelloLink link;
        link.neighbor = addr;
        link.status = link_sym(tuple, now) ? LinkStatus::Sym : LinkStatus::Asym;
        link.is_mpr = link.status == LinkStatus::Sym && m_mpr_set.count(addr) != 0;
        msg.links.push_back(link);
    }

    NetPacket pkt;
    pkt.src = m_host.self;
    pkt.ttl = 1;
    pkt.multicast = true;
    pkt.kind = "olsr-hello";
    pkt.size_bytes = 24 + 12 * static_cast<std::uint32_t>(msg.links.size());
    pkt.payload = msg;
    m_host.send_control(std::move(pkt));
    schedule_hello();
}

void OlsrPlugin::emit_tc()
{
    TcMsg msg;
    msg.origin = m_host.self;
    msg.seq = ++m_seq;
    for (Ipv4 s : mpr_selectors())
        msg.selectors.push_back(s);

    NetPacket pkt;
    pkt.src = m_host.self;
    pkt.ttl = 255;
    pkt.multicast = true;
    pkt.kind = "olsr-tc";
    pkt.size_bytes = 24 + 8 * static_cast<std::uint32_t>(msg.selectors.size());
    pkt.payload = msg;
    m_host.send_control(std::move(pkt));
}

void OlsrPlugin::on_control_packet(const NetPacket& pkt, Ipv4 from)
{
    if (!m_started)
        return;
    sim::SimTime now = m_host.sched->now();
    if (pkt.kind == "olsr-hello") {
        const auto* msg = std::any_cast<HelloMsg>(&pkt.payload);
        if (!msg) {
            ++m_stats.malformed_dropped;
            return;
        }
        ++m_stats.hellos_rx;
        process_hello(*msg, now);
    } else if (pkt.kind == "olsr-tc") {
        const auto* msg = std::any_cast<TcMsg>(&pkt.payload);
        if (!msg) {
            ++m_stats.malformed_dropped;
            return;
        }
        ++m_stats.tcs_rx;
        process_tc(*msg, from, pkt, now);
    } else {
        ++m_stats.malformed_dropped;
    }
}

void OlsrPlugin::process_hello(const HelloMsg& msg, sim::SimTime now)
{
    sim::SimTime hold = sim::from_seconds(m_params.hold_time_s);
    LinkTuple& link = m_links[msg.origin];
    link.asym_until = now + hold;

    bool lists_self = false;
    for (const auto& l : msg.links)
        if (l.neighbor == m_host.self)
            lists_self = true;
    if (lists_self)
        link.sym_until = now + hold;

    if (link_sym(link, now)) {
        bool had_selectors = !mpr_selectors().empty();
        for (const auto& l : msg.links) {
            if (l.neighbor == m_host.self) {
                // The sender tells us whether it picked us as its relay.
                if (l.is_mpr)
                    m_selectors[msg.origin] = now + hold;
                else
                    m_selectors.erase(msg.origin);
                continue;
            }
            if (l.status == LinkStatus::Sym)
                m_two_hop[{msg.origin, l.neighbor}] = now + hold;
        }
        // Newly gained first selector: advertise the topology right away
        // instead of waiting out the TC interval.
        if (!had_selectors && !mpr_selectors().empty())
            emit_tc();
    }
    recompute_mprs();
}

void OlsrPlugin::process_tc(const TcMsg& msg, Ipv4 from, const NetPacket& pkt, sim::SimTime now)
{
    if (msg.origin == m_host.self)
        return;
    // Only TCs heard from a symmetric neighbor are trusted; untrusted copies
    // must not enter the duplicate set or they would mask the real one.
    auto link_it = m_links.find(from);
    if (link_it == m_links.end() || !link_sym(link_it->second, now))
        return;
    auto dup_key = std::pair{msg.origin, msg.seq};
    if (auto it = m_duplicates.find(dup_key); it != m_duplicates.end() && it->second > now) {
        ++m_stats.duplicate_tcs_dropped;
        return;
    }
    m_duplicates[dup_key] = now + sim::from_seconds(30.0);

    // Newer information for this originator replaces older tuples wholesale.
    bool stale = std::any_of(m_topology.begin(), m_topology.end(), [&](const TopologyTuple& t) {
        return t.last_hop == msg.origin && t.seq > msg.seq;
    });
    if (!stale) {
        std::erase_if(m_topology, [&](const TopologyTuple& t) {
            return t.last_hop == msg.origin && t.seq < msg.seq;
        });
        sim::SimTime until = now + sim::from_seconds(3.0 * m_params.tc_interval_s);
        for (Ipv4 sel : msg.selectors) {
            auto it = std::find_if(m_topology.begin(), m_topology.end(), [&](const TopologyTuple& t) {
                return t.last_hop == msg.origin && t.dest == sel;
            });
            if (it != m_topology.end()) {
                it->seq = msg.seq;
                it->until = until;
            } else {
                m_topology.push_back({sel, msg.origin, msg.seq, until});
            }
        }
    }

    // Flood onward only when the previous hop chose us as its relay.
    if (m_selectors.count(from) != 0 && m_selectors.at(from) > now) {
        NetPacket fwd = pkt;
        fwd.src = m_host.self;
        --fwd.ttl;
        if (fwd.ttl > 0) {
            ++m_stats.tcs_forwarded;
            m_host.send_control(std::move(fwd));
        }
    }
}

void OlsrPlugin::tick(sim::SimTime now)
{
    std::erase_if(m_two_hop, [&](const auto& kv) { return kv.second <= now; });
    std::erase_if(m_selectors, [&](const auto& kv) { return kv.second <= now; });
    std::erase_if(m_topology, [&](const TopologyTuple& t) { return t.until <= now; });
    std::erase_if(m_duplicates, [&](const auto& kv) { return kv.second <= now; });
    std::erase_if(m_links, [&](const auto& kv) {
        return kv.second.asym_until <= now && kv.second.sym_until <= now;
    });
    recompute_mprs();
}

void OlsrPlugin::recompute_mprs()
{
    sim::SimTime now = m_host.sched->now();
    std::set<Ipv4> n = symmetric_neighbors();

    // coverage[n] = strict two-hop neighbors reachable through n
    std::map<Ipv4, std::set<Ipv4>> coverage;
    std::set<Ipv4> n2;
    for (const auto& [key, until] : m_two_hop) {
        const auto& [nbr, two] = key;
        if (until <= now || n.count(nbr) == 0)
            continue;
        if (two == m_host.self || n.count(two) != 0)
            continue;
        coverage[nbr].insert(two);
        n2.insert(two);
    }

    std::set<Ipv4> mprs;
    std::set<Ipv4> uncovered = n2;

    // Neighbors that are the only path to some strict two-hop neighbor.
    for (Ipv4 two : n2) {
        Ipv4 sole;
        int paths = 0;
        for (const auto& [nbr, cov] : coverage)
            if (cov.count(two) != 0) {
                ++paths;
                sole = nbr;
            }
        if (paths == 1)
            mprs.insert(sole);
    }
    for (Ipv4 m : mprs)
        for (Ipv4 covered : coverage[m])
            uncovered.erase(covered);

    // Greedy: most uncovered coverage, ties by total coverage, then address.
    while (!uncovered.empty()) {
        Ipv4 best;
        std::size_t best_gain = 0;
        std::size_t best_degree = 0;
        for (const auto& [nbr, cov] : coverage) {
            if (mprs.count(nbr) != 0)
                continue;
            std::size_t gain = std::count_if(cov.begin(), cov.end(),
                                             [&](Ipv4 t) { return uncovered.count(t) != 0; });
            if (gain == 0)
                continue;
            bool better = gain > best_gain ||
                          (gain == best_gain && cov.size() > best_degree) ||
                          (gain == best_gain && cov.size() == best_degree && nbr < best);
            if (best_gain == 0 || better) {
                best = nbr;
                best_gain = gain;
                best_degree = cov.size();
            }
        }
        if (best_gain == 0)
            break; // leftover two-hop entries no live neighbor can reach
        mprs.insert(best);
        for (Ipv4 covered : coverage[best])
            uncovered.erase(covered);
    }

    m_mpr_set = std::move(mprs);
    if (m_observer)
        m_observer(*this);
}

RouteTable OlsrPlugin::routes() const
{
    RouteTable table;
    if (!m_started)
        return table;
    sim::SimTime now = m_host.sched->now();

    std::map<Ipv4, std::set<Ipv4>> adj;
    std::set<Ipv4> sym = symmetric_neighbors();
    adj[m_host.self] = sym;
    for (const auto& [key, until] : m_two_hop) {
        const auto& [nbr, two] = key;
        if (until > now && sym.count(nbr) != 0 && two != m_host.self)
            adj[nbr].insert(two);
    }
    for (const auto& t : m_topology)
        if (t.until > now)
            adj[t.last_hop].insert(t.dest);

    // Level-synchronous BFS: a level's next hops are final before the next
    // level is expanded, so equal-cost ties resolve to the smallest next-hop
    // address deterministically.
    std::map<Ipv4, int> dist;
    std::map<Ipv4, Ipv4> next_hop;
    dist[m_host.self] = 0;
    std::set<Ipv4> frontier{m_host.self};
    int d = 0;
    while (!frontier.empty()) {
        std::set<Ipv4> next;
        for (Ipv4 u : frontier) {
            auto it = adj.find(u);
            if (it == adj.end())
                continue;
            for (Ipv4 v : it->second) {
                if (v == m_host.self)
                    continue;
                Ipv4 via = u == m_host.self ? v : next_hop[u];
                auto dit = dist.find(v);
                if (dit == dist.end()) {
                    dist[v] = d + 1;
                    next_hop[v] = via;
                    next.insert(v);
                } else if (dit->second == d + 1 && via < next_hop[v]) {
                    next_hop[v] = via;
                }
            }
        }
        frontier = std::move(next);
        ++d;
    }

    for (const auto& [node, hops] : dist)
        if (node != m_host.self)
            table.entries[node] = {next_hop[node], hops};
    return table;
}

LinkStatus OlsrPlugin::link_status(Ipv4 neighbor) const
{
    sim::SimTime now = m_host.sched->now();
    auto it = m_links.find(neighbor);
    if (it == m_links.end())
        return LinkStatus::None;
    if (link_sym(it->second, now))
        return LinkStatus::Sym;
    if (it->second.asym_until > now)
        return LinkStatus::Asym;
    return LinkStatus::None;
}

std::set<Ipv4> OlsrPlugin::symmetric_neighbors() const
{
    sim::SimTime now = m_host.sched->now();
    std::set<Ipv4> out;
    for (const auto& [addr, tuple] : m_links)
        if (link_sym(tuple, now))
            out.insert(addr);
    return out;
}

std::map<Ipv4, std::set<Ipv4>> OlsrPlugin::two_hop() const
{
    sim::SimTime now = m_host.sched->now();
    std::map<Ipv4, std::set<Ipv4>> out;
    for (const auto& [key, until] : m_two_hop)
        if (until > now)
            out[key.first].insert(key.second);
    return out;
}

std::set<Ipv4> OlsrPlugin::mpr_selectors() const
{
    sim::SimTime now = m_host.sched->now();
    std::set<Ipv4> out;
    for (const auto& [addr, until] : m_selectors)
        if (until > now)
            out.insert(addr);
    return out;
}

std::vector<OlsrPlugin::TopoEdge> OlsrPlugin::topology() const
{
    sim::SimTime now = m_host.sched->now();
    std::vector<TopoEdge> out;
    for (const auto& t : m_topology)
        if (t.until > now)
            out.push_back({t.dest, t.last_hop});
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace manetlab::routing

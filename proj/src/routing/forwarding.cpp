#include "manetlab/routing/engine.hpp"

#include <algorithm>

#include "manetlab/sim/errors.hpp"

namespace manetlab::routing {

namespace {

// Stable across platforms, unlike std::hash, so per-node rng streams are too.
std::uint64_t fnv1a(const std::string& text)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace

Engine::Engine(sim::Scheduler& sched, link::Medium& medium, netconfig::NetConfig& net,
               sim::SeededRng rng)
    : m_sched(sched), m_medium(medium), m_net(net), m_rng(rng)
{
}

void Engine::attach(const link::NodeId& node)
{
    NodeCtx& ctx = m_nodes[node];
    if (ctx.attached)
        return;
    ctx.attached = true;
    m_medium.set_receive_handler(node, [this, node](const link::Frame& frame, sim::SimTime at) {
        on_frame(node, frame, at);
    });
}

void Engine::start_routing(const link::NodeId& node, const PackageRegistry& registry,
                           const std::string& package, const nlohmann::json& params)
{
    const RoutingPackage* pkg = registry.find(package);
    if (!pkg)
        throw ValidationError("unknown routing package: " + package);
    auto addr = m_net.address(node);
    if (!addr)
        throw ValidationError("node " + node + " needs an address before routing starts");

    attach(node);
    NodeCtx& ctx = m_nodes[node];
    if (ctx.plugin)
        stop_routing(node);

    RouterHost host;
    host.sched = &m_sched;
    host.rng = m_rng.split(fnv1a(node));
    host.self = addr->address;
    host.send_control = [this, node](NetPacket pkt) {
        link::Frame frame;
        frame.multicast = true;
        frame.origin = node;
        frame.size_bytes = pkt.size_bytes;
        frame.payload = std::move(pkt);
        m_medium.transmit(std::move(frame), node);
    };

    nlohmann::json merged = pkg->params;
    merged.update(params);
    ctx.plugin = pkg->factory(std::move(host), merged);
    ctx.package = pkg;
    m_hook_log.push_back(node + ": " + pkg->start_hook);
    ctx.plugin->start();
}

void Engine::stop_routing(const link::NodeId& node)
{
    auto it = m_nodes.find(node);
    if (it == m_nodes.end() || !it->second.plugin)
        return;
    it->second.plugin->stop();
    m_hook_log.push_back(node + ": " + it->second.package->stop_hook);
}

RoutingPlugin* Engine::plugin(const link::NodeId& node)
{
    auto it = m_nodes.find(node);
    return it == m_nodes.end() ? nullptr : it->second.plugin.get();
}

const RoutingPlugin* Engine::plugin(const link::NodeId& node) const
{
    auto it = m_nodes.find(node);
    return it == m_nodes.end() ? nullptr : it->second.plugin.get();
}

RouteTable Engine::routes(const link::NodeId& node) const
{
    const RoutingPlugin* p = plugin(node);
    return p ? p->routes() : RouteTable{};
}

void Engine::subscribe(const link::NodeId& node, const std::string& kind, Handler handler)
{
    m_nodes[node].subscriptions[kind] = std::move(handler);
}

void Engine::send(const link::NodeId& node, NetPacket pkt)
{
    auto addr = m_net.address(node);
    if (!addr)
        throw NotAssociated("node " + node + " has no address");
    if (pkt.src == Ipv4{})
        pkt.src = addr->address;

    if (pkt.multicast) {
        link::Frame frame;
        frame.multicast = true;
        frame.origin = node;
        frame.size_bytes = pkt.size_bytes;
        frame.payload = std::move(pkt);
        m_medium.transmit(std::move(frame), node);
        return;
    }
    if (pkt.dst == addr->address) {
        deliver_local(node, pkt, addr->address, m_sched.now());
        return;
    }
    transmit_towards(node, std::move(pkt));
}

void Engine::on_frame(const link::NodeId& node, const link::Frame& frame, sim::SimTime at)
{
    const auto* pkt = std::any_cast<NetPacket>(&frame.payload);
    if (!pkt)
        return; // not network-layer traffic

    Ipv4 prev_hop;
    if (auto prev = m_net.address(frame.src))
        prev_hop = prev->address;

    // Routing control plane: hand to the protocol, never to applications.
    if (pkt->kind.rfind("olsr-", 0) == 0) {
        auto it = m_nodes.find(node);
        if (it != m_nodes.end() && it->second.plugin)
            it->second.plugin->on_control_packet(*pkt, prev_hop);
        return;
    }

    if (pkt->multicast) {
        // One link hop only: deliver here, never forward.
        deliver_local(node, *pkt, prev_hop, at);
        return;
    }

    auto own = m_net.address(node);
    if (own && pkt->dst == own->address) {
        deliver_local(node, *pkt, prev_hop, at);
        return;
    }

    // Transit traffic: decrement, report expiry back to the source, forward.
    NetPacket fwd = *pkt;
    if (--fwd.ttl <= 0) {
        drop(link::DropReason::TtlExpired);
        if (own) {
            NetPacket report;
            report.src = own->address;
            report.dst = pkt->src;
            report.kind = "time-exceeded";
            report.size_bytes = 64;
            report.payload = pkt->payload;
            transmit_towards(node, std::move(report));
        }
        return;
    }
    transmit_towards(node, std::move(fwd));
}

void Engine::deliver_local(const link::NodeId& node, const NetPacket& pkt, Ipv4 from,
                           sim::SimTime at)
{
    auto it = m_nodes.find(node);
    if (it == m_nodes.end())
        return;
    auto sub = it->second.subscriptions.find(pkt.kind);
    if (sub != it->second.subscriptions.end())
        sub->second(pkt, from, at);
}

ForwardAction Engine::transmit_towards(const link::NodeId& node, NetPacket pkt)
{
    link::NodeId rf_dst;

    // Link-local destinations need no route, like any on-link IP neighbor.
    if (auto dst_node = m_net.node_by_address(pkt.dst)) {
        std::vector<link::NodeId> nbrs = m_medium.neighbors(node);
        if (std::find(nbrs.begin(), nbrs.end(), *dst_node) != nbrs.end())
            rf_dst = *dst_node;
    }
    if (rf_dst.empty()) {
        RouteTable table = routes(node);
        auto entry = table.entries.find(pkt.dst);
        if (entry == table.entries.end()) {
            drop(link::DropReason::NoRoute);
            return ForwardAction::Drop;
        }
        auto via = m_net.node_by_address(entry->second.next_hop);
        if (!via) {
            drop(link::DropReason::NoRoute);
            return ForwardAction::Drop;
        }
        rf_dst = *via;
    }

    link::Frame frame;
    frame.dst = rf_dst;
    frame.size_bytes = pkt.size_bytes;
    if (auto origin = m_net.node_by_address(pkt.src))
        frame.origin = *origin;
    else
        frame.origin = node;
    frame.payload = std::move(pkt);
    m_medium.transmit(std::move(frame), node);
    return ForwardAction::NextHop;
}

} // namespace manetlab::routing

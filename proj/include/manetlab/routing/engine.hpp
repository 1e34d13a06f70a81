#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "manetlab/link/medium.hpp"
#include "manetlab/netconfig/netconfig.hpp"
#include "manetlab/routing/plugin.hpp"

namespace manetlab::routing {

// Outcome of one forwarding decision, exposed for inspection.
enum class ForwardAction { DeliverLocal, NextHop, Drop };

// The network layer shared by all nodes: receives frames from the link,
// delivers or forwards unicast packets via each node's routing plugin,
// confines multicast to one hop, and hosts the per-node protocol instances.
class Engine
{
  public:
    Engine(sim::Scheduler& sched, link::Medium& medium, netconfig::NetConfig& net,
           sim::SeededRng rng);

    // Installs this node's link receive handler. Idempotent.
    void attach(const link::NodeId& node);

    void start_routing(const link::NodeId& node, const PackageRegistry& registry,
                       const std::string& package,
                       const nlohmann::json& params = nlohmann::json::object());
    void stop_routing(const link::NodeId& node);
    RoutingPlugin* plugin(const link::NodeId& node);
    const RoutingPlugin* plugin(const link::NodeId& node) const;
    RouteTable routes(const link::NodeId& node) const; // empty when not routing

    // Originates a packet. Fills src from the node's address when unset.
    void send(const link::NodeId& node, NetPacket pkt);

    using Handler = std::function<void(const NetPacket&, Ipv4 from, sim::SimTime)>;
    void subscribe(const link::NodeId& node, const std::string& kind, Handler handler);

    const std::map<link::DropReason, std::uint64_t>& drops() const { return m_drops; }
    // Lifecycle hook invocations, in order ("<node>: <hook>").
    const std::vector<std::string>& hook_log() const { return m_hook_log; }

  private:
    struct NodeCtx
    {
        std::unique_ptr<RoutingPlugin> plugin;
        const RoutingPackage* package = nullptr;
        std::map<std::string, Handler> subscriptions;
        bool attached = false;
    };

    void on_frame(const link::NodeId& node, const link::Frame& frame, sim::SimTime at);
    void deliver_local(const link::NodeId& node, const NetPacket& pkt, Ipv4 from,
                       sim::SimTime at);
    // Puts the packet on the air towards dst (on-link) or the routed next hop.
    ForwardAction transmit_towards(const link::NodeId& node, NetPacket pkt);
    void drop(link::DropReason reason) { ++m_drops[reason]; }

    sim::Scheduler& m_sched;
    link::Medium& m_medium;
    netconfig::NetConfig& m_net;
    sim::SeededRng m_rng;
    std::map<link::NodeId, NodeCtx> m_nodes;
    std::map<link::DropReason, std::uint64_t> m_drops;
    std::vector<std::string> m_hook_log;
};

} // namespace manetlab::routing

#pragma once

#include <map>
#include <optional>
#include <vector>

#include "manetlab/diag/diag.hpp"
#include "manetlab/harness/metrics.hpp"
#include "manetlab/harness/scenario.hpp"
#include "manetlab/link/medium.hpp"
#include "manetlab/netconfig/netconfig.hpp"
#include "manetlab/routing/engine.hpp"
#include "manetlab/sim/scheduler.hpp"

namespace manetlab::harness {

// A scenario brought to life: nodes placed and joined, addresses assigned,
// routing protocols started, diagnostics responders installed. The scenario
// runner layers traffic and accounting on top; the CLI diagnostics drive it
// directly.
class Workbench
{
  public:
    explicit Workbench(const Scenario& scenario);

    const Scenario& scenario() const { return m_sc; }
    std::optional<routing::Ipv4> address_of(const link::NodeId& id) const;

    // Nodes that run the scenario's routing package (setup failures excluded).
    const std::vector<link::NodeId>& routing_nodes() const { return m_routing_nodes; }
    const std::vector<SetupFailure>& setup_failures() const { return m_setup_failures; }
    const std::map<link::NodeId, routing::Ipv4>& addresses() const { return m_addresses; }

    // True once dst is reachable from src: on the same link, or routed.
    bool reachable(const link::NodeId& src, const link::NodeId& dst) const;

    sim::Scheduler sched;
    link::Medium medium;
    netconfig::NetConfig net;
    routing::Engine engine;
    diag::Diag dx;

  private:
    void bring_up(const NodeSpec& n);

    const Scenario& m_sc;
    routing::PackageRegistry m_registry = routing::PackageRegistry::with_builtins();
    std::vector<link::NodeId> m_routing_nodes;
    std::vector<SetupFailure> m_setup_failures;
    std::map<link::NodeId, routing::Ipv4> m_addresses;
};

} // namespace manetlab::harness

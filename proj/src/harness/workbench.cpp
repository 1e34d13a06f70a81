#include "manetlab/harness/workbench.hpp"

#include <algorithm>

namespace manetlab::harness {

namespace {

const char* setup_error_name(netconfig::SetupError e)
{
    switch (e) {
    case netconfig::SetupError::None: return "none";
    case netconfig::SetupError::DriverError: return "driver-error";
    case netconfig::SetupError::AddressConflict: return "address-conflict";
    case netconfig::SetupError::AssociationFailed: return "association-failed";
    }
    return "?";
}

} // namespace

Workbench::Workbench(const Scenario& scenario)
    : sched(),
      medium(sched, scenario.medium, link::PowerSaveModel{},
             sim::SeededRng(scenario.seed ^ 0x6d656469756dULL)),
      net(sched, medium),
      engine(sched, medium, net, sim::SeededRng(scenario.seed)),
      dx(sched, engine, net),
      m_sc(scenario)
{
    m_sc.validate();

    for (const NodeSpec& n : m_sc.nodes) {
        medium.add_node(n.id, n.pos);
        if (!n.waypoints.empty())
            medium.set_waypoints(n.id, n.waypoints);
        if (n.fault != link::Fault::None)
            medium.set_fault(n.id, n.fault);
    }

    if (m_sc.mode == ScenarioMode::Infrastructure) {
        // The cell exists once its AP is up, so bring that node up first.
        const NodeSpec* ap = m_sc.find_node(m_sc.ap);
        bring_up(*ap);
        for (const NodeSpec& n : m_sc.nodes)
            if (n.id != m_sc.ap)
                bring_up(n);
    } else {
        for (const NodeSpec& n : m_sc.nodes)
            bring_up(n);
    }

    for (const NodeSpec& n : m_sc.nodes) {
        engine.attach(n.id);
        dx.install_node(n.id);
        if (auto cfg = net.address(n.id))
            m_addresses[n.id] = cfg->address;
    }

    if (m_sc.routing_package)
        for (const NodeSpec& n : m_sc.nodes) {
            if (!net.address(n.id))
                continue; // setup failed; the node stays out of the mesh
            engine.start_routing(n.id, m_registry, *m_sc.routing_package, m_sc.routing_params);
            m_routing_nodes.push_back(n.id);
        }
}

void Workbench::bring_up(const NodeSpec& n)
{
    netconfig::SetupReport report;
    if (m_sc.mode == ScenarioMode::Infrastructure) {
        auto mode = n.id == m_sc.ap ? link::LinkMode::InfrastructureAp
                                    : link::LinkMode::InfrastructureStation;
        report = net.setup_infrastructure(n.id, m_sc.ssid, mode);
    } else {
        report = net.one_step_setup(n.id, {m_sc.ssid, netconfig::ProfileMode::Ibss, 0});
    }
    if (!report.success)
        m_setup_failures.push_back({n.id, setup_error_name(report.error)});
}

std::optional<routing::Ipv4> Workbench::address_of(const link::NodeId& id) const
{
    auto cfg = net.address(id);
    if (!cfg)
        return std::nullopt;
    return cfg->address;
}

bool Workbench::reachable(const link::NodeId& src, const link::NodeId& dst) const
{
    auto target = address_of(dst);
    if (!target || !address_of(src))
        return false;
    auto neighbors = medium.neighbors(src);
    if (std::find(neighbors.begin(), neighbors.end(), dst) != neighbors.end())
        return true;
    return engine.routes(src).entries.count(*target) != 0;
}

} // namespace manetlab::harness

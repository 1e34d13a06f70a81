#pragma once

#include "manetlab/routing/plugin.hpp"

namespace manetlab::routing {

// Baseline protocol: a fixed table handed in at construction, returned
// verbatim while started. No control traffic, no timers.
class StaticPlugin : public RoutingPlugin
{
  public:
    StaticPlugin(RouterHost host, RouteTable table);

    // Builds the table from params: {"routes": {"<dst>": {"next_hop": "<ip>",
    // "hops": n}, ...}}. Throws ValidationError on unparsable addresses.
    static RouteTable table_from_json(const nlohmann::json& params);

    void start() override { m_started = true; }
    void stop() override { m_started = false; }
    void on_control_packet(const NetPacket&, Ipv4) override {}
    void tick(sim::SimTime) override {}
    RouteTable routes() const override { return m_started ? m_table : RouteTable{}; }
    std::string name() const override { return "static"; }

  private:
    RouterHost m_host;
    RouteTable m_table;
    bool m_started = false;
};

} // namespace manetlab::routing

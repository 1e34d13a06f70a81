#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "manetlab/routing/types.hpp"
#include "manetlab/sim/rng.hpp"
#include "manetlab/sim/scheduler.hpp"

namespace manetlab::routing {

// Services a protocol instance receives from the node hosting it.
struct RouterHost
{
    sim::Scheduler* sched = nullptr;
    sim::SeededRng rng{0};
    Ipv4 self;
    // One-hop broadcast of a control packet; never forwarded by the engine.
    std::function<void(NetPacket)> send_control;
};

// Contract for a routing protocol instance running on one node.
class RoutingPlugin
{
  public:
    virtual ~RoutingPlugin() = default;
    virtual void start() = 0;
    virtual void stop() = 0; // releases all timers; routes() is empty afterwards
    virtual void on_control_packet(const NetPacket& pkt, Ipv4 from) = 0;
    virtual void tick(sim::SimTime now) = 0; // purge expired state
    virtual RouteTable routes() const = 0;
    virtual std::string name() const = 0;
};

// An importable routing protocol: metadata, lifecycle hook descriptors (the
// stand-in for the original start/stop shell scripts), and a factory.
struct RoutingPackage
{
    std::string name;
    std::string version;
    std::string start_hook;
    std::string stop_hook;
    nlohmann::json params; // defaults merged under per-scenario overrides
    std::function<std::unique_ptr<RoutingPlugin>(RouterHost, const nlohmann::json&)> factory;
};

class PackageRegistry
{
  public:
    const RoutingPackage& register_package(RoutingPackage pkg); // throws DuplicatePackage
    const RoutingPackage* find(const std::string& name) const;
    std::vector<std::string> names() const;

    // Registry preloaded with the bundled protocols: "olsr" and "static".
    static PackageRegistry with_builtins();

    // Parses a package manifest (JSON: name, version, protocol, params) that
    // wraps one of the bundled protocols with parameter overrides, and
    // registers the result.
    const RoutingPackage& load_manifest(const std::string& json_text);

  private:
    std::deque<RoutingPackage> m_packages; // deque: stable references on growth
};

} // namespace manetlab::routing

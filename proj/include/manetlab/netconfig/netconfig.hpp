#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "manetlab/link/medium.hpp"
#include "manetlab/netconfig/ipv4.hpp"
#include "manetlab/netconfig/store.hpp"

namespace manetlab::netconfig {

enum class IfaceState { Down, UpUnassociated, Associated };

enum class SetupError { None, DriverError, AddressConflict, AssociationFailed };

struct SetupStep
{
    std::string name;
    bool ok = false;
    sim::SimTime at = 0;
};

struct SetupReport
{
    std::vector<SetupStep> steps;
    SetupError error = SetupError::None;
    bool success = false;
};

// Per-node network stack configurator: owns each node's known-networks store,
// interface state and address, and drives the link layer accordingly.
class NetConfig
{
  public:
    NetConfig(sim::Scheduler& sched, link::Medium& medium);

    // The one-button MANET join. Executes, in order: interface down, store
    // rewrite (IBSS profile added, visibility filter on), interface up with
    // association, address assignment. A failed step aborts the sequence but
    // leaves the earlier steps' effects in place, as the real procedure does.
    SetupReport one_step_setup(const link::NodeId& node, const NetworkProfile& profile,
                               std::optional<IpConfig> ip = std::nullopt);

    // Plain managed-mode bring-up used by the infrastructure scenarios.
    // Refused (ValidationError) while the node's store filters to IBSS only.
    SetupReport setup_infrastructure(const link::NodeId& node, const std::string& ssid,
                                     link::LinkMode mode,
                                     std::optional<IpConfig> ip = std::nullopt);

    // Removes IBSS profiles, clears the visibility filter, interface down.
    void teardown(const link::NodeId& node);

    // What the OS network picker would show for this node.
    std::vector<NetworkProfile> visible_networks(const link::NodeId& node) const;

    const NetworkStore& store(const link::NodeId& node) const;
    void set_store(const link::NodeId& node, NetworkStore store);
    IfaceState iface(const link::NodeId& node) const;
    std::optional<IpConfig> address(const link::NodeId& node) const;

    // Owner of an address among currently associated nodes.
    std::optional<link::NodeId> node_by_address(Ipv4 ip) const;

  private:
    struct Entry
    {
        NetworkStore store;
        IfaceState iface = IfaceState::Down;
        std::optional<IpConfig> ip;
    };

    Entry& entry(const link::NodeId& node);
    const Entry& entry(const link::NodeId& node) const;

    sim::Scheduler& m_sched;
    link::Medium& m_medium;
    std::map<link::NodeId, Entry> m_entries;
};

} // namespace manetlab::netconfig

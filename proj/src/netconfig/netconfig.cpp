#include "manetlab/netconfig/netconfig.hpp"

#include <algorithm>
#include <cstdio>

#include "manetlab/sim/errors.hpp"

namespace manetlab::netconfig {

std::string to_string(Ipv4 ip)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", ip.value >> 24, (ip.value >> 16) & 0xFF,
                  (ip.value >> 8) & 0xFF, ip.value & 0xFF);
    return buf;
}

std::optional<Ipv4> parse_ipv4(const std::string& text)
{
    unsigned a = 0, b = 0, c = 0, d = 0;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%u.%u.%u.%u%c", &a, &b, &c, &d, &extra) != 4)
        return std::nullopt;
    if (a > 255 || b > 255 || c > 255 || d > 255)
        return std::nullopt;
    return Ipv4::from_octets(a, b, c, d);
}

IpConfig default_ip(const link::NodeId& node)
{
    unsigned h = 0;
    for (unsigned char c : node)
        h = (h * 31 + c) % 65536;
    IpConfig cfg;
    cfg.address = Ipv4::from_octets(169, 254, 1 + (h / 256 % 254), 1 + (h % 254));
    cfg.prefix_len = 16;
    return cfg;
}

NetConfig::NetConfig(sim::Scheduler& sched, link::Medium& medium)
    : m_sched(sched), m_medium(medium)
{
}

NetConfig::Entry& NetConfig::entry(const link::NodeId& node)
{
    if (!m_medium.has_node(node))
        throw UnknownNode("unknown node: " + node);
    return m_entries[node];
}

const NetConfig::Entry& NetConfig::entry(const link::NodeId& node) const
{
    if (!m_medium.has_node(node))
        throw UnknownNode("unknown node: " + node);
    static const Entry untouched;
    auto it = m_entries.find(node);
    return it == m_entries.end() ? untouched : it->second;
}

SetupReport NetConfig::one_step_setup(const link::NodeId& node, const NetworkProfile& profile,
                                      std::optional<IpConfig> ip)
{
    if (profile.ssid.empty())
        throw ValidationError("network profile needs a non-empty ssid");
    if (profile.mode != ProfileMode::Ibss)
        throw ValidationError("one-step setup creates IBSS networks only");

    Entry& e = entry(node);
    SetupReport report;
    auto step = [&](const char* name, bool ok) {
        report.steps.push_back({name, ok, m_sched.now()});
    };

    m_medium.dissociate(node);
    e.iface = IfaceState::Down;
    step("interface down", true);

    e.store.add(profile);
    e.store.ibss_only_visible = true;
    step("store updated", true);

    if (!m_medium.associate(node, link::LinkMode::Ibss, profile.ssid)) {
        e.iface = IfaceState::UpUnassociated;
        step("interface up, associate", false);
        report.error = SetupError::DriverError;
        return report;
    }
    e.iface = IfaceState::Associated;
    step("interface up, associate", true);

    IpConfig cfg = ip ? *ip : default_ip(node);
    if (auto holder = node_by_address(cfg.address); holder && *holder != node) {
        step("apply address", false);
        report.error = SetupError::AddressConflict;
        return report;
    }
    e.ip = cfg;
    step("apply address", true);
    report.success = true;
    return report;
}

SetupReport NetConfig::setup_infrastructure(const link::NodeId& node, const std::string& ssid,
                                            link::LinkMode mode, std::optional<IpConfig> ip)
{
    if (ssid.empty())
        throw ValidationError("network profile needs a non-empty ssid");
    if (mode == link::LinkMode::Ibss)
        throw ValidationError("use one_step_setup for IBSS networks");

    Entry& e = entry(node);
    if (e.store.ibss_only_visible)
        throw ValidationError("store shows IBSS networks only; tear down first");

    SetupReport report;
    auto step = [&](const char* name, bool ok) {
        report.steps.push_back({name, ok, m_sched.now()});
    };

    m_medium.dissociate(node);
    e.iface = IfaceState::Down;
    step("interface down", true);

    e.store.add({ssid, ProfileMode::Infrastructure, 0});
    step("store updated", true);

    if (!m_medium.associate(node, mode, ssid)) {
        e.iface = IfaceState::UpUnassociated;
        step("interface up, associate", false);
        report.error = SetupError::AssociationFailed;
        return report;
    }
    e.iface = IfaceState::Associated;
    step("interface up, associate", true);

    IpConfig cfg = ip ? *ip : default_ip(node);
    if (auto holder = node_by_address(cfg.address); holder && *holder != node) {
        step("apply address", false);
        report.error = SetupError::AddressConflict;
        return report;
    }
    e.ip = cfg;
    step("apply address", true);
    report.success = true;
    return report;
}

void NetConfig::teardown(const link::NodeId& node)
{
    Entry& e = entry(node);
    std::erase_if(e.store.profiles,
                  [](const NetworkProfile& p) { return p.mode == ProfileMode::Ibss; });
    e.store.ibss_only_visible = false;
    m_medium.dissociate(node);
    e.iface = IfaceState::Down;
}

std::vector<NetworkProfile> NetConfig::visible_networks(const link::NodeId& node) const
{
    const Entry& e = entry(node);
    std::vector<NetworkProfile> out;
    for (const auto& p : e.store.profiles)
        if (!e.store.ibss_only_visible || p.mode == ProfileMode::Ibss)
            out.push_back(p);
    std::stable_sort(out.begin(), out.end(),
                     [](const NetworkProfile& a, const NetworkProfile& b) {
                         return a.priority > b.priority;
                     });
    return out;
}

const NetworkStore& NetConfig::store(const link::NodeId& node) const
{
    return entry(node).store;
}

void NetConfig::set_store(const link::NodeId& node, NetworkStore store)
{
    entry(node).store = std::move(store);
}

IfaceState NetConfig::iface(const link::NodeId& node) const
{
    return entry(node).iface;
}

std::optional<IpConfig> NetConfig::address(const link::NodeId& node) const
{
    return entry(node).ip;
}

std::optional<link::NodeId> NetConfig::node_by_address(Ipv4 ip) const
{
    for (const auto& [id, e] : m_entries)
        if (e.ip && e.ip->address == ip && m_medium.associated(id))
            return id;
    return std::nullopt;
}

} // namespace manetlab::netconfig

#pragma once

#include <string>
#include <vector>

namespace manetlab::netconfig {

enum class ProfileMode { Ibss, Infrastructure };

struct NetworkProfile
{
    std::string ssid;
    ProfileMode mode = ProfileMode::Ibss;
    int priority = 0;

    friend bool operator==(const NetworkProfile&, const NetworkProfile&) = default;
};

// A node's known-networks file. The layout echoes wpa_supplicant.conf: one
// visibility flag followed by `network { key=value ... }` blocks.
struct NetworkStore
{
    std::vector<NetworkProfile> profiles;
    bool ibss_only_visible = false;

    // Insert, or replace the existing profile with the same ssid and mode;
    // a store never holds two IBSS profiles for one ssid.
    void add(const NetworkProfile& profile);
    void remove_ibss(const std::string& ssid);
    bool has_ibss(const std::string& ssid) const;

    std::string serialize() const;
    static NetworkStore parse(const std::string& text); // throws ParseError

    friend bool operator==(const NetworkStore&, const NetworkStore&) = default;
};

} // namespace manetlab::netconfig

#include "manetlab/netconfig/store.hpp"

#include <algorithm>
#include <sstream>

#include "manetlab/sim/errors.hpp"

namespace manetlab::netconfig {

namespace {

std::string trim(const std::string& s)
{
    auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos)
        return {};
    auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

const char* mode_name(ProfileMode m)
{
    return m == ProfileMode::Ibss ? "ibss" : "infrastructure";
}

} // namespace

void NetworkStore::add(const NetworkProfile& profile)
{
    for (auto& p : profiles) {
        if (p.ssid == profile.ssid && p.mode == profile.mode) {
            p = profile;
            return;
        }
    }
    profiles.push_back(profile);
}

void NetworkStore::remove_ibss(const std::string& ssid)
{
    std::erase_if(profiles, [&](const NetworkProfile& p) {
        return p.mode == ProfileMode::Ibss && p.ssid == ssid;
    });
}

bool NetworkStore::has_ibss(const std::string& ssid) const
{
    return std::any_of(profiles.begin(), profiles.end(), [&](const NetworkProfile& p) {
        return p.mode == ProfileMode::Ibss && p.ssid == ssid;
    });
}

std::string NetworkStore::serialize() const
{
    std::ostringstream out;
    out << "ibss_only_visible=" << (ibss_only_visible ? 1 : 0) << "\n";
    for (const auto& p : profiles) {
        out << "network {\n"
            << "  ssid=" << p.ssid << "\n"
            << "  mode=" << mode_name(p.mode) << "\n"
            << "  priority=" << p.priority << "\n"
            << "}\n";
    }
    return out.str();
}

NetworkStore NetworkStore::parse(const std::string& text)
{
    NetworkStore store;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    NetworkProfile current;
    bool in_block = false;

    auto fail = [&](const std::string& what) -> void {
        throw ParseError("network store, line " + std::to_string(lineno) + ": " + what);
    };
    auto split = [&](const std::string& t) {
        auto eq = t.find('=');
        if (eq == std::string::npos)
            fail("expected key=value, got '" + t + "'");
        return std::pair{t.substr(0, eq), t.substr(eq + 1)};
    };

    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        if (!in_block) {
            if (t == "network {") {
                in_block = true;
                current = {};
                continue;
            }
            auto [key, value] = split(t);
            if (key == "ibss_only_visible") {
                if (value != "0" && value != "1")
                    fail("ibss_only_visible must be 0 or 1");
                store.ibss_only_visible = value == "1";
            } else {
                fail("unknown key '" + key + "'");
            }
        } else {
            if (t == "}") {
                if (current.ssid.empty())
                    fail("network block without ssid");
                if (current.mode == ProfileMode::Ibss && store.has_ibss(current.ssid))
                    fail("duplicate IBSS profile for ssid '" + current.ssid + "'");
                store.profiles.push_back(current);
                in_block = false;
                continue;
            }
            auto [key, value] = split(t);
            if (key == "ssid") {
                current.ssid = value;
            } else if (key == "mode") {
                if (value == "ibss")
                    current.mode = ProfileMode::Ibss;
                else if (value == "infrastructure")
                    current.mode = ProfileMode::Infrastructure;
                else
                    fail("unknown mode '" + value + "'");
            } else if (key == "priority") {
                try {
                    current.priority = std::stoi(value);
                } catch (const std::exception&) {
                    fail("priority must be an integer");
                }
            } else {
                fail("unknown key '" + key + "'");
            }
        }
    }
    if (in_block)
        fail("unterminated network block");
    return store;
}

} // namespace manetlab::netconfig

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

#include "manetlab/link/types.hpp"

namespace manetlab::netconfig {

struct Ipv4
{
    std::uint32_t value = 0; // host byte order

    static constexpr Ipv4 from_octets(unsigned a, unsigned b, unsigned c, unsigned d)
    {
        return Ipv4{(a << 24) | (b << 16) | (c << 8) | d};
    }

    auto operator<=>(const Ipv4&) const = default;
};

std::string to_string(Ipv4 ip);
std::optional<Ipv4> parse_ipv4(const std::string& text);

struct IpConfig
{
    Ipv4 address;
    int prefix_len = 16;
    std::optional<Ipv4> gateway;

    friend bool operator==(const IpConfig&, const IpConfig&) = default;
};

// Deterministic link-local address in 169.254.0.0/16 derived from the node
// id, so a node gets the same address on every run: with h the base-31
// polynomial hash of the id modulo 65536, the address is
// 169.254.(1 + h/256 % 254).(1 + h % 254).
IpConfig default_ip(const link::NodeId& node);

} // namespace manetlab::netconfig

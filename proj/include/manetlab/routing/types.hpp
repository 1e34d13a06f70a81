#pragma once

#include <any>
#include <cstdint>
#include <map>
#include <string>

#include "manetlab/netconfig/ipv4.hpp"

namespace manetlab::routing {

using netconfig::Ipv4;

// Network-layer datagram. `kind` tags the transport payload so receivers can
// demultiplex without a full protocol-number scheme.
struct NetPacket
{
    Ipv4 src;
    Ipv4 dst;
    int ttl = 64;
    bool multicast = false;
    std::uint32_t size_bytes = 0;
    std::string kind;
    std::any payload;
};

struct RouteEntry
{
    Ipv4 next_hop;
    int hop_count = 0;

    friend bool operator==(const RouteEntry&, const RouteEntry&) = default;
};

struct RouteTable
{
    std::map<Ipv4, RouteEntry> entries;

    friend bool operator==(const RouteTable&, const RouteTable&) = default;
};

} // namespace manetlab::routing

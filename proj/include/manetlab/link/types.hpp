#pragma once

#include <any>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "manetlab/sim/rng.hpp"
#include "manetlab/sim/time.hpp"

namespace manetlab::link {

using NodeId = std::string;
using FrameId = std::uint64_t;

struct Position
{
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Position& a, const Position& b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

struct Waypoint
{
    sim::SimTime at = 0;
    Position pos;
};

enum class LinkMode { Ibss, InfrastructureStation, InfrastructureAp };

// Misbehaviors observed on real handsets: chipsets whose drivers refuse
// ad-hoc operation outright, and chipsets that fake an IBSS by quietly
// acting as an access point for everyone else.
enum class Fault { None, DriverNoIbss, FakeApIbss };

struct MediumModel
{
    double nominal_capacity_bps = 24e6;
    double contention_overhead = 0.10; // capacity share lost per extra active transmitter
    double per_hop_processing_s = 0.0005;
    double radio_range_m = 50.0;
};

struct PowerSaveModel
{
    bool enabled = true;
    double beacon_interval_s = 0.1024;
    std::uint32_t dtim_period = 2;
};

// Delay an access point adds before delivering a buffered frame to a dozing
// station: uniform over one full DTIM cycle.
inline double power_save_delay(sim::SeededRng& rng, const PowerSaveModel& ps)
{
    return rng.uniform(0.0, ps.dtim_period * ps.beacon_interval_s);
}

struct Frame
{
    NodeId src;                   // logical link-layer sender
    NodeId dst;                   // link destination; empty means broadcast
    NodeId origin;                // node whose stack created the content;
                                  // defaults to src, relays preserve it
    bool multicast = false;       // broadcast frames must set this
    std::uint32_t size_bytes = 0; // full frame size, drives airtime
    std::any payload;             // opaque upper-layer content
};

enum class DropReason
{
    OutOfRange,
    Unassociated,
    HubLost,
    NoRoute,
    TtlExpired,
};

inline const char* drop_reason_name(DropReason r)
{
    switch (r) {
    case DropReason::OutOfRange: return "out_of_range";
    case DropReason::Unassociated: return "unassociated";
    case DropReason::HubLost: return "hub_lost";
    case DropReason::NoRoute: return "no_route";
    case DropReason::TtlExpired: return "ttl_expired";
    }
    return "unknown";
}

struct BusyAirtime
{
    double tx_s = 0.0;
    double rx_s = 0.0;
};

} // namespace manetlab::link

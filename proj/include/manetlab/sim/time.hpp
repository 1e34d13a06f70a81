#pragma once

#include <cstdint>

namespace manetlab::sim {

// Virtual clock value in microseconds since scenario start. Wall time never
// enters the simulation; everything downstream derives timing from this.
using SimTime = std::uint64_t;

constexpr SimTime kMicrosPerSecond = 1'000'000;

constexpr SimTime from_seconds(double s)
{
    return static_cast<SimTime>(s * 1e6 + 0.5);
}

constexpr double to_seconds(SimTime t)
{
    return static_cast<double>(t) / 1e6;
}

constexpr SimTime from_millis(double ms)
{
    return static_cast<SimTime>(ms * 1e3 + 0.5);
}

constexpr double to_millis(SimTime t)
{
    return static_cast<double>(t) / 1e3;
}

} // namespace manetlab::sim

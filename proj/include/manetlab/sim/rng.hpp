#pragma once

#include <cstdint>

namespace manetlab::sim {

// Deterministic pseudo-random source. Splitmix-style: the state walks a fixed
// odd increment and the output is a finalizer mix of the state, so the stream
// for a given seed is identical across platforms and compilers. That property
// is load-bearing: repeated runs with equal seeds must agree byte for byte.
class SeededRng
{
  public:
    explicit SeededRng(std::uint64_t seed) : m_state(seed) {}

    std::uint64_t next_u64()
    {
        m_state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = m_state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1). 53-bit mantissa, exact on every IEEE-754 double.
    double next_double()
    {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi)
    {
        return lo + (hi - lo) * next_double();
    }

    // Uniform integer in [lo, hi] inclusive.
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi)
    {
        return lo + next_u64() % (hi - lo + 1);
    }

    // Derived independent stream; used to give each protocol instance its own
    // jitter source without coupling draw order across nodes.
    SeededRng split(std::uint64_t salt) const
    {
        SeededRng mixer(m_state ^ (salt * 0x9E3779B97F4A7C15ull + 0x632BE59BD9B4E019ull));
        return SeededRng(mixer.next_u64());
    }

  private:
    std::uint64_t m_state;
};

} // namespace manetlab::sim

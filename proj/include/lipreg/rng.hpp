#pragma once

#include <cstdint>
#include <random>

namespace lipreg {

// splitmix64, used to derive independent per-item seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic uniform draws. std::uniform_real_distribution is
// implementation-defined, so the bit mapping is done by hand: mt19937_64 is
// fully specified by the standard and the [0,1) mapping below is exact IEEE
// arithmetic, giving bit-identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform on [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // uniform on (-pi, pi]
    double uniform_angle() {
        constexpr double pi = 3.14159265358979323846;
        return pi - 2.0 * pi * uniform01();
    }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // multiply-shift; bias is negligible for desk-scale n
        return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n)) % n;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace lipreg

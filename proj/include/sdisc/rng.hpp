#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sdisc {

/// Splittable seed scheme: task seed = splitmix64(master + golden * (counter + 1)).
/// The scheme name is recorded in every report.
inline constexpr const char* seed_scheme = "splitmix64(master + 0x9e3779b97f4a7c15*(task+1))";

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t task_seed(std::uint64_t master, std::uint64_t task) {
    return splitmix64(master + 0x9e3779b97f4a7c15ULL * (task + 1));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, std::uint64_t task) { return Rng(task_seed(master, task)); }

// std distributions are implementation-defined; these are not, which keeps
// reports bit-identical across standard libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

inline double normal(Rng& rng) {
    // Box-Muller, one draw per call.
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace sdisc

#pragma once

#include <cstdint>
#include <random>

namespace riscf {

// splitmix64 finalizer; full-period bijection on u64, good avalanche
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Derives a child seed from a base seed and a list of stream ids.
// Used everywhere a component needs its own RNG stream: the mapping from
// (seed, ids...) to the child stream is fixed, so results never depend on
// how work is batched across threads.
template <typename... Ids>
std::uint64_t derive_seed(std::uint64_t base, Ids... ids) {
    std::uint64_t s = mix64(base);
    ((s = mix64(s ^ mix64(static_cast<std::uint64_t>(ids)))), ...);
    return s;
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
    return std::mt19937_64(seed);
}

// Stream id tags local to each subsystem; keep values distinct.
namespace stream {
inline constexpr std::uint64_t positions = 1;
inline constexpr std::uint64_t shadowing = 2;
inline constexpr std::uint64_t blockage = 3;
inline constexpr std::uint64_t pilots = 4;
inline constexpr std::uint64_t mc_batch = 5;
inline constexpr std::uint64_t init_population = 6;
inline constexpr std::uint64_t trial = 7;
inline constexpr std::uint64_t topology = 8;
inline constexpr std::uint64_t optimizer_run = 9;
inline constexpr std::uint64_t validation = 10;
}  // namespace stream

}  // namespace riscf

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace nsis {

using rng_t = std::mt19937_64;

// splitmix64 finalizer. Used to derive independent seed sub-streams.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Seed of sub-stream `stream_id` under master seed `seed`:
//   mix64(mix64(seed) ^ (stream_id * 0x9E3779B97F4A7C15 + 0xD1B54A32D192ED03)).
// Replica r of any experiment draws from make_stream(seed, r).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream_id) noexcept;

rng_t make_stream(std::uint64_t seed, std::uint64_t stream_id);

// Uniform double in [0, 1) with 53 random bits; one engine call.
inline double uniform01(rng_t& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n); one engine call (multiply-shift, bias < n / 2^64).
inline std::size_t uniform_index(rng_t& rng, std::size_t n)
{
    __extension__ using u128 = unsigned __int128;
    return static_cast<std::size_t>((static_cast<u128>(rng()) * static_cast<u128>(n)) >> 64);
}

} // namespace nsis

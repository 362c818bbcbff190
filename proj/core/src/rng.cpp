#include "nsis/rng.hpp"

namespace nsis {

std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream_id) noexcept
{
    return mix64(mix64(seed) ^ (stream_id * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL));
}

rng_t make_stream(std::uint64_t seed, std::uint64_t stream_id)
{
    return rng_t(stream_seed(seed, stream_id));
}

} // namespace nsis

#include "nsis/errors.hpp"
#include "nsis/format.hpp"
#include "nsis/parallel.hpp"
#include "nsis/rng.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <set>
#include <vector>

using namespace nsis;

TEST_SUITE("support") {

TEST_CASE("format_double round-trips bit-exactly")
{
    rng_t rng = make_stream(11, 0);
    for (int i = 0; i < 20000; ++i) {
        const double v = std::ldexp(uniform01(rng) - 0.5, static_cast<int>(uniform_index(rng, 200)) - 100);
        const double back = parse_double(format_double(v));
        CHECK(std::memcmp(&v, &back, sizeof v) == 0);
    }
    CHECK(format_double(0.25) == "0.25");
    CHECK(format_double(3.0) == "3");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(std::isnan(parse_double(format_double(std::nan("")))));
}

TEST_CASE("parse_double rejects malformed text")
{
    CHECK_THROWS_AS(parse_double(""), input_error);
    CHECK_THROWS_AS(parse_double("1.5x"), input_error);
    CHECK_THROWS_AS(parse_double("abc"), input_error);
}

TEST_CASE("stream seeds are distinct and reproducible")
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 64; ++s)
        for (std::uint64_t id = 0; id < 64; ++id)
            seen.insert(stream_seed(s, id));
    CHECK(seen.size() == 64 * 64);
    rng_t a = make_stream(5, 9), b = make_stream(5, 9);
    for (int i = 0; i < 100; ++i)
        CHECK(a() == b());
}

TEST_CASE("uniform01 and uniform_index stay in range and are unbiased")
{
    rng_t rng = make_stream(3, 0);
    std::vector<int> counts(7, 0);
    const int draws = 700000;
    double sum = 0.0;
    for (int i = 0; i < draws; ++i) {
        const double u = uniform01(rng);
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        ++counts[uniform_index(rng, 7)];
    }
    CHECK(std::abs(sum / draws - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / draws));
    for (int c : counts)
        CHECK(std::abs(c / double(draws) - 1.0 / 7.0) < 3.0 * std::sqrt((1.0 / 7.0) * (6.0 / 7.0) / draws));
}

TEST_CASE("parallel_for visits each index once and propagates exceptions")
{
    for (std::size_t workers : {1u, 2u, 5u}) {
        std::vector<std::atomic<int>> hits(1000);
        parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; }, workers);
        for (auto& h : hits)
            CHECK(h.load() == 1);
    }
    CHECK_THROWS_AS(parallel_for(
                        10, [](std::size_t i) { if (i == 3) throw input_error("boom"); }, 3),
                    input_error);
}

TEST_CASE("worker_count honours NSIS_WORKERS")
{
    setenv("NSIS_WORKERS", "3", 1);
    CHECK(worker_count() == 3);
    unsetenv("NSIS_WORKERS");
    CHECK(worker_count() >= 1);
}

}

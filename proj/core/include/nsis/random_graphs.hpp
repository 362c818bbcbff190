#pragma once

#include "nsis/graph.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace nsis {

struct BinomialOffspring {
    std::uint32_t m;
    double p;
};

struct PoissonOffspring {
    double theta;
};

/// Offspring law of a Galton-Watson process.
struct OffspringLaw {
    std::variant<BinomialOffspring, PoissonOffspring> law;

    // Strict constructors: 0 < p < 1, theta > 0.
    static OffspringLaw binomial(std::uint32_t m, double p);
    static OffspringLaw poisson(double theta);

    double mean() const;
    std::string describe() const;
};

struct GwMeta {
    // Offspring drawn per generation, Z_0 = 1 first. The last entry may cover
    // a partially expanded generation.
    std::vector<std::uint64_t> generation_sizes;
    std::uint64_t restarts = 0;
    // Generation stopped at the size cap (children discarded or frontier left
    // unexpanded) rather than by extinction.
    bool truncated = false;
    // Largest child count of any vertex in the returned tree.
    std::uint64_t max_children = 0;
};

// G(n, p): every unordered pair independently with probability p. Uses
// per-pair Bernoulli draws when p >= ln(n)/n and geometric skipping below.
MultiGraph gen_erdos_renyi(std::size_t n, double p, std::uint64_t seed);

// Both samplers are exposed so their laws can be compared directly.
MultiGraph gen_erdos_renyi_bernoulli(std::size_t n, double p, std::uint64_t seed);
MultiGraph gen_erdos_renyi_skip(std::size_t n, double p, std::uint64_t seed);

// Configuration model: n*d stubs, uniformly shuffled and paired consecutively.
// Self-loops and parallel edges are kept.
MultiGraph gen_regular_multigraph(std::size_t n, std::size_t d, std::uint64_t seed);

std::size_t count_self_loops(const MultiGraph& g);

inline constexpr std::uint64_t kGwRestartCap = 1'000'000;

// Breadth-first Galton-Watson tree truncated to exactly n_target vertices.
// Extinct attempts are discarded and retried on sub-stream (seed, attempt).
// The law may be degenerate (p = 1) here; OffspringLaw::binomial rejects it.
std::pair<MultiGraph, GwMeta> gen_galton_watson(const OffspringLaw& law, std::size_t n_target,
                                                std::uint64_t seed);

struct DegreeConditionReport {
    bool holds = false;
    double lhs = 0.0; // lambda * max_degree
    double rhs = 0.0; // n^-alpha
};

// lambda * Delta_max < n^-alpha.
DegreeConditionReport check_degree_condition(const MultiGraph& g, double lambda, double alpha);

} // namespace nsis

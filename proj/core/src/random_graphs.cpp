#include "nsis/random_graphs.hpp"

#include "nsis/errors.hpp"
#include "nsis/rng.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <sstream>

namespace nsis {

OffspringLaw OffspringLaw::binomial(std::uint32_t m, double p)
{
    if (m == 0)
        throw input_error("binomial offspring needs m >= 1");
    if (!(p > 0.0 && p < 1.0))
        throw input_error("binomial offspring needs 0 < p < 1");
    return {BinomialOffspring{m, p}};
}

OffspringLaw OffspringLaw::poisson(double theta)
{
    if (!(theta > 0.0) || !std::isfinite(theta))
        throw input_error("poisson offspring needs theta > 0");
    return {PoissonOffspring{theta}};
}

double OffspringLaw::mean() const
{
    if (const auto* b = std::get_if<BinomialOffspring>(&law))
        return b->m * b->p;
    return std::get<PoissonOffspring>(law).theta;
}

std::string OffspringLaw::describe() const
{
    std::ostringstream os;
    if (const auto* b = std::get_if<BinomialOffspring>(&law))
        os << "binomial(m=" << b->m << ",p=" << b->p << ")";
    else
        os << "poisson(theta=" << std::get<PoissonOffspring>(law).theta << ")";
    return os.str();
}

namespace {

void check_er_args(std::size_t n, double p)
{
    if (n == 0)
        throw input_error("Erdos-Renyi graph needs n >= 1");
    if (!(p > 0.0 && p < 1.0))
        throw input_error("Erdos-Renyi graph needs 0 < p < 1");
}

} // namespace

MultiGraph gen_erdos_renyi_bernoulli(std::size_t n, double p, std::uint64_t seed)
{
    check_er_args(n, p);
    rng_t rng = make_stream(seed, 0);
    std::vector<Edge> edges;
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v)
            if (uniform01(rng) < p)
                edges.push_back({static_cast<vertex_t>(u), static_cast<vertex_t>(v)});
    return MultiGraph(n, edges);
}

MultiGraph gen_erdos_renyi_skip(std::size_t n, double p, std::uint64_t seed)
{
    check_er_args(n, p);
    rng_t rng = make_stream(seed, 0);
    std::vector<Edge> edges;
    // Walk the pairs (v, w), w < v, in row order, jumping Geometric(p) pairs.
    const double log_q = std::log1p(-p);
    std::int64_t v = 1;
    std::int64_t w = -1;
    const auto N = static_cast<std::int64_t>(n);
    while (v < N) {
        const double r = 1.0 - uniform01(rng); // (0, 1]
        w += 1 + static_cast<std::int64_t>(std::floor(std::log(r) / log_q));
        while (w >= v && v < N) {
            w -= v;
            ++v;
        }
        if (v < N)
            edges.push_back({static_cast<vertex_t>(w), static_cast<vertex_t>(v)});
    }
    return MultiGraph(n, edges);
}

MultiGraph gen_erdos_renyi(std::size_t n, double p, std::uint64_t seed)
{
    check_er_args(n, p);
    const double threshold = n > 1 ? std::log(static_cast<double>(n)) / static_cast<double>(n) : 1.0;
    return p >= threshold ? gen_erdos_renyi_bernoulli(n, p, seed)
                          : gen_erdos_renyi_skip(n, p, seed);
}

MultiGraph gen_regular_multigraph(std::size_t n, std::size_t d, std::uint64_t seed)
{
    if (n == 0 || d == 0)
        throw input_error("regular multigraph needs n >= 1 and d >= 1");
    if ((n * d) % 2 != 0)
        throw input_error("regular multigraph needs n*d even (n=" + std::to_string(n) +
                          ", d=" + std::to_string(d) + ")");
    std::vector<vertex_t> stubs;
    stubs.reserve(n * d);
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t k = 0; k < d; ++k)
            stubs.push_back(static_cast<vertex_t>(x));

    rng_t rng = make_stream(seed, 0);
    // Fisher-Yates; every permutation equally likely, so consecutive pairing
    // is a uniform perfect matching of the stubs.
    for (std::size_t i = stubs.size(); i > 1; --i)
        std::swap(stubs[i - 1], stubs[uniform_index(rng, i)]);

    std::vector<Edge> edges;
    edges.reserve(stubs.size() / 2);
    for (std::size_t i = 0; i < stubs.size(); i += 2)
        edges.push_back({stubs[i], stubs[i + 1]});
    return MultiGraph(n, edges);
}

std::size_t count_self_loops(const MultiGraph& g)
{
    std::size_t s = 0;
    for (vertex_t x = 0; x < g.num_vertices(); ++x)
        s += g.loops(x);
    return s;
}

namespace {

std::uint64_t draw_offspring(const OffspringLaw& law, rng_t& rng)
{
    if (const auto* b = std::get_if<BinomialOffspring>(&law.law)) {
        std::binomial_distribution<std::uint64_t> dist(b->m, b->p);
        return dist(rng);
    }
    std::poisson_distribution<std::uint64_t> dist(std::get<PoissonOffspring>(law.law).theta);
    return dist(rng);
}

void check_law(const OffspringLaw& law)
{
    if (const auto* b = std::get_if<BinomialOffspring>(&law.law)) {
        if (b->m == 0 || !(b->p > 0.0 && b->p <= 1.0))
            throw input_error("binomial offspring needs m >= 1 and 0 < p <= 1");
    } else if (!(std::get<PoissonOffspring>(law.law).theta > 0.0)) {
        throw input_error("poisson offspring needs theta > 0");
    }
}

} // namespace

std::pair<MultiGraph, GwMeta> gen_galton_watson(const OffspringLaw& law, std::size_t n_target,
                                                std::uint64_t seed)
{
    check_law(law);
    if (n_target == 0)
        throw input_error("Galton-Watson tree needs n_target >= 1");

    GwMeta meta;
    for (std::uint64_t attempt = 0; attempt < kGwRestartCap; ++attempt) {
        rng_t rng = make_stream(seed, attempt);
        std::vector<Edge> edges;
        edges.reserve(n_target - 1);
        std::vector<std::uint64_t> generations{1};
        std::uint64_t max_children = 0;
        bool truncated = false;

        // queue of (vertex, generation)
        std::deque<std::pair<vertex_t, std::size_t>> frontier{{0, 0}};
        std::size_t count = 1;
        while (!frontier.empty()) {
            if (count == n_target) {
                truncated = true;
                break;
            }
            const auto [parent, gen] = frontier.front();
            frontier.pop_front();
            const std::uint64_t drawn = draw_offspring(law, rng);
            if (generations.size() <= gen + 1)
                generations.push_back(0);
            generations[gen + 1] += drawn;
            const std::uint64_t room = n_target - count;
            const std::uint64_t kept = std::min(drawn, room);
            if (kept < drawn)
                truncated = true;
            max_children = std::max(max_children, kept);
            for (std::uint64_t k = 0; k < kept; ++k) {
                const auto child = static_cast<vertex_t>(count++);
                edges.push_back({parent, child});
                frontier.emplace_back(child, gen + 1);
            }
        }
        if (count < n_target) {
            ++meta.restarts;
            continue;
        }
        while (generations.size() > 1 && generations.back() == 0)
            generations.pop_back();
        meta.generation_sizes = std::move(generations);
        meta.truncated = truncated;
        meta.max_children = max_children;
        return {MultiGraph(n_target, edges), meta};
    }
    throw generation_failure("Galton-Watson process went extinct in " +
                             std::to_string(kGwRestartCap) + " consecutive attempts");
}

DegreeConditionReport check_degree_condition(const MultiGraph& g, double lambda, double alpha)
{
    DegreeConditionReport r;
    r.lhs = lambda * static_cast<double>(g.max_degree());
    r.rhs = std::pow(static_cast<double>(g.num_vertices()), -alpha);
    r.holds = r.lhs < r.rhs;
    return r;
}

} // namespace nsis

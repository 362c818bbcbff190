#include "helpers.hpp"

#include "nsis/errors.hpp"
#include "nsis/exact.hpp"
#include "nsis/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <vector>

using namespace nsis;
using nsis::test::recipe;

namespace {

// Independent dense oracle: the transition rules written out entry by entry.
std::vector<double> dense_oracle(const MultiGraph& g, const Params& p)
{
    const std::size_t n = g.num_vertices(), N = std::size_t{1} << n;
    std::vector<double> K(N * N, 0.0);
    for (std::size_t s = 0; s < N; ++s) {
        double off = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            double rate;
            if ((s >> x) & 1U) {
                rate = p.kappa;
            } else {
                double ni = 0.0;
                for (std::size_t y = 0; y < n; ++y)
                    if (y != x && ((s >> y) & 1U))
                        ni += g.multiplicity(static_cast<vertex_t>(x), static_cast<vertex_t>(y));
                rate = p.a + p.lambda * ni;
            }
            K[s * N + (s ^ (std::size_t{1} << x))] += rate / static_cast<double>(n);
            off += rate / static_cast<double>(n);
        }
        K[s * N + s] = 1.0 - off;
    }
    return K;
}

std::vector<double> two_state(double a, double kappa)
{
    return {1 - a, a, kappa, 1 - kappa};
}

} // namespace

TEST_SUITE("exact") {

TEST_CASE("n=1 kernel")
{
    const Kernel k = build_kernel(MultiGraph::edgeless(1), {0.6, 0.0, 0.2});
    CHECK(k.dense() == two_state(0.6, 0.2));
}

TEST_CASE("n=2 edgeless kernel is the uniform-site mixture of one-site kernels")
{
    const double a = 0.7, kappa = 0.15;
    const Kernel k = build_kernel(MultiGraph::edgeless(2), {a, 0.0, kappa});
    const auto P = two_state(a, kappa);
    // K = (1/2)(P (x) I) + (1/2)(I (x) P); bit 0 is vertex 0.
    for (std::size_t s = 0; s < 4; ++s)
        for (std::size_t t = 0; t < 4; ++t) {
            const std::size_t s0 = s & 1, s1 = s >> 1, t0 = t & 1, t1 = t >> 1;
            const double expected = 0.5 * P[s0 * 2 + t0] * (s1 == t1) + 0.5 * P[s1 * 2 + t1] * (s0 == t0);
            CHECK(k.at(s, t) == doctest::Approx(expected).epsilon(1e-15));
        }
}

TEST_CASE("kernels match the dense oracle and are row-stochastic")
{
    rng_t rng = make_stream(21, 0);
    for (int i = 0; i < 25; ++i) {
        const std::size_t n = 1 + uniform_index(rng, 7);
        std::vector<Edge> edges;
        for (std::size_t e = 0; e < n + 2; ++e)
            edges.push_back({static_cast<vertex_t>(uniform_index(rng, n)),
                             static_cast<vertex_t>(uniform_index(rng, n))});
        const MultiGraph g(n, edges);
        const double lambda = g.max_degree() ? 0.3 * uniform01(rng) / g.max_degree() : 0.1;
        const Params p{0.05 + 0.6 * uniform01(rng), lambda, 0.01 + 0.9 * uniform01(rng)};
        const Kernel k = build_kernel(g, p);
        CHECK(k.max_row_sum_error() <= 1e-12);
        CHECK(k.entries_in_unit_interval());
        const auto oracle = dense_oracle(g, p);
        const auto dense = k.dense();
        for (std::size_t j = 0; j < dense.size(); ++j)
            CHECK(dense[j] == doctest::Approx(oracle[j]).epsilon(1e-14));
        for (std::size_t s = 0; s < k.size(); ++s)
            for (const auto& e : k.row(s))
                if (e.col != s)
                    CHECK(std::popcount(s ^ e.col) == 1);
    }
}

TEST_CASE("resource guards")
{
    CHECK_THROWS_AS(build_kernel(MultiGraph::edgeless(15), {0.5, 0.0, 0.1}), resource_error);
    CHECK_THROWS_AS(build_coupled_kernel(MultiGraph::edgeless(8), {0.5, 0.0, 0.1},
                                         CouplingKind::PaperIndependent),
                    resource_error);
    CHECK_THROWS_AS(build_kernel(MultiGraph::star(4), {0.9, 0.1, 0.1}), config_error);
}

TEST_CASE("stationary law")
{
    const Kernel k1 = build_kernel(MultiGraph::edgeless(1), {0.6, 0.0, 0.2});
    const auto pi1 = stationary(k1);
    CHECK(pi1[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(pi1[1] == doctest::Approx(0.75).epsilon(1e-14));

    const double a = 0.45, kappa = 0.3;
    const Kernel k4 = build_kernel(MultiGraph::edgeless(4), {a, 0.0, kappa});
    const auto pi4 = stationary(k4);
    for (std::size_t s = 0; s < 16; ++s) {
        const int ones = std::popcount(s);
        const double expected = std::pow(a / (a + kappa), ones) * std::pow(kappa / (a + kappa), 4 - ones);
        CHECK(std::abs(pi4[s] - expected) <= 1e-12);
    }

    const MultiGraph c5 = MultiGraph::cycle(5);
    const Kernel k5 = build_kernel(c5, recipe(c5));
    const auto pi5 = stationary(k5);
    CHECK(stationary_residual(k5, pi5) <= 1e-12);
    CHECK(*std::min_element(pi5.begin(), pi5.end()) > 0.0);
    const auto pw = stationary_power_iteration(k5);
    CHECK(tv(pi5, pw) <= 1e-11);
}

TEST_CASE("tv")
{
    const std::vector<double> mu{0.2, 0.8}, p0{1.0, 0.0}, p1{0.0, 1.0}, u{0.5, 0.5};
    CHECK(tv(mu, mu) == 0.0);
    CHECK(tv(p0, p1) == 1.0);
    CHECK(tv(p0, u) == 0.5);
    CHECK_THROWS_AS(tv(mu, std::vector<double>{1.0}), input_error);
}

TEST_CASE("distance profile and mixing time")
{
    // Two-state chain: d(t) = 0.75 * 0.2^t.
    const Kernel k1 = build_kernel(MultiGraph::edgeless(1), {0.6, 0.0, 0.2});
    const auto pi1 = stationary(k1);
    const DistanceProfile p1 = distance_profile(k1, pi1, 6);
    for (std::size_t t = 0; t <= 6; ++t) {
        CHECK(p1.d[t] == doctest::Approx(0.75 * std::pow(0.2, t)).epsilon(1e-10));
        CHECK(p1.dbar[t] == doctest::Approx(std::pow(0.2, t)).epsilon(1e-10));
    }
    CHECK(exact_tmix(k1, pi1, 0.25) == 1);
    CHECK(exact_tmix(k1, pi1, 0.8) == 0);

    const MultiGraph g = MultiGraph::path(4);
    const Kernel k = build_kernel(g, recipe(g));
    const auto pi = stationary(k);
    const DistanceProfile p = distance_profile(k, pi, 60);
    CHECK(p.d[0] == doctest::Approx(1.0 - *std::min_element(pi.begin(), pi.end())));
    CHECK(p.dbar[0] == 1.0);
    for (std::size_t t = 0; t < p.d.size(); ++t) {
        CHECK(p.d[t] <= p.dbar[t] + 1e-12);
        CHECK(p.dbar[t] <= 2.0 * p.d[t] + 1e-12);
        if (t)
            CHECK(p.d[t] <= p.d[t - 1] + 1e-12);
    }
    std::size_t previous = exact_tmix(k, pi, 0.05);
    for (double eps : {0.1, 0.2, 0.25, 0.4, 0.6}) {
        const std::size_t t = exact_tmix(k, pi, eps);
        CHECK(t <= previous);
        CHECK(p.d[t] <= eps);
        if (t)
            CHECK(p.d[t - 1] > eps);
        previous = t;
    }
}

TEST_CASE("coupled kernel structure")
{
    const double a = 0.6, kappa = 0.2;
    const Kernel c1 = build_coupled_kernel(MultiGraph::edgeless(1), {a, 0.0, kappa},
                                           CouplingKind::PaperIndependent);
    // index (sigma << 1) | eta; from (0, 1) = 1
    CHECK(c1.at(1, 3) == doctest::Approx(a * (1 - kappa)));
    CHECK(c1.at(1, 0) == doctest::Approx((1 - a) * kappa));
    CHECK(c1.at(1, 2) == doctest::Approx(a * kappa));
    CHECK(c1.at(1, 1) == doctest::Approx((1 - a) * (1 - kappa)));

    const MultiGraph g = MultiGraph::cycle(3);
    const Params pr = recipe(g);
    const Kernel k = build_kernel(g, pr);
    for (CouplingKind kind : {CouplingKind::PaperIndependent, CouplingKind::CommonUniform}) {
        const Kernel c = build_coupled_kernel(g, pr, kind);
        CHECK(c.max_row_sum_error() <= 1e-12);
        for (std::size_t s = 0; s < 8; ++s)
            for (std::size_t e = 0; e < 8; ++e) {
                const std::size_t row = (s << 3) | e;
                std::vector<double> ms(8, 0.0), me(8, 0.0);
                for (const auto& ent : c.row(row)) {
                    ms[ent.col >> 3] += ent.prob;
                    me[ent.col & 7] += ent.prob;
                    if (s == e)
                        CHECK((ent.col >> 3) == (ent.col & 7));
                }
                for (std::size_t j = 0; j < 8; ++j) {
                    CHECK(ms[j] == doctest::Approx(k.at(s, j)).epsilon(1e-14));
                    CHECK(me[j] == doctest::Approx(k.at(e, j)).epsilon(1e-14));
                }
            }
    }
}

TEST_CASE("contraction check")
{
    const MultiGraph e2 = MultiGraph::edgeless(2);
    const Params pr{0.995, 0.0, 0.01};
    const ContractionCheck c = exact_contraction_check(e2, pr);
    CHECK(c.pass);
    CHECK(c.lower_pass);
    // Edgeless adjacent pair: the differing site meets with probability
    // a(1-k) + (1-a)k; the agreeing site splits with probability 2r(1-r) for
    // its rate r (a if susceptible, k if infected).
    const double meet = pr.a * (1 - pr.kappa) + (1 - pr.a) * pr.kappa;
    const double split = std::max(pr.a * (1 - pr.a), pr.kappa * (1 - pr.kappa));
    CHECK(c.max_adjacent == doctest::Approx(1.0 - meet / 2.0 + split).epsilon(1e-14));
    CHECK(c.upper_bound == doctest::Approx(1.0 - gamma_const(pr, 2) / 2.0));

    const MultiGraph p3 = MultiGraph::path(3);
    CHECK(exact_contraction_check(p3, recipe(p3)).pass);
    CHECK_THROWS_AS(exact_contraction_check(p3, {0.6, 0.0, 0.3}), precondition_error);
    CHECK_THROWS_AS(exact_contraction_check(p3, recipe(p3), CouplingKind::CommonUniform),
                    precondition_error);
}

TEST_CASE("second moment check")
{
    const MultiGraph e2 = MultiGraph::edgeless(2);
    const auto s = exact_second_moment_check(e2, recipe(e2), CouplingKind::PaperIndependent, 200);
    CHECK(s.pass);
    CHECK(s.all_pairs_pass);
    REQUIRE(s.rows.size() == 201);
    CHECK(s.rows[0].e_rho2 == 4.0);
    CHECK(s.rows[0].bound == doctest::Approx(4.0 + 2.0 / (2.0 * s.gamma)));

    const auto v = exact_second_moment_check(MultiGraph::path(6), {0.998, 1e-4, 0.006},
                                             CouplingKind::PaperIndependent, 500, 3.0);
    CHECK(v.pass);
    CHECK(v.variance_checked);
    CHECK(v.variance_pass);
    for (const auto& row : v.rows)
        CHECK(row.variance <= v.variance_bound);
    CHECK_THROWS_AS(exact_second_moment_check(e2, {0.2, 0.0, 0.4}, CouplingKind::PaperIndependent, 5),
                    domain_error);
}

TEST_CASE("coupling inequality and sup-pair tail")
{
    const MultiGraph g = MultiGraph::star(4);
    const Params pr = recipe(g);
    for (CouplingKind kind : {CouplingKind::PaperIndependent, CouplingKind::CommonUniform}) {
        const auto c = coupling_inequality_check(g, pr, kind, 300);
        CHECK(c.pass);
        CHECK(c.tail[0] == 1.0);
        for (std::size_t t = 1; t < c.tail.size(); ++t)
            CHECK(c.tail[t] <= c.tail[t - 1] + 1e-15);
    }
    // n=1 common coupling: P(tau > t) = (1 - (a - kappa))^t from (0,1).
    const Kernel c1 = build_coupled_kernel(MultiGraph::edgeless(1), {0.6, 0.0, 0.1},
                                           CouplingKind::CommonUniform);
    const auto tail = sup_pair_tail(c1, 5);
    for (std::size_t t = 0; t <= 5; ++t)
        CHECK(tail[t] == doctest::Approx(std::pow(0.5, t)));
}

TEST_CASE("lumped edgeless profile agrees with the full kernel")
{
    const Params pr{0.97, 0.0, 0.03};
    for (std::size_t n : {1u, 3u, 6u}) {
        const Kernel k = build_kernel(MultiGraph::edgeless(n), pr);
        const auto pi = stationary(k);
        const auto full = distance_profile(k, pi, 80, false);
        const auto lumped = edgeless_distance_profile(n, pr, 80);
        for (std::size_t t = 0; t <= 80; ++t)
            CHECK(lumped[t] == doctest::Approx(full.d[t]).epsilon(1e-9));
        CHECK(edgeless_exact_tmix(n, pr, 0.25) == exact_tmix(k, pi, 0.25));
    }
}

}

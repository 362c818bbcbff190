#include "helpers.hpp"

#include "nsis/errors.hpp"
#include "nsis/rng.hpp"
#include "nsis/sis.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

using namespace nsis;
using nsis::test::three_sigma;

TEST_SUITE("sis") {

TEST_CASE("infection_prob")
{
    const MultiGraph p3 = MultiGraph::path(3);
    const Params pr{0.5, 0.1, 0.2};
    CHECK(infection_prob(p3, pr, Configuration::from_string("101"), 1) == doctest::Approx(0.7));
    CHECK(infection_prob(p3, pr, Configuration::all_susceptible(3), 1) == pr.a);
    const MultiGraph c5 = MultiGraph::cycle(5);
    CHECK(infection_prob(c5, pr, Configuration::all_infected(5), 2) == doctest::Approx(0.7));
    CHECK_THROWS_AS(infection_prob(p3, Params{0.9, 0.1, 0.2}, Configuration::all_infected(3), 1),
                    config_error);
}

TEST_CASE("p_star")
{
    CHECK(p_star(MultiGraph::path(4), {0.995, 0.001, 0.01}) == doctest::Approx(0.997));
    CHECK(p_star(MultiGraph::edgeless(4), {0.4, 0.3, 0.01}) == 0.4);
    CHECK(p_star(MultiGraph::star(9), {0.4, 0.0, 0.01}) == 0.4);
}

TEST_CASE("gamma_const")
{
    CHECK(gamma_const({0.995, 0.0, 0.01}, 2) == doctest::Approx(0.96530).epsilon(1e-12));
    const double a = 0.8, k = 0.05;
    CHECK(gamma_const({a, 0.0, k}, 1) == doctest::Approx((1 - k) * a + (1 - a) * k));
    CHECK(gamma_const({a, 0.0, 1e-300}, 7) == doctest::Approx(a));
}

TEST_CASE("beta_const")
{
    CHECK(beta_const({0.995, 0.0, 0.01}, 0.997) == doctest::Approx(0.98706).epsilon(1e-12));
    CHECK(beta_const({0.6, 0.0, 1e-300}, 0.6) == doctest::Approx(0.6));
    CHECK(beta_const({0.6, 0.0, 1e-300}, 1.0) == doctest::Approx(1.0));
    const MultiGraph p = MultiGraph::path(4);
    const Params pr{0.995, 0.001, 0.01};
    CHECK(beta_const(pr, p) == doctest::Approx(0.01 + 0.997 * 0.98));
}

TEST_CASE("check_regime")
{
    const RegimeReport r2 = check_regime({0.995, 0.0, 0.01}, 2);
    CHECK(r2.regime_upper);
    CHECK(r2.gamma == doctest::Approx(0.9653));

    const RegimeReport r10 = check_regime({0.9995, 0.0, 0.002}, 10, 3.0);
    CHECK(r10.regime_lower);
    CHECK(r10.lower_failure.empty());

    for (double kappa : {1e-4, 1e-3, 2e-3, 3e-3, 1e-2, 0.02}) {
        const RegimeReport r = check_regime({0.99999, 0.0, kappa}, 10, 2.0);
        CHECK_FALSE(r.regime_lower);
        CHECK_FALSE(r.lower_failure.empty());
    }
    CHECK(*r10.feasible_alpha_min == doctest::Approx(std::log(324.0) / std::log(10.0)));
    CHECK(*check_regime({0.9, 0.0, 0.01}, 2).feasible_alpha_min == doctest::Approx(2.0));

    const RegimeReport bad = check_regime({0.6, 0.0, 0.3}, 3);
    CHECK_FALSE(bad.regime_upper);
    CHECK_FALSE(bad.upper_failure.empty());
    CHECK_THROWS_AS(check_regime({0.9, 0.0, 0.01}, 1), input_error);

    const RegimeReport withg = check_regime(MultiGraph::path(3), {0.9, 0.2, 0.01});
    CHECK(withg.p_star_ok.has_value());
    CHECK_FALSE(*withg.p_star_ok);
}

TEST_CASE("params validation")
{
    CHECK_THROWS_AS(Params({1.0, 0.0, 0.1}).validate(), config_error);
    CHECK_THROWS_AS(Params({0.5, -0.1, 0.1}).validate(), config_error);
    CHECK_THROWS_AS(Params({0.5, 0.0, 0.0}).validate(), config_error);
    CHECK_THROWS_AS(SisChain(MultiGraph::star(4), {0.9, 0.05, 0.1}), config_error);
}

TEST_CASE("single-step laws")
{
    const double a = 0.37, kappa = 0.21;
    const MultiGraph g1 = MultiGraph::edgeless(1);
    const SisChain c1(g1, {a, 0.0, kappa});
    rng_t rng = make_stream(1, 0);
    const int R = 200000;
    int infected = 0, recovered = 0;
    for (int i = 0; i < R; ++i) {
        Configuration s(1, false);
        c1.step(s, rng);
        infected += s[0];
        Configuration t = Configuration::all_infected(1);
        c1.step(t, rng);
        recovered += !t[0];
    }
    CHECK(std::abs(infected / double(R) - a) <= three_sigma(a, R));
    CHECK(std::abs(recovered / double(R) - kappa) <= three_sigma(kappa, R));

    // All-infected on any graph: some coordinate flips with probability kappa.
    const MultiGraph c4 = MultiGraph::cycle(4);
    const SisChain cc(c4, {0.6, 0.05, kappa});
    int changed = 0;
    for (int i = 0; i < R; ++i) {
        Configuration s = Configuration::all_infected(4);
        changed += cc.step(s, rng).has_value() && s.infected_count() == 3;
    }
    CHECK(std::abs(changed / double(R) - kappa) <= three_sigma(kappa, R));
}

TEST_CASE("n=3 path one-step law matches the hand-computed row")
{
    const MultiGraph g = MultiGraph::path(3);
    const Params pr{0.5, 0.15, 0.3};
    const SisChain chain(g, pr);
    rng_t rng = make_stream(2, 0);
    const int R = 1000000;
    for (const char* start : {"000", "010", "101", "111"}) {
        const Configuration s0 = Configuration::from_string(start);
        // Row: flip site x with probability (1/3) * rate(x).
        std::map<std::string, double> expected;
        double stay = 1.0;
        for (vertex_t x = 0; x < 3; ++x) {
            std::size_t ni = 0;
            if (x > 0)
                ni += s0[x - 1];
            if (x < 2)
                ni += s0[x + 1];
            const double rate = s0[x] ? pr.kappa : pr.a + pr.lambda * static_cast<double>(ni);
            Configuration t = s0;
            t.flip(x);
            expected[t.to_string()] = rate / 3.0;
            stay -= rate / 3.0;
        }
        expected[start] = stay;
        std::map<std::string, int> seen;
        for (int i = 0; i < R; ++i) {
            Configuration s = s0;
            chain.step(s, rng);
            ++seen[s.to_string()];
        }
        for (const auto& [state, count] : seen)
            REQUIRE(expected.count(state) == 1);
        for (const auto& [state, p] : expected)
            CHECK(std::abs(seen[state] / double(R) - p) <= three_sigma(p, R));
    }
}

TEST_CASE("step properties: one site, valid rates, monotone rates")
{
    rng_t rng = make_stream(4, 0);
    const MultiGraph g(6, {{0, 1}, {1, 2}, {1, 2}, {2, 3}, {3, 3}, {4, 5}, {0, 5}});
    const Params pr{0.7, 0.09, 0.2};
    const SisChain chain(g, pr);
    Configuration s(6);
    for (int i = 0; i < 20000; ++i) {
        const Configuration before = s;
        chain.step(s, rng);
        std::size_t diff = 0;
        for (vertex_t x = 0; x < 6; ++x)
            diff += before[x] != s[x];
        CHECK(diff <= 1);
        for (vertex_t x = 0; x < 6; ++x) {
            const double r = chain.flip_prob(s, x);
            CHECK(r >= 0.0);
            CHECK(r <= 1.0);
            Configuration hi = s;
            hi.set(static_cast<vertex_t>(uniform_index(rng, 6)), true);
            CHECK(chain.infection_prob(s, x) <= chain.infection_prob(hi, x));
        }
    }
}

TEST_CASE("run_chain")
{
    const MultiGraph g = MultiGraph::cycle(5);
    const Params pr{0.6, 0.05, 0.3};
    const Configuration s0 = Configuration::from_string("10100");
    const Trajectory t0 = run_chain(g, pr, s0, 0, 1, 3);
    CHECK(t0.final == s0);
    CHECK(t0.infected_counts == std::vector<std::size_t>{2});

    const Trajectory a = run_chain(g, pr, s0, 1000, 10, 3);
    const Trajectory b = run_chain(g, pr, s0, 1000, 10, 3);
    CHECK(a.final == b.final);
    CHECK(a.infected_counts == b.infected_counts);
    CHECK(a.infected_counts.size() == 101);
    for (std::size_t c : a.infected_counts)
        CHECK(c <= 5);
    CHECK(a.infected_counts.back() == a.final.infected_count());
}

TEST_CASE("edgeless time-average infected fraction")
{
    const std::size_t n = 20;
    const Params pr{0.3, 0.0, 0.2};
    const int runs = 60;
    std::vector<double> means;
    for (int r = 0; r < runs; ++r) {
        const Trajectory t = run_chain(MultiGraph::edgeless(n), pr, Configuration(n), 40000, 1,
                                       static_cast<std::uint64_t>(r));
        double sum = 0.0;
        for (std::size_t k = 2000; k < t.infected_counts.size(); ++k)
            sum += static_cast<double>(t.infected_counts[k]) / n;
        means.push_back(sum / static_cast<double>(t.infected_counts.size() - 2000));
    }
    double m = 0.0, v = 0.0;
    for (double x : means)
        m += x;
    m /= runs;
    for (double x : means)
        v += (x - m) * (x - m);
    const double se = std::sqrt(v / (runs - 1) / runs);
    CHECK(std::abs(m - pr.a / (pr.a + pr.kappa)) <= 3.0 * se);
}

TEST_CASE("n=1 law at time t matches the 2x2 kernel power")
{
    const Params pr{0.35, 0.0, 0.25};
    const MultiGraph g = MultiGraph::edgeless(1);
    const int R = 100000;
    for (std::uint64_t t : {1u, 2u, 5u}) {
        int infected = 0;
        for (int r = 0; r < R; ++r)
            infected += run_chain(g, pr, Configuration(1), t, t, static_cast<std::uint64_t>(r)).final[0];
        // [[1-a, a], [k, 1-k]]^t applied to delta_0.
        double p0 = 1.0, p1 = 0.0;
        for (std::uint64_t s = 0; s < t; ++s) {
            const double q0 = p0 * (1 - pr.a) + p1 * pr.kappa;
            p1 = p0 * pr.a + p1 * (1 - pr.kappa);
            p0 = q0;
        }
        CHECK(std::abs(infected / double(R) - p1) <= three_sigma(p1, R));
    }
}

TEST_CASE("theorem bounds")
{
    CHECK(upper_mixing_bound(100, 0.9653, 0.25) ==
          doctest::Approx(100 / 0.9653 * (std::log(100.0) + std::log(4.0))));
    CHECK(upper_mixing_bound(100, 0.9653, 0.25) == doctest::Approx(620.7).epsilon(1e-4));
    CHECK(upper_mixing_bound(37, 0.8, 1.0) == doctest::Approx(37 / 0.8 * std::log(37.0)));
    const double low = lower_mixing_bound(10, 0.98706, 0.9653, 0.25);
    CHECK(low < 0.0);
    CHECK(low == doctest::Approx(10 / (2 * 0.98706) * std::log(10 * 0.9653 * 0.25 / 4)));
    CHECK_THROWS_AS(upper_mixing_bound(5, 0.0, 0.25), domain_error);

    const TheoremBounds b = theorem_bounds(MultiGraph::path(10), {0.9995, 1e-4, 0.002}, 0.25);
    CHECK(b.lower_vacuous);
    CHECK(b.upper > 0.0);
    CHECK(b.gamma == doctest::Approx(gamma_const({0.9995, 1e-4, 0.002}, 10)));
    CHECK_THROWS_AS(theorem_bounds(MultiGraph::path(10), {0.6, 0.0, 0.3}, 0.25), domain_error);
}

}

#include "helpers.hpp"

#include "nsis/errors.hpp"
#include "nsis/experiments.hpp"
#include "nsis/format.hpp"
#include "nsis/rng.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <cstring>

using namespace nsis;

TEST_SUITE("experiments") {

TEST_CASE("CSV re-parses bit-exactly")
{
    CsvTable t;
    t.provenance = {{"seed", "7"}, {"recipe", "kappa=1/(8(n-1))"}};
    t.columns = {"x", "y"};
    rng_t rng = make_stream(1, 0);
    std::vector<double> values;
    for (int i = 0; i < 500; ++i) {
        const double v = std::ldexp(uniform01(rng), -static_cast<int>(uniform_index(rng, 60)));
        values.push_back(v);
        t.add_row({cell(std::uint64_t(i)), cell(v)});
    }
    const CsvTable back = CsvTable::parse(t.to_string());
    CHECK(back.provenance == t.provenance);
    CHECK(back.columns == t.columns);
    REQUIRE(back.rows.size() == values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = parse_double(back.rows[i][1]);
        CHECK(std::memcmp(&v, &values[i], sizeof v) == 0);
    }
    CHECK_THROWS_AS(t.add_row({"1"}), input_error);
}

TEST_CASE("fit_nlogn")
{
    std::vector<std::pair<double, double>> exact;
    for (double n : {10.0, 50.0, 200.0})
        exact.emplace_back(n, 3.0 * n * std::log(n));
    const FitResult f = fit_nlogn(exact);
    CHECK(f.c == doctest::Approx(3.0));
    CHECK(f.r_squared == doctest::Approx(1.0));

    const FitResult zero = fit_nlogn({{10.0, 0.0}});
    CHECK(zero.c == 0.0);
    CHECK(fit_nlogn({{17.0, 40.0}}).r_squared == 1.0);

    // Symmetric +-delta noise around c = 1.5 leaves c within delta * sum|x| / sum x^2.
    const double c = 1.5, delta = 20.0;
    std::vector<std::pair<double, double>> noisy;
    double sx = 0.0, sxx = 0.0;
    for (double n : {100.0, 200.0, 400.0, 800.0}) {
        const double x = n * std::log(n);
        noisy.emplace_back(n, c * x + (noisy.size() % 2 ? delta : -delta));
        sx += x;
        sxx += x * x;
    }
    const FitResult fn = fit_nlogn(noisy);
    CHECK(std::abs(fn.c - c) <= delta * sx / sxx);
    CHECK(fn.r_squared >= 0.0);
    CHECK(fn.r_squared <= 1.0);
    CHECK(fn.residuals.size() == 4);

    CHECK_THROWS_AS(fit_nlogn({}), input_error);
    CHECK_THROWS_AS(fit_nlogn({{1.0, 2.0}}), input_error);
}

TEST_CASE("config validation and recipes")
{
    ExperimentConfig cfg;
    cfg.n_grid = {100, 100};
    CHECK_THROWS_AS(cfg.validate(), input_error);
    cfg.n_grid = {100, 200};
    cfg.replicas = 0;
    CHECK_THROWS_AS(cfg.validate(), input_error);
    cfg.replicas = 10;
    CHECK_NOTHROW(cfg.validate());

    const double n = 100, alpha = 2.0;
    cfg.alpha = alpha;
    const Params e = recipe_params(cfg, 100, 0);
    CHECK(e.kappa == doctest::Approx(1.0 / (8 * 99)));
    CHECK(e.a == doctest::Approx(1.0 - e.kappa / 2));
    CHECK(e.lambda == 0.0);
    cfg.family = GraphFamily::ErdosRenyi;
    cfg.er_p = 0.2;
    CHECK(recipe_params(cfg, 100, 30).lambda == doctest::Approx(1.0 / (std::pow(n, 1 + alpha) * 0.2)));
    cfg.family = GraphFamily::Regular;
    cfg.degree = 4;
    CHECK(recipe_params(cfg, 100, 4).lambda == doctest::Approx(1.0 / (4 * n * n)));
    cfg.family = GraphFamily::GwPoisson;
    CHECK(recipe_params(cfg, 100, 7).lambda ==
          doctest::Approx(std::log(std::log(n)) / (n * n * std::log(n))));
    cfg.family = GraphFamily::File;
    CHECK(recipe_params(cfg, 100, 5).lambda == doctest::Approx(1.0 / (n * n * 10)));
    CHECK(parse_graph_family("gw-binomial") == GraphFamily::GwBinomial);
    CHECK_THROWS_AS(parse_graph_family("lattice"), input_error);
}

TEST_CASE("scaling experiment")
{
    ExperimentConfig cfg;
    cfg.family = GraphFamily::Regular;
    cfg.degree = 3;
    cfg.n_grid = {50};
    cfg.replicas = 200;
    cfg.seed = 3;
    const ScalingResult one = scaling_experiment(cfg);
    REQUIRE(one.fit);
    CHECK(one.fit->r_squared == 1.0);
    CHECK(one.rows[0].error.empty());
    CHECK(static_cast<double>(one.rows[0].t_hat) <= one.rows[0].theorem_upper);

    // A regime violation becomes an error row; the rest of the grid still runs.
    cfg.family = GraphFamily::Empty;
    cfg.n_grid = {4, 40};
    cfg.fixed_params = Params{0.9, 0.0, 0.05};
    const ScalingResult mixed = scaling_experiment(cfg);
    CHECK_FALSE(mixed.rows[0].error.empty());
    CHECK(mixed.rows[1].error.find("kappa") != std::string::npos);
    cfg.fixed_params.reset();
    cfg.n_grid = {4, 40};
    const ScalingResult ok = scaling_experiment(cfg);
    CHECK(ok.rows[0].error.empty());
    CHECK(ok.rows[1].error.empty());

    // Budget exhaustion is reported per n.
    cfg.step_budget = 3;
    const ScalingResult timed = scaling_experiment(cfg);
    CHECK_FALSE(timed.rows[1].error.empty());
}

TEST_CASE("scaling output is byte-identical across worker counts")
{
    ExperimentConfig cfg;
    cfg.family = GraphFamily::ErdosRenyi;
    cfg.er_p = 0.1;
    cfg.n_grid = {30, 60};
    cfg.replicas = 150;
    cfg.seed = 11;
    setenv("NSIS_WORKERS", "1", 1);
    const auto r1 = scaling_experiment(cfg);
    const std::string csv1 = scaling_table(cfg, r1).to_string(), json1 = scaling_json(cfg, r1);
    setenv("NSIS_WORKERS", "3", 1);
    const auto r3 = scaling_experiment(cfg);
    unsetenv("NSIS_WORKERS");
    CHECK(scaling_table(cfg, r3).to_string() == csv1);
    CHECK(scaling_json(cfg, r3) == json1);
    const auto parsed = nlohmann::json::parse(json1);
    CHECK(parsed["rows"].size() == 2);
    CHECK(parsed["recipe"].get<std::string>() == cfg.recipe_description());
}

TEST_CASE("more replicas never widen the reported interval")
{
    ExperimentConfig cfg;
    cfg.n_grid = {64};
    cfg.seed = 5;
    std::uint64_t previous = ~std::uint64_t{0};
    for (std::size_t r : {100u, 400u, 1600u}) {
        cfg.replicas = r;
        const ScalingRow row = scaling_experiment(cfg).rows[0];
        REQUIRE(row.error.empty());
        const std::uint64_t width = row.t_hat - row.t_low;
        CHECK(width <= previous);
        previous = width;
    }
}

TEST_CASE("degree concentration")
{
    CHECK_THROWS_AS(degree_concentration_experiment(100, 0.1, 5, 1), precondition_error);
    CHECK_THROWS_AS(degree_concentration_experiment(1000, 0.05, 5, 1, {1.0}), input_error);
    const auto r = degree_concentration_experiment(1000, 0.05, 20, 1);
    REQUIRE(r.bands.size() == 2);
    for (const DeltaBand& b : r.bands) {
        CHECK(b.union_bound ==
              doctest::Approx(1.0 - 2000.0 * std::exp(-b.delta * b.delta * 50.0 / 3.0)));
        CHECK(b.pass);
        CHECK(b.vertex_pass);
    }
    CHECK(r.max_degree.size() == 20);
    CHECK(nlohmann::json::parse(to_json(r))["bands"].size() == 2);
}

TEST_CASE("self-loop experiment")
{
    const auto d1 = selfloop_experiment(100, 1, 200, 1);
    CHECK(d1.mean <= 0.01);
    CHECK(d1.target == 0.0);
    const auto d3 = selfloop_experiment(200, 3, 2000, 2, {0.5, 1.5});
    CHECK(d3.target == 1.0);
    CHECK(d3.within_3sigma);
    CHECK(d3.tails[0].bound == doctest::Approx(2.0 * std::exp(-2.0 * 0.25 / 200)));
    CHECK(d3.tails[1].bound == doctest::Approx(2.0 * std::exp(-2.0 * 2.25 / 200)));
    CHECK_THROWS_AS(selfloop_experiment(5, 3, 10, 1), input_error);
}

TEST_CASE("Poisson maximum child count")
{
    const auto r = poisson_max_degree_experiment(1000, 1.5, 25, 4);
    CHECK(r.in_sanity_band);
    CHECK(r.median_scaled > 0.0);
}

TEST_CASE("regime table")
{
    const auto rows = regime_table({2, 10}, {2.0, 3.0}, 2);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].alpha_threshold == doctest::Approx(2.0));
    CHECK_FALSE(rows[0].feasible);
    const RegimeTableRow& r102 = rows[2];
    CHECK_FALSE(r102.feasible);
    CHECK_FALSE(r102.suggestion);
    const RegimeTableRow& r103 = rows[3];
    CHECK(r103.feasible);
    CHECK(r103.kappa_low == doctest::Approx(1e-3));
    CHECK(r103.kappa_high == doctest::Approx(1.0 / 324));
    REQUIRE(r103.suggestion);
    CHECK(r103.suggestion->kappa == doctest::Approx(0.002));
    CHECK(r103.suggestion->a == doctest::Approx(0.9995));
    CHECK(r103.suggestion->lambda * 2 < 1e-3);
    CHECK(r103.suggestion_valid);
    const CsvTable t = regime_csv(rows, 2);
    CHECK(t.rows.size() == 4);
}

TEST_CASE("exact check battery on one instance")
{
    const MultiGraph g = MultiGraph::cycle(4);
    const ExactCheckReport r = run_exact_checks("cycle-4", g, upper_regime_recipe(g), {});
    CHECK(r.pass());
    CHECK(r.tmix.has_value());
    CHECK(*r.upper_bound_holds);
    CHECK(r.contraction->pass);
    CHECK(r.coupling.size() == 2);
    const auto j = nlohmann::json::parse(to_json(r));
    CHECK(j["pass"].get<bool>());
    const CsvTable prof = profile_csv(r);
    CHECK(prof.columns == std::vector<std::string>{"t", "d", "dbar"});
    CHECK(prof.rows.size() == r.profile.d.size());
    CHECK(default_battery().size() == 22);
}

}

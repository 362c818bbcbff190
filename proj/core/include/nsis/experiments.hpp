#pragma once

#include "nsis/coupling.hpp"
#include "nsis/exact.hpp"
#include "nsis/graph.hpp"
#include "nsis/random_graphs.hpp"
#include "nsis/sis.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nsis {

// ---------------------------------------------------------------------------
// CSV emission. Numbers use the shortest round-trip form, so re-parsing gives
// back the same doubles. Provenance goes into leading "# key=value" lines.

struct CsvTable {
    std::vector<std::pair<std::string, std::string>> provenance;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells);
    std::string to_string() const;
    void write(const std::filesystem::path& path) const;
    static CsvTable parse(std::string_view text);
};

std::string cell(double v);
std::string cell(std::uint64_t v);

// ---------------------------------------------------------------------------
// Experiment configuration.

enum class GraphFamily { Empty, ErdosRenyi, Regular, GwBinomial, GwPoisson, File };

std::string_view to_string(GraphFamily f);
// empty | er | regular | gw-binomial | gw-poisson | file
GraphFamily parse_graph_family(std::string_view text);

struct ExperimentConfig {
    GraphFamily family = GraphFamily::Empty;
    double er_p = 0.1;
    std::size_t degree = 3;
    std::uint32_t binomial_m = 4;
    double binomial_p = 0.5;
    double poisson_theta = 2.0;
    std::filesystem::path graph_file;

    std::vector<std::size_t> n_grid;
    // When set, used verbatim for every n instead of the recipe.
    std::optional<Params> fixed_params;
    // Exponent used by the family's lambda recipe.
    double alpha = 2.0;
    double eps = 0.25;
    std::size_t replicas = 1000;
    std::uint64_t seed = 1;
    CouplingKind kind = CouplingKind::PaperIndependent;
    std::optional<std::uint64_t> step_budget;

    // n_grid non-empty and strictly increasing, every n >= 2, replicas >= 1.
    void validate() const;
    std::string recipe_description() const;
};

// Graph of the configured family at size n (seeded from (seed, n)).
MultiGraph make_family_graph(const ExperimentConfig& cfg, std::size_t n);

// kappa(n) = 1/(8(n-1)), a(n) = 1 - kappa(n)/2, lambda(n) from the family:
//   empty: 0;  er: 1/(n^(1+alpha) p);  regular: 1/(d n^alpha);
//   gw-binomial: 1/(n^(1+alpha) p);  gw-poisson: log log n / (n^alpha log n);
//   file: n^-alpha / (2 max_degree).
Params recipe_params(const ExperimentConfig& cfg, std::size_t n, std::size_t max_degree);

// ---------------------------------------------------------------------------
// Scaling law.

struct FitResult {
    double c = 0.0;
    // Uncentred R^2 of the fit through the origin: 1 - SS_res / sum t^2.
    double r_squared = 1.0;
    std::vector<double> residuals;
};

// Least-squares t ~ c * n ln n through the origin.
FitResult fit_nlogn(const std::vector<std::pair<double, double>>& points);

struct ScalingRow {
    std::size_t n = 0;
    Params params;
    std::size_t max_degree = 0;
    std::uint64_t t_hat = 0;
    std::uint64_t t_low = 0;
    double theorem_upper = 0.0;
    double theorem_lower = 0.0;
    bool lower_vacuous = true;
    // The lower-bound regime holds at this n for cfg.alpha; otherwise
    // theorem_lower is reported for reference only.
    bool lower_regime = false;
    std::string error; // non-empty for failed rows
};

struct ScalingResult {
    std::vector<ScalingRow> rows;
    std::optional<FitResult> fit;
    bool all_within_upper = true; // every successful t_hat <= theorem upper
};

ScalingResult scaling_experiment(const ExperimentConfig& cfg);
CsvTable scaling_table(const ExperimentConfig& cfg, const ScalingResult& r);
std::string scaling_json(const ExperimentConfig& cfg, const ScalingResult& r);

// ---------------------------------------------------------------------------
// Random-graph concentration.

struct DeltaBand {
    double delta = 0.0;
    double all_in_band = 0.0;      // fraction of graphs with every degree in the band
    double all_in_band_stderr = 0.0;
    double union_bound = 0.0;      // 1 - 2 n exp(-delta^2 n p / 3)
    bool pass = false;             // all_in_band >= union_bound - 5 stderr
    double vertex_outside = 0.0;   // mean fraction of vertices outside the band
    double vertex_outside_stderr = 0.0;
    double vertex_bound = 0.0;     // 2 exp(-delta^2 n p / 3)
    bool vertex_pass = false;
};

struct DegreeConcentrationReport {
    std::size_t n = 0;
    double p = 0.0;
    std::size_t graphs = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> max_degree;
    std::vector<std::size_t> min_degree;
    std::vector<DeltaBand> bands;
};

// Requires n p >= 20 and every delta in (0, 1).
DegreeConcentrationReport degree_concentration_experiment(std::size_t n, double p,
                                                          std::size_t graphs, std::uint64_t seed,
                                                          std::vector<double> deltas = {0.3, 0.5});

struct SelfLoopTail {
    double delta = 0.0;
    double frequency = 0.0; // fraction of graphs with |S - (d-1)/2| >= delta
    double bound = 0.0;     // 2 exp(-2 delta^2 / n)
};

struct SelfLoopReport {
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t graphs = 0;
    std::uint64_t seed = 0;
    double target = 0.0;      // (d-1)/2
    double exact_mean = 0.0;  // n d (d-1) / (2 (n d - 1))
    double mean = 0.0;
    double sd = 0.0;
    double stderr_mean = 0.0;
    bool within_3sigma = false;
    std::vector<SelfLoopTail> tails;
};

SelfLoopReport selfloop_experiment(std::size_t n, std::size_t d, std::size_t graphs,
                                   std::uint64_t seed, std::vector<double> deltas = {1.0, 2.0, 3.0});

struct PoissonMaxDegreeReport {
    std::size_t n = 0;
    double theta = 0.0;
    std::size_t draws = 0;
    double median_scaled = 0.0; // median of max_children * log log n / log n
    bool in_sanity_band = false; // within [0.3, 3]
};

PoissonMaxDegreeReport poisson_max_degree_experiment(std::size_t n, double theta,
                                                     std::size_t draws, std::uint64_t seed);

std::string to_json(const DegreeConcentrationReport& r);
std::string to_json(const SelfLoopReport& r);
std::string to_json(const PoissonMaxDegreeReport& r);

// ---------------------------------------------------------------------------
// Regime feasibility.

struct RegimeTableRow {
    std::size_t n = 0;
    double alpha = 0.0;
    double alpha_threshold = 0.0;
    double kappa_low = 0.0;  // n^-alpha
    double kappa_high = 0.0; // 1/(4(n-1)^2)
    bool feasible = false;
    std::optional<Params> suggestion;
    bool suggestion_valid = false;
};

// Suggestion: kappa = interval midpoint rounded to one significant digit (if
// still inside), a = 1 - n^-alpha / 2, lambda = n^-alpha / (4 max_degree).
std::vector<RegimeTableRow> regime_table(const std::vector<std::size_t>& n_grid,
                                         const std::vector<double>& alpha_grid,
                                         std::size_t max_degree);
CsvTable regime_csv(const std::vector<RegimeTableRow>& rows, std::size_t max_degree);

// ---------------------------------------------------------------------------
// Exact check battery on one (graph, params) instance.

struct ExactCheckOptions {
    double eps = 0.25;
    std::size_t t_max = 200;      // second-moment / coupling-inequality horizon
    std::optional<double> alpha;  // enables the lower-regime checks
    std::vector<CouplingKind> coupling_kinds{CouplingKind::PaperIndependent,
                                             CouplingKind::CommonUniform};
};

struct ExactCheckReport {
    std::string name;
    std::size_t n = 0;
    Params params;
    RegimeReport regime;
    double stationary_residual = 0.0;
    double kernel_row_error = 0.0;

    std::optional<std::size_t> tmix;
    std::optional<TheoremBounds> bounds;
    std::optional<bool> upper_bound_holds;
    std::optional<bool> lower_bound_holds; // only when the lower bound is positive

    DistanceProfile profile;
    std::optional<bool> sandwich_holds;
    std::optional<bool> d_nonincreasing;

    std::optional<ContractionCheck> contraction;
    std::optional<SecondMomentCheck> second_moment;
    std::vector<std::pair<CouplingKind, CouplingInequalityCheck>> coupling;

    std::vector<std::string> failures;
    bool pass() const { return failures.empty(); }
};

ExactCheckReport run_exact_checks(const std::string& name, const MultiGraph& g,
                                  const Params& params, const ExactCheckOptions& opts);
std::string to_json(const ExactCheckReport& r);
CsvTable profile_csv(const ExactCheckReport& r);

struct BatteryInstance {
    std::string name;
    MultiGraph graph;
    Params params;
    std::optional<double> alpha;
};

// Edgeless/path/cycle/star graphs for n = 2..6 under the upper-regime recipe,
// plus the lower-regime instances (n=6, alpha=3) and (n=10, alpha=3).
std::vector<BatteryInstance> default_battery();

// kappa = 1/(8(n-1)), a = 1 - kappa/2, lambda = kappa/(4 max_degree) (0 if edgeless).
Params upper_regime_recipe(const MultiGraph& g);

} // namespace nsis

#include "nsis/experiments.hpp"

#include "nsis/errors.hpp"
#include "nsis/format.hpp"
#include "nsis/parallel.hpp"
#include "nsis/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nsis {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// CSV

void CsvTable::add_row(std::vector<std::string> cells)
{
    if (cells.size() != columns.size())
        throw input_error("csv row has " + std::to_string(cells.size()) + " cells, expected " +
                          std::to_string(columns.size()));
    rows.push_back(std::move(cells));
}

std::string CsvTable::to_string() const
{
    std::string out;
    for (const auto& [k, v] : provenance)
        out += "# " + k + "=" + v + "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
        out += (i ? "," : "") + columns[i];
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out += (i ? "," : "") + row[i];
        out += '\n';
    }
    return out;
}

void CsvTable::write(const std::filesystem::path& path) const
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw input_error("cannot write " + path.string());
    out << to_string();
}

CsvTable CsvTable::parse(std::string_view text)
{
    CsvTable t;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header = false;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cur;
        for (char c : s) {
            if (c == ',') {
                cells.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        cells.push_back(cur);
        return cells;
    };
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        if (line.rfind("# ", 0) == 0) {
            const auto eq = line.find('=');
            if (eq != std::string::npos)
                t.provenance.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
            continue;
        }
        if (!header) {
            t.columns = split(line);
            header = true;
        } else {
            t.add_row(split(line));
        }
    }
    return t;
}

std::string cell(double v)
{
    return format_double(v);
}

std::string cell(std::uint64_t v)
{
    return std::to_string(v);
}

// ---------------------------------------------------------------------------
// Configuration

std::string_view to_string(GraphFamily f)
{
    switch (f) {
    case GraphFamily::Empty: return "empty";
    case GraphFamily::ErdosRenyi: return "er";
    case GraphFamily::Regular: return "regular";
    case GraphFamily::GwBinomial: return "gw-binomial";
    case GraphFamily::GwPoisson: return "gw-poisson";
    case GraphFamily::File: return "file";
    }
    return "?";
}

GraphFamily parse_graph_family(std::string_view text)
{
    for (GraphFamily f : {GraphFamily::Empty, GraphFamily::ErdosRenyi, GraphFamily::Regular,
                          GraphFamily::GwBinomial, GraphFamily::GwPoisson, GraphFamily::File})
        if (text == to_string(f))
            return f;
    throw input_error("unknown graph family '" + std::string(text) + "'");
}

void ExperimentConfig::validate() const
{
    if (n_grid.empty())
        throw input_error("n_grid must not be empty");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] < 2)
            throw input_error("every n in n_grid must be >= 2");
        if (i > 0 && n_grid[i] <= n_grid[i - 1])
            throw input_error("n_grid must be strictly increasing");
    }
    if (replicas == 0)
        throw input_error("replicas must be >= 1");
    if (!(eps > 0.0 && eps < 1.0))
        throw input_error("eps must satisfy 0 < eps < 1");
    if (fixed_params)
        fixed_params->validate();
}

std::string ExperimentConfig::recipe_description() const
{
    if (fixed_params)
        return "fixed a=" + format_double(fixed_params->a) +
               " lambda=" + format_double(fixed_params->lambda) +
               " kappa=" + format_double(fixed_params->kappa);
    std::string lambda;
    switch (family) {
    case GraphFamily::Empty: lambda = "0"; break;
    case GraphFamily::ErdosRenyi:
    case GraphFamily::GwBinomial: lambda = "1/(n^(1+alpha)*p)"; break;
    case GraphFamily::Regular: lambda = "1/(d*n^alpha)"; break;
    case GraphFamily::GwPoisson: lambda = "log(log(n))/(n^alpha*log(n))"; break;
    case GraphFamily::File: lambda = "n^-alpha/(2*max_degree)"; break;
    }
    return "kappa(n)=1/(8(n-1)); a(n)=1-kappa(n)/2; lambda(n)=" + lambda +
           "; alpha=" + format_double(alpha);
}

MultiGraph make_family_graph(const ExperimentConfig& cfg, std::size_t n)
{
    const std::uint64_t seed = stream_seed(cfg.seed, n);
    switch (cfg.family) {
    case GraphFamily::Empty: return MultiGraph::edgeless(n);
    case GraphFamily::ErdosRenyi: return gen_erdos_renyi(n, cfg.er_p, seed);
    case GraphFamily::Regular: return gen_regular_multigraph(n, cfg.degree, seed);
    case GraphFamily::GwBinomial:
        return gen_galton_watson(OffspringLaw::binomial(cfg.binomial_m, cfg.binomial_p), n, seed).first;
    case GraphFamily::GwPoisson:
        return gen_galton_watson(OffspringLaw::poisson(cfg.poisson_theta), n, seed).first;
    case GraphFamily::File: {
        MultiGraph g = read_graph_file(cfg.graph_file);
        if (g.num_vertices() != n)
            throw input_error("graph file has n=" + std::to_string(g.num_vertices()) +
                              ", grid asks for n=" + std::to_string(n));
        return g;
    }
    }
    throw input_error("unknown graph family");
}

Params recipe_params(const ExperimentConfig& cfg, std::size_t n, std::size_t max_degree)
{
    if (cfg.fixed_params)
        return *cfg.fixed_params;
    if (n < 2)
        throw input_error("recipe needs n >= 2");
    const double nn = static_cast<double>(n);
    Params p;
    p.kappa = 1.0 / (8.0 * (nn - 1.0));
    p.a = 1.0 - p.kappa / 2.0;
    const double na = std::pow(nn, cfg.alpha);
    switch (cfg.family) {
    case GraphFamily::Empty: p.lambda = 0.0; break;
    case GraphFamily::ErdosRenyi: p.lambda = 1.0 / (nn * na * cfg.er_p); break;
    case GraphFamily::GwBinomial: p.lambda = 1.0 / (nn * na * cfg.binomial_p); break;
    case GraphFamily::Regular: p.lambda = 1.0 / (static_cast<double>(cfg.degree) * na); break;
    case GraphFamily::GwPoisson: p.lambda = std::log(std::log(nn)) / (na * std::log(nn)); break;
    case GraphFamily::File:
        p.lambda = max_degree == 0 ? 0.0 : 1.0 / (na * 2.0 * static_cast<double>(max_degree));
        break;
    }
    return p;
}

// ---------------------------------------------------------------------------
// Scaling

FitResult fit_nlogn(const std::vector<std::pair<double, double>>& points)
{
    if (points.empty())
        throw input_error("fit_nlogn needs at least one point");
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (const auto& [n, t] : points) {
        if (n < 2.0)
            throw input_error("fit_nlogn needs n >= 2");
        const double x = n * std::log(n);
        sxy += x * t;
        sxx += x * x;
        syy += t * t;
    }
    FitResult f;
    f.c = sxy / sxx;
    double ss_res = 0.0;
    for (const auto& [n, t] : points) {
        const double r = t - f.c * n * std::log(n);
        f.residuals.push_back(r);
        ss_res += r * r;
    }
    f.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    return f;
}

ScalingResult scaling_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    ScalingResult res;
    std::vector<std::pair<double, double>> points;
    for (const std::size_t n : cfg.n_grid) {
        ScalingRow row;
        row.n = n;
        try {
            const MultiGraph g = make_family_graph(cfg, n);
            row.max_degree = g.max_degree();
            row.params = recipe_params(cfg, n, row.max_degree);
            row.params.validate();
            const RegimeReport regime = check_regime(g, row.params, cfg.alpha);
            row.lower_regime = regime.regime_lower;
            if (!*regime.p_star_ok)
                throw config_error("p* = " + format_double(*regime.p_star) + " >= 1");
            if (!regime.regime_upper)
                throw precondition_error("upper regime violated: " + regime.upper_failure);
            const TheoremBounds b = theorem_bounds(g, row.params, cfg.eps);
            row.theorem_upper = b.upper;
            row.theorem_lower = b.lower;
            row.lower_vacuous = b.lower_vacuous;
            const TmixEstimate est =
                tmix_upper_estimate(g, row.params, cfg.kind, cfg.eps, cfg.replicas,
                                    stream_seed(cfg.seed, (std::uint64_t{1} << 48) + n),
                                    cfg.step_budget);
            row.t_hat = est.t_hat;
            row.t_low = est.t_low;
            points.emplace_back(static_cast<double>(n), static_cast<double>(est.t_hat));
            if (static_cast<double>(row.t_hat) > row.theorem_upper)
                res.all_within_upper = false;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        res.rows.push_back(std::move(row));
    }
    if (!points.empty())
        res.fit = fit_nlogn(points);
    return res;
}

namespace {

void add_common_provenance(CsvTable& t, const ExperimentConfig& cfg)
{
    t.provenance.emplace_back("seed", std::to_string(cfg.seed));
    t.provenance.emplace_back("family", std::string(to_string(cfg.family)));
    t.provenance.emplace_back("recipe", cfg.recipe_description());
    t.provenance.emplace_back("eps", format_double(cfg.eps));
    t.provenance.emplace_back("replicas", std::to_string(cfg.replicas));
    t.provenance.emplace_back("coupling", std::string(to_string(cfg.kind)));
}

json params_json(const Params& p)
{
    return json{{"a", p.a}, {"lambda", p.lambda}, {"kappa", p.kappa}};
}

json opt(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

json fit_json(const FitResult& f)
{
    return json{{"c", f.c}, {"r_squared", f.r_squared}, {"residuals", f.residuals}};
}

} // namespace

CsvTable scaling_table(const ExperimentConfig& cfg, const ScalingResult& r)
{
    CsvTable t;
    add_common_provenance(t, cfg);
    t.columns = {"n", "a", "lambda", "kappa", "max_degree", "t_hat", "t_low",
                 "theorem_upper", "theorem_lower", "lower_regime", "error"};
    for (const ScalingRow& row : r.rows) {
        std::string err = row.error;
        std::replace(err.begin(), err.end(), ',', ';');
        t.add_row({cell(std::uint64_t{row.n}), cell(row.params.a), cell(row.params.lambda),
                   cell(row.params.kappa), cell(std::uint64_t{row.max_degree}),
                   cell(row.t_hat), cell(row.t_low), cell(row.theorem_upper),
                   cell(row.theorem_lower), row.lower_regime ? "1" : "0", err});
    }
    return t;
}

std::string scaling_json(const ExperimentConfig& cfg, const ScalingResult& r)
{
    json j;
    j["seed"] = cfg.seed;
    j["family"] = std::string(to_string(cfg.family));
    j["recipe"] = cfg.recipe_description();
    j["eps"] = cfg.eps;
    j["replicas"] = cfg.replicas;
    j["coupling"] = std::string(to_string(cfg.kind));
    json rows = json::array();
    for (const ScalingRow& row : r.rows) {
        json o{{"n", row.n},
               {"params", params_json(row.params)},
               {"max_degree", row.max_degree}};
        if (row.error.empty()) {
            o["t_hat"] = row.t_hat;
            o["ci"] = json::array({row.t_low, row.t_hat});
            o["theorem_upper"] = row.theorem_upper;
            o["theorem_lower"] = row.theorem_lower;
            o["theorem_lower_vacuous"] = row.lower_vacuous;
            o["lower_regime"] = row.lower_regime;
        } else {
            o["error"] = row.error;
        }
        rows.push_back(std::move(o));
    }
    j["rows"] = std::move(rows);
    j["fit"] = r.fit ? fit_json(*r.fit) : json(nullptr);
    j["all_within_theorem_upper"] = r.all_within_upper;
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// Concentration

DegreeConcentrationReport degree_concentration_experiment(std::size_t n, double p,
                                                          std::size_t graphs, std::uint64_t seed,
                                                          std::vector<double> deltas)
{
    const double np = static_cast<double>(n) * p;
    if (!(np >= 20.0))
        throw precondition_error("degree concentration needs n*p >= 20 (got " + format_double(np) + ")");
    if (graphs == 0)
        throw input_error("graphs must be >= 1");
    for (double d : deltas)
        if (!(d > 0.0 && d < 1.0))
            throw input_error("delta must lie in the open interval (0, 1) (got " + format_double(d) + ")");

    DegreeConcentrationReport r;
    r.n = n;
    r.p = p;
    r.graphs = graphs;
    r.seed = seed;
    r.max_degree.resize(graphs);
    r.min_degree.resize(graphs);
    // per graph, per delta: (all in band, fraction outside)
    std::vector<std::vector<std::pair<bool, double>>> per_graph(graphs);
    parallel_for(graphs, [&](std::size_t i) {
        const MultiGraph g = gen_erdos_renyi(n, p, stream_seed(seed, i));
        std::size_t lo = g.degree(0), hi = 0;
        for (vertex_t x = 0; x < n; ++x) {
            lo = std::min(lo, g.degree(x));
            hi = std::max(hi, g.degree(x));
        }
        r.max_degree[i] = hi;
        r.min_degree[i] = lo;
        for (double delta : deltas) {
            std::size_t outside = 0;
            for (vertex_t x = 0; x < n; ++x) {
                const double deg = static_cast<double>(g.degree(x));
                if (!(deg > (1.0 - delta) * np && deg < (1.0 + delta) * np))
                    ++outside;
            }
            per_graph[i].emplace_back(outside == 0,
                                      static_cast<double>(outside) / static_cast<double>(n));
        }
    });

    const double G = static_cast<double>(graphs);
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        DeltaBand b;
        b.delta = deltas[k];
        double in_band = 0.0, sum = 0.0, sum_sq = 0.0;
        for (const auto& pg : per_graph) {
            in_band += pg[k].first ? 1.0 : 0.0;
            sum += pg[k].second;
            sum_sq += pg[k].second * pg[k].second;
        }
        b.all_in_band = in_band / G;
        b.all_in_band_stderr = std::sqrt(b.all_in_band * (1.0 - b.all_in_band) / G);
        const double tail = std::exp(-b.delta * b.delta * np / 3.0);
        b.union_bound = 1.0 - 2.0 * static_cast<double>(n) * tail;
        b.pass = b.all_in_band >= b.union_bound - 5.0 * b.all_in_band_stderr;
        b.vertex_outside = sum / G;
        const double var = G > 1 ? std::max(0.0, (sum_sq - G * b.vertex_outside * b.vertex_outside) / (G - 1.0)) : 0.0;
        b.vertex_outside_stderr = std::sqrt(var / G);
        b.vertex_bound = 2.0 * tail;
        b.vertex_pass = b.vertex_outside <= b.vertex_bound + 5.0 * b.vertex_outside_stderr;
        r.bands.push_back(b);
    }
    return r;
}

SelfLoopReport selfloop_experiment(std::size_t n, std::size_t d, std::size_t graphs,
                                   std::uint64_t seed, std::vector<double> deltas)
{
    if ((n * d) % 2 != 0)
        throw input_error("self-loop experiment needs n*d even");
    if (graphs == 0)
        throw input_error("graphs must be >= 1");
    std::vector<double> loops(graphs);
    parallel_for(graphs, [&](std::size_t i) {
        loops[i] = static_cast<double>(count_self_loops(gen_regular_multigraph(n, d, stream_seed(seed, i))));
    });

    SelfLoopReport r;
    r.n = n;
    r.d = d;
    r.graphs = graphs;
    r.seed = seed;
    const double nd = static_cast<double>(n * d);
    r.target = (static_cast<double>(d) - 1.0) / 2.0;
    r.exact_mean = static_cast<double>(n) * static_cast<double>(d) * (static_cast<double>(d) - 1.0) /
                   (2.0 * (nd - 1.0));
    const double G = static_cast<double>(graphs);
    double sum = 0.0, sum_sq = 0.0;
    for (double s : loops) {
        sum += s;
        sum_sq += s * s;
    }
    r.mean = sum / G;
    r.sd = G > 1 ? std::sqrt(std::max(0.0, (sum_sq - G * r.mean * r.mean) / (G - 1.0))) : 0.0;
    r.stderr_mean = r.sd / std::sqrt(G);
    r.within_3sigma = std::abs(r.mean - r.target) <= 3.0 * r.stderr_mean;
    for (double delta : deltas) {
        SelfLoopTail t;
        t.delta = delta;
        t.frequency = static_cast<double>(std::count_if(loops.begin(), loops.end(), [&](double s) {
                          return std::abs(s - r.target) >= delta;
                      })) / G;
        t.bound = 2.0 * std::exp(-2.0 * delta * delta / static_cast<double>(n));
        r.tails.push_back(t);
    }
    return r;
}

PoissonMaxDegreeReport poisson_max_degree_experiment(std::size_t n, double theta,
                                                     std::size_t draws, std::uint64_t seed)
{
    if (n < 16)
        throw input_error("log log n scaling needs n >= 16");
    if (draws == 0)
        throw input_error("draws must be >= 1");
    const OffspringLaw law = OffspringLaw::poisson(theta);
    std::vector<double> scaled(draws);
    const double nn = static_cast<double>(n);
    const double factor = std::log(std::log(nn)) / std::log(nn);
    parallel_for(draws, [&](std::size_t i) {
        const auto [g, meta] = gen_galton_watson(law, n, stream_seed(seed, i));
        scaled[i] = static_cast<double>(meta.max_children) * factor;
    });
    std::sort(scaled.begin(), scaled.end());
    PoissonMaxDegreeReport r;
    r.n = n;
    r.theta = theta;
    r.draws = draws;
    r.median_scaled = draws % 2 ? scaled[draws / 2] : 0.5 * (scaled[draws / 2 - 1] + scaled[draws / 2]);
    r.in_sanity_band = r.median_scaled >= 0.3 && r.median_scaled <= 3.0;
    return r;
}

std::string to_json(const DegreeConcentrationReport& r)
{
    json bands = json::array();
    for (const DeltaBand& b : r.bands)
        bands.push_back({{"delta", b.delta},
                         {"all_in_band", b.all_in_band},
                         {"all_in_band_stderr", b.all_in_band_stderr},
                         {"union_bound", b.union_bound},
                         {"pass", b.pass},
                         {"vertex_outside", b.vertex_outside},
                         {"vertex_outside_stderr", b.vertex_outside_stderr},
                         {"vertex_bound", b.vertex_bound},
                         {"vertex_pass", b.vertex_pass}});
    json j{{"experiment", "degree-concentration"},
           {"n", r.n},
           {"p", r.p},
           {"graphs", r.graphs},
           {"seed", r.seed},
           {"max_degree", r.max_degree},
           {"min_degree", r.min_degree},
           {"bands", bands}};
    return j.dump(2);
}

std::string to_json(const SelfLoopReport& r)
{
    json tails = json::array();
    for (const SelfLoopTail& t : r.tails)
        tails.push_back({{"delta", t.delta}, {"frequency", t.frequency}, {"bound", t.bound}});
    json j{{"experiment", "self-loops"},
           {"n", r.n},
           {"d", r.d},
           {"graphs", r.graphs},
           {"seed", r.seed},
           {"target", r.target},
           {"exact_mean", r.exact_mean},
           {"mean", r.mean},
           {"sd", r.sd},
           {"stderr_mean", r.stderr_mean},
           {"within_3sigma", r.within_3sigma},
           {"tails", tails}};
    return j.dump(2);
}

std::string to_json(const PoissonMaxDegreeReport& r)
{
    json j{{"experiment", "poisson-max-degree"},
           {"n", r.n},
           {"theta", r.theta},
           {"draws", r.draws},
           {"median_scaled", r.median_scaled},
           {"in_sanity_band", r.in_sanity_band}};
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// Regimes

std::vector<RegimeTableRow> regime_table(const std::vector<std::size_t>& n_grid,
                                         const std::vector<double>& alpha_grid,
                                         std::size_t max_degree)
{
    std::vector<RegimeTableRow> out;
    for (const std::size_t n : n_grid) {
        if (n < 2)
            throw input_error("regime table needs n >= 2");
        const double nn = static_cast<double>(n);
        for (const double alpha : alpha_grid) {
            RegimeTableRow row;
            row.n = n;
            row.alpha = alpha;
            row.alpha_threshold = alpha_threshold(n);
            row.kappa_low = std::pow(nn, -alpha);
            row.kappa_high = 1.0 / (4.0 * (nn - 1.0) * (nn - 1.0));
            row.feasible = alpha > 1.0 && row.kappa_low < row.kappa_high;
            if (row.feasible) {
                const double mid = 0.5 * (row.kappa_low + row.kappa_high);
                const double scale = std::pow(10.0, std::floor(std::log10(mid)));
                double kappa = std::round(mid / scale) * scale;
                if (!(kappa > row.kappa_low && kappa < row.kappa_high))
                    kappa = mid;
                Params p;
                p.kappa = kappa;
                p.a = 1.0 - row.kappa_low / 2.0;
                p.lambda = max_degree == 0 ? 0.0
                                           : row.kappa_low / (4.0 * static_cast<double>(max_degree));
                const RegimeReport rep = check_regime(p, n, alpha);
                const double ps = p.a + p.lambda * static_cast<double>(max_degree);
                row.suggestion = p;
                row.suggestion_valid = rep.regime_lower && ps < 1.0 &&
                                       p.lambda * static_cast<double>(max_degree) < row.kappa_low;
            }
            out.push_back(row);
        }
    }
    return out;
}

CsvTable regime_csv(const std::vector<RegimeTableRow>& rows, std::size_t max_degree)
{
    CsvTable t;
    t.provenance.emplace_back("max_degree", std::to_string(max_degree));
    t.columns = {"n", "alpha", "alpha_threshold", "kappa_low", "kappa_high", "feasible",
                 "kappa", "a", "lambda", "suggestion_valid"};
    for (const RegimeTableRow& r : rows) {
        const bool s = r.suggestion.has_value();
        t.add_row({cell(std::uint64_t{r.n}), cell(r.alpha), cell(r.alpha_threshold),
                   cell(r.kappa_low), cell(r.kappa_high), r.feasible ? "1" : "0",
                   s ? cell(r.suggestion->kappa) : "", s ? cell(r.suggestion->a) : "",
                   s ? cell(r.suggestion->lambda) : "", r.suggestion_valid ? "1" : "0"});
    }
    return t;
}

// ---------------------------------------------------------------------------
// Exact battery

Params upper_regime_recipe(const MultiGraph& g)
{
    const double n = static_cast<double>(g.num_vertices());
    if (n < 2)
        throw input_error("upper regime recipe needs n >= 2");
    Params p;
    p.kappa = 1.0 / (8.0 * (n - 1.0));
    p.a = 1.0 - p.kappa / 2.0;
    p.lambda = g.max_degree() == 0 ? 0.0 : p.kappa / (4.0 * static_cast<double>(g.max_degree()));
    return p;
}

ExactCheckReport run_exact_checks(const std::string& name, const MultiGraph& g,
                                  const Params& params, const ExactCheckOptions& opts)
{
    ExactCheckReport r;
    r.name = name;
    r.n = g.num_vertices();
    r.params = params;
    const std::size_t n = r.n;

    const Kernel k = build_kernel(g, params);
    r.kernel_row_error = k.max_row_sum_error();
    if (r.kernel_row_error > kRowSumTolerance)
        r.failures.push_back("kernel row sums");
    const DistributionVector pi = stationary(k);
    r.stationary_residual = stationary_residual(k, pi);

    if (n >= 2) {
        r.regime = check_regime(g, params, opts.alpha);
    } else {
        r.regime.n = n;
        r.regime.gamma = gamma_const(params, n);
    }

    if (r.regime.gamma > 0.0) {
        r.bounds = theorem_bounds(g, params, opts.eps);
    }

    if (n <= 10) {
        r.tmix = exact_tmix(k, pi, opts.eps);
        std::size_t horizon = *r.tmix + 5;
        if (r.bounds)
            horizon = std::max<std::size_t>(horizon, static_cast<std::size_t>(std::ceil(r.bounds->upper)));
        r.profile = distance_profile(k, pi, horizon, true);
        bool sandwich = true, monotone = true;
        for (std::size_t t = 0; t < r.profile.d.size(); ++t) {
            const double d = r.profile.d[t], db = r.profile.dbar[t];
            if (d > db + 1e-12 || db > 2.0 * d + 1e-12)
                sandwich = false;
            if (t > 0 && d > r.profile.d[t - 1] + 1e-12)
                monotone = false;
        }
        r.sandwich_holds = sandwich;
        r.d_nonincreasing = monotone;
        if (!sandwich)
            r.failures.push_back("d <= dbar <= 2d");
        if (!monotone)
            r.failures.push_back("d nonincreasing");
        if (r.bounds && r.regime.regime_upper) {
            r.upper_bound_holds = static_cast<double>(*r.tmix) <= r.bounds->upper;
            if (!*r.upper_bound_holds)
                r.failures.push_back("mixing-time upper bound");
        }
        if (r.bounds && r.regime.regime_lower && !r.bounds->lower_vacuous) {
            r.lower_bound_holds = static_cast<double>(*r.tmix) >= r.bounds->lower;
            if (!*r.lower_bound_holds)
                r.failures.push_back("mixing-time lower bound");
        }
    }

    if (n >= 2 && n <= kMaxCoupledKernelVertices) {
        if (r.regime.regime_upper) {
            r.contraction = exact_contraction_check(g, params);
            if (!r.contraction->pass)
                r.failures.push_back("contraction upper");
            if (!r.contraction->lower_pass)
                r.failures.push_back("contraction lower");
            r.second_moment = exact_second_moment_check(g, params, CouplingKind::PaperIndependent,
                                                        opts.t_max, opts.alpha);
            if (!r.second_moment->pass)
                r.failures.push_back("second moment");
            if (r.second_moment->variance_checked && !r.second_moment->variance_pass)
                r.failures.push_back("variance bound");
        }
    }
    if (n <= kMaxCoupledKernelVertices) {
        for (CouplingKind kind : opts.coupling_kinds) {
            auto c = coupling_inequality_check(g, params, kind, opts.t_max);
            if (!c.pass)
                r.failures.push_back("coupling inequality (" + std::string(to_string(kind)) + ")");
            r.coupling.emplace_back(kind, std::move(c));
        }
    }
    return r;
}

std::string to_json(const ExactCheckReport& r)
{
    json j;
    j["name"] = r.name;
    j["n"] = r.n;
    j["params"] = params_json(r.params);
    j["regime"] = {{"gamma", r.regime.gamma},
                   {"beta", opt(r.regime.beta)},
                   {"p_star", opt(r.regime.p_star)},
                   {"regime_upper", r.regime.regime_upper},
                   {"regime_lower", r.regime.regime_lower},
                   {"alpha", opt(r.regime.alpha)},
                   {"feasible_alpha_min", opt(r.regime.feasible_alpha_min)},
                   {"upper_failure", r.regime.upper_failure},
                   {"lower_failure", r.regime.lower_failure}};
    j["residuals"] = {{"stationary", r.stationary_residual}, {"kernel_row_sum", r.kernel_row_error}};
    if (r.tmix)
        j["tmix"] = *r.tmix;
    if (r.bounds)
        j["bounds"] = {{"upper", r.bounds->upper},
                       {"lower", r.bounds->lower},
                       {"lower_vacuous", r.bounds->lower_vacuous},
                       {"upper_holds", r.upper_bound_holds ? json(*r.upper_bound_holds) : json(nullptr)},
                       {"lower_holds", r.lower_bound_holds ? json(*r.lower_bound_holds) : json(nullptr)}};
    if (r.sandwich_holds)
        j["sandwich"] = {{"pass", *r.sandwich_holds}, {"d_nonincreasing", *r.d_nonincreasing}};
    if (r.contraction) {
        const auto& c = *r.contraction;
        j["contraction"] = {{"max_adjacent", c.max_adjacent},
                            {"bound", c.upper_bound},
                            {"pass", c.pass},
                            {"min_adjacent", c.min_adjacent},
                            {"lower_bound", c.lower_bound},
                            {"lower_pass", c.lower_pass}};
    }
    if (r.second_moment) {
        const auto& s = *r.second_moment;
        double worst_var = 0.0;
        for (const auto& row : s.rows)
            worst_var = std::max(worst_var, row.variance);
        j["second_moment"] = {{"pass", s.pass},
                              {"all_pairs_pass", s.all_pairs_pass},
                              {"max_violation", s.max_violation},
                              {"t_max", s.rows.empty() ? 0 : s.rows.back().t},
                              {"variance_bound", s.variance_bound},
                              {"max_variance", worst_var},
                              {"variance_checked", s.variance_checked},
                              {"variance_pass", s.variance_pass}};
    }
    if (!r.contraction || !r.second_moment) {
        std::string why;
        if (r.n > kMaxCoupledKernelVertices)
            why = "n exceeds the coupled-kernel limit";
        else if (r.n < 2)
            why = "needs n >= 2";
        else
            why = "upper regime violated: " + r.regime.upper_failure;
        if (!r.contraction)
            j["contraction"] = {{"skipped", why}};
        if (!r.second_moment)
            j["second_moment"] = {{"skipped", why}};
    }
    json coupling = json::array();
    for (const auto& [kind, c] : r.coupling)
        coupling.push_back({{"kind", std::string(to_string(kind))}, {"pass", c.pass}, {"max_gap", c.max_gap}});
    j["coupling_inequality"] = coupling;
    j["failures"] = r.failures;
    j["pass"] = r.pass();
    return j.dump(2);
}

CsvTable profile_csv(const ExactCheckReport& r)
{
    CsvTable t;
    t.provenance.emplace_back("instance", r.name);
    t.provenance.emplace_back("a", format_double(r.params.a));
    t.provenance.emplace_back("lambda", format_double(r.params.lambda));
    t.provenance.emplace_back("kappa", format_double(r.params.kappa));
    t.columns = {"t", "d", "dbar"};
    for (std::size_t i = 0; i < r.profile.d.size(); ++i)
        t.add_row({cell(std::uint64_t{i}), cell(r.profile.d[i]),
                   i < r.profile.dbar.size() ? cell(r.profile.dbar[i]) : ""});
    return t;
}

std::vector<BatteryInstance> default_battery()
{
    std::vector<BatteryInstance> out;
    for (std::size_t n = 2; n <= 6; ++n) {
        const std::pair<std::string, MultiGraph> graphs[] = {
            {"edgeless", MultiGraph::edgeless(n)},
            {"path", MultiGraph::path(n)},
            {"cycle", MultiGraph::cycle(n)},
            {"star", MultiGraph::star(n)},
        };
        for (const auto& [name, g] : graphs)
            out.push_back({name + "-" + std::to_string(n), g, upper_regime_recipe(g), std::nullopt});
    }
    out.push_back({"path-6-lower", MultiGraph::path(6), Params{0.998, 1e-4, 0.006}, 3.0});
    out.push_back({"path-10-lower", MultiGraph::path(10), Params{0.9995, 1e-4, 0.002}, 3.0});
    return out;
}

} // namespace nsis

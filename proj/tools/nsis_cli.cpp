// nsis: command-line front end for the noisy SIS toolkit.
//
// Exit status: 0 when every check passes, 1 when a check fails or a run
// aborts, 2 on usage or input errors.

#include "nsis/coupling.hpp"
#include "nsis/errors.hpp"
#include "nsis/exact.hpp"
#include "nsis/experiments.hpp"
#include "nsis/format.hpp"
#include "nsis/graph.hpp"
#include "nsis/random_graphs.hpp"
#include "nsis/rng.hpp"
#include "nsis/sis.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace nsis;
using json = nlohmann::ordered_json;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

// Writes to <prefix><suffix>, or to stdout when no prefix was given.
void emit(const std::string& prefix, const std::string& suffix, const std::string& content)
{
    if (prefix.empty()) {
        std::cout << content;
        if (!content.empty() && content.back() != '\n')
            std::cout << '\n';
        return;
    }
    const std::string path = prefix + suffix;
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw input_error("cannot write " + path);
    out << content;
    if (!content.empty() && content.back() != '\n')
        out << '\n';
}

struct ParamFlags {
    double a = 0.0;
    double lambda = 0.0;
    double kappa = 0.0;

    void add(CLI::App* cmd, bool required = true)
    {
        auto* oa = cmd->add_option("--a", a, "external infection probability");
        auto* ol = cmd->add_option("--lambda", lambda, "per-neighbour infection rate");
        auto* ok = cmd->add_option("--kappa", kappa, "recovery probability");
        if (required) {
            oa->required();
            ol->required();
            ok->required();
        }
    }
    Params params() const
    {
        Params p{a, lambda, kappa};
        p.validate();
        return p;
    }
};

Configuration initial_configuration(const std::string& init, std::size_t n, std::uint64_t seed)
{
    if (init == "all0")
        return Configuration::all_susceptible(n);
    if (init == "all1")
        return Configuration::all_infected(n);
    rng_t rng = make_stream(seed, 1);
    Configuration c(n);
    for (vertex_t x = 0; x < n; ++x)
        c.set(x, uniform01(rng) < 0.5);
    return c;
}

// ---------------------------------------------------------------------------

struct GenGraphCmd {
    std::string family;
    std::size_t n = 0;
    double p = 0.1;
    std::size_t d = 3;
    std::uint32_t m = 4;
    double theta = 2.0;
    std::uint64_t seed = 1;
    std::string out;

    void add(CLI::App& app)
    {
        auto* c = app.add_subcommand("gen-graph", "generate a graph in edge-list format");
        c->add_option("--family", family, "er|regular|gw-binomial|gw-poisson|edgeless|path|cycle|star")
            ->required()
            ->check(CLI::IsMember({"er", "regular", "gw-binomial", "gw-poisson", "edgeless", "path",
                                   "cycle", "star"}));
        c->add_option("--n", n, "number of vertices")->required();
        c->add_option("--p", p, "edge probability (er) or offspring p (gw-binomial)");
        c->add_option("--d", d, "degree (regular)");
        c->add_option("--m", m, "binomial offspring trials (gw-binomial)");
        c->add_option("--theta", theta, "Poisson offspring mean (gw-poisson)");
        c->add_option("--seed", seed, "seed");
        c->add_option("--out", out, "output prefix: <out>.graph and <out>.json");
        c->callback([this] { code = run(); });
    }

    int code = kExitPass;

    int run()
    {
        json side{{"family", family}, {"n", n}, {"seed", seed}};
        std::optional<MultiGraph> g;
        if (family == "er") {
            g = gen_erdos_renyi(n, p, seed);
            side["p"] = p;
        } else if (family == "regular") {
            g = gen_regular_multigraph(n, d, seed);
            side["d"] = d;
            side["self_loops"] = count_self_loops(*g);
        } else if (family == "gw-binomial" || family == "gw-poisson") {
            const OffspringLaw law =
                family == "gw-binomial" ? OffspringLaw::binomial(m, p) : OffspringLaw::poisson(theta);
            auto [tree, meta] = gen_galton_watson(law, n, seed);
            g = std::move(tree);
            side["offspring_law"] = law.describe();
            side["gw_meta"] = {{"generation_sizes", meta.generation_sizes},
                               {"restarts", meta.restarts},
                               {"truncated", meta.truncated},
                               {"max_children", meta.max_children}};
        } else if (family == "edgeless") {
            g = MultiGraph::edgeless(n);
        } else if (family == "path") {
            g = MultiGraph::path(n);
        } else if (family == "cycle") {
            g = MultiGraph::cycle(n);
        } else {
            g = MultiGraph::star(n);
        }
        side["max_degree"] = g->max_degree();
        side["num_edges"] = g->num_edges();
        emit(out, ".graph", serialize_graph(*g));
        if (!out.empty())
            emit(out, ".json", side.dump(2));
        return kExitPass;
    }
};

struct SimulateCmd {
    std::string graph;
    ParamFlags pf;
    std::uint64_t steps = 0;
    std::size_t stride = 1;
    std::uint64_t seed = 1;
    std::string init = "all0";
    std::string out;
    int code = kExitPass;

    void add(CLI::App& app)
    {
        auto* c = app.add_subcommand("simulate", "run one trajectory; CSV t,infected_count");
        c->add_option("--graph", graph, "graph file")->required();
        pf.add(c);
        c->add_option("--steps", steps, "number of steps")->required();
        c->add_option("--stride", stride, "record every stride steps");
        c->add_option("--seed", seed, "seed");
        c->add_option("--init", init, "initial configuration")
            ->check(CLI::IsMember({"all0", "all1", "random"}));
        c->add_option("--out", out, "output prefix: <out>.csv");
        c->callback([this] { code = run(); });
    }

    int run()
    {
        const MultiGraph g = read_graph_file(graph);
        const Params params = pf.params();
        if (stride == 0)
            throw input_error("--stride must be >= 1");
        const Configuration s0 = initial_configuration(init, g.num_vertices(), seed);
        const Trajectory tr = run_chain(g, params, s0, steps, stride, seed);
        CsvTable t;
        t.provenance = {{"graph", graph}, {"a", format_double(params.a)},
                        {"lambda", format_double(params.lambda)},
                        {"kappa", format_double(params.kappa)}, {"seed", std::to_string(seed)},
                        {"init", init}, {"steps", std::to_string(steps)}};
        t.columns = {"t", "infected_count"};
        for (std::size_t k = 0; k < tr.infected_counts.size(); ++k)
            t.add_row({cell(std::uint64_t{k * stride}), cell(std::uint64_t{tr.infected_counts[k]})});
        emit(out, ".csv", t.to_string());
        return kExitPass;
    }
};

struct CoupleCmd {
    std::string graph;
    ParamFlags pf;
    std::string kind = "paper";
    std::string pair = "extremal";
    std::size_t replicas = 1000;
    std::uint64_t tmax = 1000;
    std::uint64_t seed = 1;
    std::string out;
    int code = kExitPass;

    void add(CLI::App& app)
    {
        auto* c = app.add_subcommand("couple", "coalescence survival curve; CSV t,survival,stderr");
        c->add_option("--graph", graph, "graph file")->required();
        pf.add(c);
        c->add_option("--kind", kind, "coupling")->check(CLI::IsMember({"paper", "common"}));
        c->add_option("--pair", pair, "extremal or random:K");
        c->add_option("--replicas", replicas, "coupled runs per pair");
        c->add_option("--tmax", tmax, "largest t reported");
        c->add_option("--seed", seed, "seed");
        c->add_option("--out", out, "output prefix: <out>.csv");
        c->callback([this] { code = run(); });
    }

    int run()
    {
        const MultiGraph g = read_graph_file(graph);
        const Params params = pf.params();
        const PairSpec spec = PairSpec::parse(pair);
        if (replicas == 0)
            throw input_error("--replicas must be >= 1");
        std::vector<std::uint64_t> grid(tmax + 1);
        for (std::uint64_t t = 0; t <= tmax; ++t)
            grid[t] = t;
        const auto curve = tail_curve(g, params, parse_coupling_kind(kind), spec, grid, replicas, seed);
        CsvTable t;
        t.provenance = {{"graph", graph}, {"a", format_double(params.a)},
                        {"lambda", format_double(params.lambda)},
                        {"kappa", format_double(params.kappa)}, {"kind", kind},
                        {"pair", spec.describe()}, {"replicas", std::to_string(replicas)},
                        {"seed", std::to_string(seed)}};
        t.columns = {"t", "survival", "stderr"};
        for (const SurvivalPoint& p : curve)
            t.add_row({cell(p.t), cell(p.survival), cell(p.std_error)});
        emit(out, ".csv", t.to_string());
        return kExitPass;
    }
};

struct ExactCmd {
    std::string graph;
    ParamFlags pf;
    double epsilon = 0.25;
    std::size_t tmax = 200;
    std::string coupled;
    std::optional<double> alpha;
    std::string out;
    int code = kExitPass;

    void add(CLI::App& app)
    {
        auto* c = app.add_subcommand("exact", "exact kernel checks on a small graph");
        c->add_option("--graph", graph, "graph file")->required();
        pf.add(c);
        c->add_option("--epsilon", epsilon, "mixing threshold");
        c->add_option("--tmax", tmax, "horizon for second-moment and coupling checks");
        c->add_option("--coupled", coupled, "restrict coupling checks to one kind")
            ->check(CLI::IsMember({"paper", "common"}));
        c->add_option("--alpha", alpha, "exponent enabling the lower-regime checks");
        c->add_option("--out", out, "output prefix: <out>.profile.csv and <out>.checks.json")
            ->required();
        c->callback([this] { code = run(); });
    }

    int run()
    {
        const MultiGraph g = read_graph_file(graph);
        const Params params = pf.params();
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw input_error("--epsilon must lie in (0, 1)");
        ExactCheckOptions opts;
        opts.eps = epsilon;
        opts.t_max = tmax;
        opts.alpha = alpha;
        if (!coupled.empty())
            opts.coupling_kinds = {parse_coupling_kind(coupled)};
        const ExactCheckReport r = run_exact_checks(graph, g, params, opts);
        emit(out, ".profile.csv", profile_csv(r).to_string());
        emit(out, ".checks.json", to_json(r));
        std::cout << (r.pass() ? "PASS" : "FAIL") << ' ' << graph << '\n';
        for (const std::string& f : r.failures)
            std::cout << "  failed: " << f << '\n';
        return r.pass() ? kExitPass : kExitFail;
    }
};

std::vector<std::size_t> parse_size_list(const std::string& text)
{
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, comma - pos);
        const double v = parse_double(item);
        if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::size_t>(v)))
            throw input_error("expected a non-negative integer, got '" + item + "'");
        out.push_back(static_cast<std::size_t>(v));
        pos = comma + 1;
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& text)
{
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        out.push_back(parse_double(text.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

struct ScalingCmd {
    ExperimentConfig cfg;
    std::string family = "empty";
    std::string n_grid = "100,200,400,800,1600";
    std::string kind = "paper";
    std::optional<double> a, lambda, kappa;
    std::optional<std::uint64_t> budget;
    std::string graph;
    std::string out;
    int code = kExitPass;

    void add(CLI::App& app)
    {
        auto* c = app.add_subcommand("scaling", "coupling-based mixing-time estimates over an n grid");
        c->add_option("--family", family, "empty|er|regular|gw-binomial|gw-poisson|file")
            ->check(CLI::IsMember({"empty", "er", "regular", "gw-binomial", "gw-poisson", "file"}));
        c->add_option("--n-grid", n_grid, "comma-separated, strictly increasing");
        c->add_option("--p", cfg.er_p, "er edge probability");
        c->add_option("--d", cfg.degree, "regular degree");
        c->add_option("--m", cfg.binomial_m, "gw-binomial trials");
        c->add_option("--q", cfg.binomial_p, "gw-binomial success probability");
        c->add_option("--theta", cfg.poisson_theta, "gw-poisson mean");
        c->add_option("--graph", graph, "graph file (family=file)");
        c->add_option("--alpha", cfg.alpha, "exponent in the lambda recipe");
        c->add_option("--a", a, "fixed a (with --lambda and --kappa replaces the recipe)");
        c->add_option("--lambda", lambda, "fixed lambda");
        c->add_option("--kappa", kappa, "fixed kappa");
        c->add_option("--epsilon", cfg.eps, "mixing threshold");
        c->add_option("--replicas", cfg.replicas, "coupled runs per n");
        c->add_option("--seed", cfg.seed, "seed");
        c->add_option("--kind", kind, "coupling")->check(CLI::IsMember({"paper", "common"}));
        c->add_option("--budget", budget, "step budget per coupled run");
        c->add_option("--out", out, "output prefix: <out>.csv and <out>.json");
        c->callback([this] { code = run(); });
    }

    int run()
    {
        cfg.family = parse_graph_family(family);
        cfg.n_grid = parse_size_list(n_grid);
        cfg.kind = parse_coupling_kind(kind);
        cfg.graph_file = graph;
        cfg.step_budget = budget;
        const int given = (a ? 1 : 0) + (lambda ? 1 : 0) + (kappa ? 1 : 0);
        if (given != 0 && given != 3)
            throw input_error("--a, --lambda and --kappa must be given together");
        if (given == 3)
            cfg.fixed_params = Params{*a, *lambda, *kappa};
        cfg.validate();
        const ScalingResult r = scaling_experiment(cfg);
        emit(out, ".csv", scaling_table(cfg, r).to_string());
        if (!out.empty())
            emit(out, ".json", scaling_json(cfg, r));
        bool ok = r.all_within_upper;
        for (const ScalingRow& row : r.rows) {
            if (!row.error.empty()) {
                std::cerr << "n=" << row.n << ": " << row.error << '\n';
                ok = false;
            }
        }
        if (r.fit)
            std::cerr << "fit: c=" << format_double(r.fit->c)
                      << " r2=" << format_double(r.fit->r_squared) << '\n';
        return ok ? kExitPass : kExitFail;
    }
};

struct VerifyCmd {
    std::string graph;
    ParamFlags pf;
    std::optional<double> alpha;
    double epsilon = 0.25;
    std::size_t tmax = 200;
    std::string out;
    int code = kExitPass;

    void add(CLI::App& app)
    {
        auto* c = app.add_subcommand("verify", "run the exact check battery");
        c->add_option("--graph", graph, "single graph file (default: built-in battery)");
        pf.add(c, false);
        c->add_option("--alpha", alpha, "exponent enabling the lower-regime checks");
        c->add_option("--epsilon", epsilon, "mixing threshold");
        c->add_option("--tmax", tmax, "horizon for second-moment and coupling checks");
        c->add_option("--out", out, "output prefix: <out>.json");
        c->callback([this] { code = run(); });
    }

    int run()
    {
        std::vector<BatteryInstance> battery;
        if (graph.empty()) {
            battery = default_battery();
        } else {
            MultiGraph g = read_graph_file(graph);
            const Params p = pf.a > 0.0 ? pf.params() : upper_regime_recipe(g);
            battery.push_back({graph, std::move(g), p, alpha});
        }
        json all = json::array();
        bool ok = true;
        for (const BatteryInstance& inst : battery) {
            ExactCheckOptions opts;
            opts.eps = epsilon;
            opts.t_max = tmax;
            opts.alpha = inst.alpha;
            const ExactCheckReport r = run_exact_checks(inst.name, inst.graph, inst.params, opts);
            std::cout << (r.pass() ? "PASS " : "FAIL ") << inst.name;
            if (r.tmix && r.bounds)
                std::cout << " tmix=" << *r.tmix << " upper=" << format_double(r.bounds->upper);
            std::cout << '\n';
            for (const std::string& f : r.failures)
                std::cout << "  failed: " << f << '\n';
            ok = ok && r.pass();
            all.push_back(json::parse(to_json(r)));
        }
        if (!out.empty())
            emit(out, ".json", all.dump(2));
        return ok ? kExitPass : kExitFail;
    }
};

struct RegimesCmd {
    std::string n_grid = "2,5,10,20,50,100";
    std::string alpha_grid = "1.5,2,3,4";
    std::size_t max_degree = 2;
    std::string out;
    int code = kExitPass;

    void add(CLI::App& app)
    {
        auto* c = app.add_subcommand("regimes", "feasibility table for the lower regime");
        c->add_option("--n-grid", n_grid, "comma-separated sizes");
        c->add_option("--alpha-grid", alpha_grid, "comma-separated exponents");
        c->add_option("--max-degree", max_degree, "maximum degree used for lambda");
        c->add_option("--out", out, "output prefix: <out>.csv");
        c->callback([this] { code = run(); });
    }

    int run()
    {
        const auto rows = regime_table(parse_size_list(n_grid), parse_double_list(alpha_grid), max_degree);
        emit(out, ".csv", regime_csv(rows, max_degree).to_string());
        for (const RegimeTableRow& r : rows)
            if (r.suggestion && !r.suggestion_valid)
                return kExitFail;
        return kExitPass;
    }
};

struct ConcentrationCmd {
    std::string experiment = "degree";
    std::size_t n = 1000;
    double p = 0.05;
    std::size_t d = 3;
    double theta = 2.0;
    std::size_t graphs = 100;
    std::uint64_t seed = 1;
    std::string out;
    int code = kExitPass;

    void add(CLI::App& app)
    {
        auto* c = app.add_subcommand("concentration", "random-graph concentration experiments");
        c->add_option("--experiment", experiment, "degree|selfloop|poisson-max")
            ->check(CLI::IsMember({"degree", "selfloop", "poisson-max"}));
        c->add_option("--n", n, "graph size");
        c->add_option("--p", p, "er edge probability");
        c->add_option("--d", d, "regular degree");
        c->add_option("--theta", theta, "Poisson offspring mean");
        c->add_option("--graphs", graphs, "number of draws");
        c->add_option("--seed", seed, "seed");
        c->add_option("--out", out, "output prefix: <out>.json");
        c->callback([this] { code = run(); });
    }

    int run()
    {
        bool ok = true;
        std::string text;
        if (experiment == "degree") {
            const auto r = degree_concentration_experiment(n, p, graphs, seed);
            for (const DeltaBand& b : r.bands)
                ok = ok && b.pass;
            text = to_json(r);
        } else if (experiment == "selfloop") {
            const auto r = selfloop_experiment(n, d, graphs, seed);
            ok = r.within_3sigma;
            text = to_json(r);
        } else {
            const auto r = poisson_max_degree_experiment(n, theta, graphs, seed);
            ok = r.in_sanity_band;
            text = to_json(r);
        }
        emit(out, ".json", text);
        return ok ? kExitPass : kExitFail;
    }
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"nsis: noisy SIS Markov chain toolkit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "help for every subcommand");

    GenGraphCmd gen;
    SimulateCmd sim;
    CoupleCmd couple;
    ExactCmd exact;
    ScalingCmd scaling;
    VerifyCmd verify;
    RegimesCmd regimes;
    ConcentrationCmd conc;
    gen.add(app);
    sim.add(app);
    couple.add(app);
    exact.add(app);
    scaling.add(app);
    verify.add(app);
    regimes.add(app);
    conc.add(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const parse_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const precondition_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFail;
    }

    for (int code : {gen.code, sim.code, couple.code, exact.code, scaling.code, verify.code,
                     regimes.code, conc.code})
        if (code != kExitPass)
            return code;
    return kExitPass;
}

#include "nsis/coupling.hpp"

#include "nsis/errors.hpp"
#include "nsis/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace nsis {

std::string_view to_string(CouplingKind kind)
{
    return kind == CouplingKind::PaperIndependent ? "paper" : "common";
}

CouplingKind parse_coupling_kind(std::string_view text)
{
    if (text == "paper")
        return CouplingKind::PaperIndependent;
    if (text == "common")
        return CouplingKind::CommonUniform;
    throw input_error("unknown coupling kind '" + std::string(text) + "' (expected paper|common)");
}

std::size_t hamming(const Configuration& sigma, const Configuration& eta)
{
    if (sigma.size() != eta.size())
        throw input_error("hamming: configuration lengths differ (" + std::to_string(sigma.size()) +
                          " vs " + std::to_string(eta.size()) + ")");
    std::size_t d = 0;
    for (std::size_t x = 0; x < sigma.size(); ++x)
        d += sigma[static_cast<vertex_t>(x)] != eta[static_cast<vertex_t>(x)] ? 1 : 0;
    return d;
}

CoupledState::CoupledState(Configuration s, Configuration e)
    : sigma(std::move(s)), eta(std::move(e))
{
    rho = hamming(sigma, eta);
    coalesced = rho == 0;
}

CoupledChain::CoupledChain(const MultiGraph& g, const Params& params, CouplingKind kind)
    : chain_(g, params), kind_(kind)
{}

void CoupledChain::step(CoupledState& s, rng_t& rng) const
{
    const auto x = static_cast<vertex_t>(uniform_index(rng, chain_.size()));
    if (s.coalesced) {
        const double u = uniform01(rng);
        if (u < chain_.flip_prob(s.sigma, x)) {
            s.sigma.flip(x);
            s.eta.flip(x);
        }
        return;
    }

    const bool differed = s.sigma[x] != s.eta[x];
    const double f_sigma = chain_.flip_prob(s.sigma, x);
    const double f_eta = chain_.flip_prob(s.eta, x);
    double u_sigma = uniform01(rng);
    double u_eta = kind_ == CouplingKind::PaperIndependent ? uniform01(rng) : u_sigma;
    if (u_sigma < f_sigma)
        s.sigma.flip(x);
    if (u_eta < f_eta)
        s.eta.flip(x);

    const bool differs = s.sigma[x] != s.eta[x];
    if (differs != differed)
        s.rho = differs ? s.rho + 1 : s.rho - 1;
    if (s.rho == 0)
        s.coalesced = true;
}

CoupledState coupled_step(const MultiGraph& g, const Params& params, const CoupledState& s,
                          CouplingKind kind, rng_t& rng)
{
    if (s.sigma.size() != g.num_vertices() || s.eta.size() != g.num_vertices())
        throw input_error("coupled state does not match graph size");
    CoupledState next = s;
    CoupledChain(g, params, kind).step(next, rng);
    return next;
}

namespace {

std::string describe_pair(const Configuration& sigma, const Configuration& eta)
{
    if (sigma.size() <= 64)
        return sigma.to_string() + "/" + eta.to_string();
    return "infected " + std::to_string(sigma.infected_count()) + "/" +
           std::to_string(eta.infected_count()) + ", rho " + std::to_string(hamming(sigma, eta));
}

std::optional<std::uint64_t> run_until_meeting(const CoupledChain& chain, CoupledState s,
                                               rng_t& rng, std::uint64_t t_max)
{
    if (s.coalesced)
        return 0;
    for (std::uint64_t t = 1; t <= t_max; ++t) {
        chain.step(s, rng);
        if (s.coalesced)
            return t;
    }
    return std::nullopt;
}

} // namespace

CoalescenceRecord coalescence_time(const MultiGraph& g, const Params& params,
                                   const Configuration& sigma0, const Configuration& eta0,
                                   CouplingKind kind, std::uint64_t seed, std::uint64_t t_max)
{
    if (sigma0.size() != g.num_vertices() || eta0.size() != g.num_vertices())
        throw input_error("initial configurations do not match graph size");
    const CoupledChain chain(g, params, kind);
    rng_t rng = make_stream(seed, 0);
    CoalescenceRecord rec;
    rec.t_max = t_max;
    rec.seed = seed;
    rec.initial_pair = describe_pair(sigma0, eta0);
    rec.tau = run_until_meeting(chain, CoupledState(sigma0, eta0), rng, t_max);
    return rec;
}

PairSpec PairSpec::parse(std::string_view text)
{
    if (text == "extremal")
        return extremal();
    constexpr std::string_view prefix = "random:";
    if (text.substr(0, prefix.size()) == prefix) {
        const auto body = text.substr(prefix.size());
        std::size_t k = 0;
        const auto res = std::from_chars(body.data(), body.data() + body.size(), k);
        if (res.ec == std::errc() && res.ptr == body.data() + body.size() && k >= 1)
            return random(k);
    }
    throw input_error("pair must be 'extremal' or 'random:K' with K >= 1 (got '" +
                      std::string(text) + "')");
}

std::string PairSpec::describe() const
{
    return kind == Kind::Extremal ? "extremal" : "random:" + std::to_string(k);
}

std::vector<std::optional<std::uint64_t>>
sample_coalescence_times(const MultiGraph& g, const Params& params, const Configuration& sigma0,
                         const Configuration& eta0, CouplingKind kind, std::size_t replicas,
                         std::uint64_t seed, std::uint64_t t_max)
{
    if (replicas == 0)
        throw input_error("replicas must be >= 1");
    if (sigma0.size() != g.num_vertices() || eta0.size() != g.num_vertices())
        throw input_error("initial configurations do not match graph size");
    const CoupledChain chain(g, params, kind);
    std::vector<std::optional<std::uint64_t>> taus(replicas);
    parallel_for(replicas, [&](std::size_t r) {
        rng_t rng = make_stream(seed, r);
        taus[r] = run_until_meeting(chain, CoupledState(sigma0, eta0), rng, t_max);
    });
    return taus;
}

SurvivalPoint survival_at(const std::vector<std::optional<std::uint64_t>>& taus, std::uint64_t t)
{
    std::size_t alive = 0;
    for (const auto& tau : taus)
        if (!tau || *tau > t)
            ++alive;
    const double R = static_cast<double>(taus.size());
    const double s = static_cast<double>(alive) / R;
    return {t, s, std::sqrt(s * (1.0 - s) / R)};
}

std::vector<SurvivalPoint> tail_curve(const MultiGraph& g, const Params& params,
                                      CouplingKind kind, const PairSpec& pair,
                                      const std::vector<std::uint64_t>& t_grid,
                                      std::size_t replicas, std::uint64_t seed)
{
    if (replicas == 0)
        throw input_error("replicas must be >= 1");
    const std::size_t n = g.num_vertices();
    const std::uint64_t t_max =
        t_grid.empty() ? 0 : *std::max_element(t_grid.begin(), t_grid.end());

    std::vector<std::pair<Configuration, Configuration>> pairs;
    if (pair.kind == PairSpec::Kind::Extremal) {
        pairs.emplace_back(Configuration::all_susceptible(n), Configuration::all_infected(n));
    } else {
        for (std::size_t i = 0; i < pair.k; ++i) {
            rng_t rng = make_stream(seed, (std::uint64_t{1} << 32) + i);
            Configuration s(n), e(n);
            do {
                for (vertex_t x = 0; x < n; ++x) {
                    s.set(x, (rng() >> 63) != 0);
                    e.set(x, (rng() >> 63) != 0);
                }
            } while (s == e);
            pairs.emplace_back(std::move(s), std::move(e));
        }
    }

    std::vector<std::vector<std::optional<std::uint64_t>>> banks;
    banks.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const std::uint64_t bank_seed = pairs.size() == 1 ? seed : stream_seed(seed, i);
        banks.push_back(sample_coalescence_times(g, params, pairs[i].first, pairs[i].second, kind,
                                                 replicas, bank_seed, t_max));
    }

    std::vector<SurvivalPoint> curve;
    curve.reserve(t_grid.size());
    for (const std::uint64_t t : t_grid) {
        SurvivalPoint best = survival_at(banks.front(), t);
        for (std::size_t i = 1; i < banks.size(); ++i) {
            const SurvivalPoint p = survival_at(banks[i], t);
            if (p.survival > best.survival)
                best = p;
        }
        curve.push_back(best);
    }
    return curve;
}

std::uint64_t default_step_budget(std::size_t n)
{
    const double nn = static_cast<double>(n);
    return std::max<std::uint64_t>(1000, static_cast<std::uint64_t>(
                                             std::ceil(50.0 * nn * std::log(nn + 1.0))));
}

TmixEstimate tmix_upper_estimate(const MultiGraph& g, const Params& params, CouplingKind kind,
                                 double eps, std::size_t replicas, std::uint64_t seed,
                                 std::optional<std::uint64_t> step_budget)
{
    if (!(eps > 0.0 && eps <= 1.0))
        throw input_error("eps must satisfy 0 < eps <= 1");
    const std::size_t n = g.num_vertices();
    TmixEstimate est;
    est.budget = step_budget.value_or(default_step_budget(n));
    if (eps >= 1.0)
        return est;

    const auto taus = sample_coalescence_times(g, params, Configuration::all_susceptible(n),
                                               Configuration::all_infected(n), kind, replicas,
                                               seed, est.budget);
    est.timeouts = static_cast<std::size_t>(
        std::count_if(taus.begin(), taus.end(), [](const auto& t) { return !t.has_value(); }));

    // P(tau > t) only changes at observed tau values, so those (and 0) are the
    // only candidates for the smallest t meeting either criterion.
    std::vector<std::uint64_t> candidates{0};
    for (const auto& tau : taus)
        if (tau)
            candidates.push_back(*tau);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::optional<std::uint64_t> hat;
    std::optional<std::uint64_t> low;
    for (const std::uint64_t t : candidates) {
        const SurvivalPoint p = survival_at(taus, t);
        if (!low && p.survival - 3.0 * p.std_error <= eps)
            low = t;
        if (p.survival + 3.0 * p.std_error <= eps) {
            hat = t;
            break;
        }
    }
    if (!hat)
        throw timeout_error("coupling did not reach eps=" + std::to_string(eps) + " within " +
                                std::to_string(est.budget) + " steps (" +
                                std::to_string(est.timeouts) + " timeouts)",
                            est.budget);
    est.t_hat = *hat;
    est.t_low = low.value_or(*hat);
    return est;
}

ContractionEstimate contraction_estimate(const MultiGraph& g, const Params& params,
                                         CouplingKind kind, std::size_t replicas,
                                         std::uint64_t seed, std::size_t random_bases)
{
    if (replicas == 0)
        throw input_error("replicas must be >= 1");
    const std::size_t n = g.num_vertices();
    const CoupledChain chain(g, params, kind);

    struct Job {
        vertex_t x;
        Configuration base;
        std::string label;
    };
    std::vector<Job> jobs;
    for (vertex_t x = 0; x < n; ++x) {
        jobs.push_back({x, Configuration::all_susceptible(n), "all0"});
        jobs.push_back({x, Configuration::all_infected(n), "all1"});
        rng_t rng = make_stream(seed, (std::uint64_t{1} << 40) + x);
        for (std::size_t b = 0; b < random_bases; ++b) {
            Configuration base(n);
            for (vertex_t y = 0; y < n; ++y)
                base.set(y, (rng() >> 63) != 0);
            jobs.push_back({x, std::move(base), "random" + std::to_string(b)});
        }
    }

    std::vector<std::pair<double, double>> stats(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t j) {
        const Job& job = jobs[j];
        Configuration sigma = job.base;
        Configuration eta = job.base;
        sigma.set(job.x, false);
        eta.set(job.x, true);
        const CoupledState start(sigma, eta);
        rng_t rng = make_stream(seed, j);
        double sum = 0.0;
        double sum_sq = 0.0;
        for (std::size_t r = 0; r < replicas; ++r) {
            CoupledState s = start;
            chain.step(s, rng);
            const double rho = static_cast<double>(s.rho);
            sum += rho;
            sum_sq += rho * rho;
        }
        const double R = static_cast<double>(replicas);
        const double mean = sum / R;
        const double var = R > 1 ? std::max(0.0, (sum_sq - R * mean * mean) / (R - 1.0)) : 0.0;
        stats[j] = {mean, std::sqrt(var / R)};
    });

    ContractionEstimate est;
    est.pairs = jobs.size();
    est.max_mean = -1.0;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (stats[j].first > est.max_mean) {
            est.max_mean = stats[j].first;
            est.std_error = stats[j].second;
            est.worst_vertex = jobs[j].x;
            est.worst_base = jobs[j].label;
        }
    }
    return est;
}

} // namespace nsis

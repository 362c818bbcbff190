#include "nsis/sis.hpp"

#include "nsis/errors.hpp"
#include "nsis/format.hpp"

#include <cmath>

namespace nsis {

void Params::validate() const
{
    if (!(a > 0.0 && a < 1.0))
        throw config_error("external infection a must satisfy 0 < a < 1 (got " + format_double(a) + ")");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw config_error("lambda must be a finite value >= 0 (got " + format_double(lambda) + ")");
    if (!(kappa > 0.0 && kappa < 1.0))
        throw config_error("recovery kappa must satisfy 0 < kappa < 1 (got " +
                           format_double(kappa) + ")");
}

double p_star(const MultiGraph& g, const Params& params)
{
    return params.a + params.lambda * static_cast<double>(g.max_degree());
}

double gamma_const(const Params& params, std::size_t n)
{
    if (n == 0)
        throw input_error("gamma_const needs n >= 1");
    const double a = params.a;
    const double k = params.kappa;
    return (1.0 - k) * a + (1.0 - a) * k - 2.0 * static_cast<double>(n - 1) * k * (1.0 - k);
}

double beta_const(const Params& params, double p_star_value)
{
    return params.kappa + p_star_value * (1.0 - 2.0 * params.kappa);
}

double beta_const(const Params& params, const MultiGraph& g)
{
    return beta_const(params, p_star(g, params));
}

double alpha_threshold(std::size_t n)
{
    if (n < 2)
        throw input_error("alpha threshold needs n >= 2");
    const double m = static_cast<double>(n - 1);
    return std::log(4.0 * m * m) / std::log(static_cast<double>(n));
}

RegimeReport check_regime(const Params& params, std::size_t n, std::optional<double> alpha)
{
    if (n < 2)
        throw input_error("regime check needs n >= 2 (got n=" + std::to_string(n) + ")");
    const double a = params.a;
    const double k = params.kappa;
    const double m = static_cast<double>(n - 1);

    RegimeReport r;
    r.n = n;
    r.alpha = alpha;
    r.gamma = gamma_const(params, n);
    r.feasible_alpha_min = alpha_threshold(n);

    if (!(0.0 < k))
        r.upper_failure = "0 < kappa";
    else if (!(k < 1.0 / (4.0 * m)))
        r.upper_failure = "kappa < 1/(4(n-1))";
    else if (!(a > 1.0 - k))
        r.upper_failure = "a > 1 - kappa";
    else if (!(1.0 - k > 0.5))
        r.upper_failure = "1 - kappa > 1/2";
    r.regime_upper = r.upper_failure.empty();

    if (!alpha) {
        r.lower_failure = "alpha not supplied";
    } else {
        const double noise = std::pow(static_cast<double>(n), -*alpha);
        if (!(*alpha > 1.0))
            r.lower_failure = "alpha > 1";
        else if (!(0.0 < k))
            r.lower_failure = "0 < kappa";
        else if (!(k < 1.0 / (4.0 * m * m)))
            r.lower_failure = "kappa < 1/(4(n-1)^2)";
        else if (!(a > 1.0 - noise))
            r.lower_failure = "a > 1 - n^-alpha";
        else if (!(1.0 - noise > 1.0 - k))
            r.lower_failure = "1 - n^-alpha > 1 - kappa";
        else if (!(1.0 - k > 0.5))
            r.lower_failure = "1 - kappa > 1/2";
    }
    r.regime_lower = r.lower_failure.empty();
    return r;
}

RegimeReport check_regime(const MultiGraph& g, const Params& params, std::optional<double> alpha)
{
    RegimeReport r = check_regime(params, g.num_vertices(), alpha);
    r.p_star = p_star(g, params);
    r.p_star_ok = *r.p_star < 1.0;
    r.beta = beta_const(params, *r.p_star);
    return r;
}

SisChain::SisChain(const MultiGraph& g, const Params& params)
    : g_(&g), params_(params), p_star_(nsis::p_star(g, params))
{
    params_.validate();
    if (!(p_star_ < 1.0))
        throw config_error("p* = a + lambda * max_degree = " + format_double(p_star_) +
                           " must be < 1");
}

double SisChain::infection_prob(const Configuration& sigma, vertex_t x) const
{
    return params_.a +
           params_.lambda * static_cast<double>(nsis::infected_neighbors(*g_, sigma, x));
}

std::optional<vertex_t> SisChain::step(Configuration& sigma, rng_t& rng) const
{
    const auto x = static_cast<vertex_t>(uniform_index(rng, size()));
    const double u = uniform01(rng);
    if (u < flip_prob(sigma, x)) {
        sigma.flip(x);
        return x;
    }
    return std::nullopt;
}

double infection_prob(const MultiGraph& g, const Params& params, const Configuration& sigma,
                      vertex_t x)
{
    return SisChain(g, params).infection_prob(sigma, x);
}

Configuration step(const MultiGraph& g, const Params& params, const Configuration& sigma,
                   rng_t& rng)
{
    if (sigma.size() != g.num_vertices())
        throw input_error("configuration length does not match graph size");
    Configuration next = sigma;
    SisChain(g, params).step(next, rng);
    return next;
}

Trajectory run_chain(const MultiGraph& g, const Params& params, const Configuration& sigma0,
                     std::uint64_t steps, std::size_t stride, std::uint64_t seed)
{
    if (sigma0.size() != g.num_vertices())
        throw input_error("initial configuration length does not match graph size");
    if (stride == 0)
        throw input_error("stride must be >= 1");
    const SisChain chain(g, params);
    rng_t rng = make_stream(seed, 0);

    Trajectory tr;
    tr.stride = stride;
    tr.seed = seed;
    tr.steps = steps;
    tr.final = sigma0;
    tr.infected_counts.reserve(steps / stride + 1);
    tr.infected_counts.push_back(sigma0.infected_count());
    for (std::uint64_t t = 1; t <= steps; ++t) {
        chain.step(tr.final, rng);
        if (t % stride == 0)
            tr.infected_counts.push_back(tr.final.infected_count());
    }
    return tr;
}

double upper_mixing_bound(std::size_t n, double gamma, double eps)
{
    if (!(gamma > 0.0))
        throw domain_error("upper mixing bound needs gamma > 0 (got " + format_double(gamma) + ")");
    if (!(eps > 0.0))
        throw domain_error("upper mixing bound needs eps > 0");
    const double nn = static_cast<double>(n);
    return nn / gamma * (std::log(nn) + std::log(1.0 / eps));
}

double lower_mixing_bound(std::size_t n, double beta, double gamma, double eps)
{
    if (!(gamma > 0.0) || !(beta > 0.0) || !(eps > 0.0))
        throw domain_error("lower mixing bound needs gamma, beta, eps > 0");
    const double nn = static_cast<double>(n);
    return nn / (2.0 * beta) * (std::log(nn) + std::log(gamma * eps / 4.0));
}

TheoremBounds theorem_bounds(const MultiGraph& g, const Params& params, double eps)
{
    const std::size_t n = g.num_vertices();
    TheoremBounds b;
    b.gamma = gamma_const(params, n);
    b.beta = beta_const(params, g);
    b.upper = upper_mixing_bound(n, b.gamma, eps);
    b.lower = lower_mixing_bound(n, b.beta, b.gamma, eps);
    b.lower_vacuous = !(b.lower > 0.0);
    return b;
}

} // namespace nsis

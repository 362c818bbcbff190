#pragma once

#include "nsis/graph.hpp"
#include "nsis/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nsis {

/// External infection a, per-infected-neighbour infection lambda, recovery kappa.
struct Params {
    double a = 0.0;
    double lambda = 0.0;
    double kappa = 0.0;

    // 0 < a < 1, lambda >= 0, 0 < kappa < 1; throws config_error otherwise.
    void validate() const;
};

// a + lambda * max_degree(g)
double p_star(const MultiGraph& g, const Params& params);

// (1-kappa)a + (1-a)kappa - 2(n-1)kappa(1-kappa). May be <= 0.
double gamma_const(const Params& params, std::size_t n);

// kappa + p*(1 - 2 kappa)
double beta_const(const Params& params, const MultiGraph& g);
double beta_const(const Params& params, double p_star_value);

struct RegimeReport {
    std::size_t n = 0;
    std::optional<double> p_star;
    std::optional<bool> p_star_ok;
    // Strong-infection regime used for the upper bound:
    //   0 < kappa < 1/(4(n-1)),  a > 1 - kappa > 1/2.
    bool regime_upper = false;
    // Regime used for the lower bound (only evaluated when alpha is given):
    //   0 < kappa < 1/(4(n-1)^2),  a > 1 - n^-alpha > 1 - kappa > 1/2,  alpha > 1.
    bool regime_lower = false;
    std::optional<double> alpha;
    double gamma = 0.0;
    std::optional<double> beta;
    // log(4(n-1)^2)/log(n); for alpha at or below it no kappa satisfies the
    // lower-bound regime.
    std::optional<double> feasible_alpha_min;
    // First failing inequality of each regime, empty when it holds.
    std::string upper_failure;
    std::string lower_failure;
};

// Checks the two regimes literally. Requires n >= 2.
RegimeReport check_regime(const Params& params, std::size_t n,
                          std::optional<double> alpha = std::nullopt);
// Same, plus p*, p* < 1 and beta from the graph.
RegimeReport check_regime(const MultiGraph& g, const Params& params,
                          std::optional<double> alpha = std::nullopt);

double alpha_threshold(std::size_t n);

/// The noisy SIS chain on a fixed graph. Validates p* < 1 once at
/// construction. One step: pick x uniformly, then flip x with probability
/// p(sigma, x) if susceptible or kappa if infected. Randomness is consumed as
/// exactly two draws per step: the vertex index, then one uniform for the flip.
class SisChain {
public:
    SisChain(const MultiGraph& g, const Params& params);

    const MultiGraph& graph() const noexcept { return *g_; }
    const Params& params() const noexcept { return params_; }
    std::size_t size() const noexcept { return g_->num_vertices(); }
    double p_star() const noexcept { return p_star_; }

    // a + lambda * n_I(sigma, x)
    double infection_prob(const Configuration& sigma, vertex_t x) const;

    // Probability that an update at x flips sigma_x.
    double flip_prob(const Configuration& sigma, vertex_t x) const
    {
        if (sigma[x])
            return params_.kappa;
        return params_.a + params_.lambda *
                               static_cast<double>(infected_neighbors_unchecked(*g_, sigma, x));
    }

    // In-place step; returns the updated vertex if it flipped.
    std::optional<vertex_t> step(Configuration& sigma, rng_t& rng) const;

private:
    const MultiGraph* g_;
    Params params_;
    double p_star_;
};

double infection_prob(const MultiGraph& g, const Params& params, const Configuration& sigma,
                      vertex_t x);

Configuration step(const MultiGraph& g, const Params& params, const Configuration& sigma,
                   rng_t& rng);

struct Trajectory {
    // infected_counts[k] is the count after k * stride steps (k = 0 included).
    std::vector<std::size_t> infected_counts;
    std::size_t stride = 1;
    Configuration final;
    std::uint64_t steps = 0;
    std::uint64_t seed = 0;
};

Trajectory run_chain(const MultiGraph& g, const Params& params, const Configuration& sigma0,
                     std::uint64_t steps, std::size_t stride, std::uint64_t seed);

struct TheoremBounds {
    // n/(2 beta) (ln n + ln(gamma eps / 4)); may be negative.
    double lower = 0.0;
    // n/gamma (ln n + ln(1/eps))
    double upper = 0.0;
    bool lower_vacuous = false;
    double gamma = 0.0;
    double beta = 0.0;
};

double upper_mixing_bound(std::size_t n, double gamma, double eps);
double lower_mixing_bound(std::size_t n, double beta, double gamma, double eps);

// Throws domain_error when gamma <= 0.
TheoremBounds theorem_bounds(const MultiGraph& g, const Params& params, double eps);

} // namespace nsis

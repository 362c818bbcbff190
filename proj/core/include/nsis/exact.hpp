#pragma once

#include "nsis/coupling.hpp"
#include "nsis/graph.hpp"
#include "nsis/sis.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nsis {

inline constexpr std::size_t kMaxKernelVertices = 14;
inline constexpr std::size_t kMaxCoupledKernelVertices = 7;
inline constexpr std::size_t kMaxProfileVertices = 12;
inline constexpr double kRowSumTolerance = 1e-12;
inline constexpr double kStationaryResidual = 1e-12;
inline constexpr double kPowerIterationTolerance = 1e-13;

/// Row-stochastic transition matrix over configurations (2^n states) or
/// coupled pairs (4^n states). State index: configuration bits as an integer
/// (bit x = vertex x); for pairs, (sigma << n) | eta.
///
/// Rows hold at most O(n) nonzeros, so entries are stored row-compressed.
class Kernel {
public:
    struct Entry {
        std::uint32_t col;
        double prob;
    };

    Kernel(std::size_t vertices, bool coupled, std::vector<std::size_t> offsets,
           std::vector<Entry> entries);

    std::size_t size() const noexcept { return offsets_.size() - 1; }
    std::size_t vertices() const noexcept { return vertices_; }
    bool coupled() const noexcept { return coupled_; }

    std::span<const Entry> row(std::size_t i) const
    {
        return {entries_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }
    double at(std::size_t i, std::size_t j) const;

    // Row-major dense copy; throws resource_error above 4096 states.
    std::vector<double> dense() const;

    // out = mu * K (push a distribution forward one step).
    void apply_left(std::span<const double> mu, std::span<double> out) const;
    // out = K * f (one-step conditional expectation of f).
    void apply_right(std::span<const double> f, std::span<double> out) const;

    double max_row_sum_error() const;
    bool entries_in_unit_interval() const;

private:
    std::size_t vertices_;
    bool coupled_;
    std::vector<std::size_t> offsets_;
    std::vector<Entry> entries_;
};

using DistributionVector = std::vector<double>;

// Single-chain kernel. n <= 14 unless allow_large.
Kernel build_kernel(const MultiGraph& g, const Params& params, bool allow_large = false);

// Joint kernel of the coupled step. The diagonal {sigma = eta} is closed.
// n <= 7 unless allow_large.
Kernel build_coupled_kernel(const MultiGraph& g, const Params& params, CouplingKind kind,
                            bool allow_large = false);

// Dense GTH elimination up to 2^11 states, power iteration above. The result
// satisfies ||pi K - pi||_1 <= 1e-12 or numerical_error is thrown.
DistributionVector stationary(const Kernel& k);
DistributionVector stationary_power_iteration(const Kernel& k,
                                              std::size_t max_iterations = 10'000'000);
double stationary_residual(const Kernel& k, std::span<const double> pi);

double tv(std::span<const double> mu, std::span<const double> nu);

struct DistanceProfile {
    // d[t] = max over starting states of tv(law_t, pi)
    std::vector<double> d;
    // dbar[t] = max over ordered pairs of starting states of tv(law_t, law'_t);
    // empty when not requested.
    std::vector<double> dbar;
};

/// Evolves the law from every point mass for t = 0..t_max. n <= 12.
DistanceProfile distance_profile(const Kernel& k, std::span<const double> pi, std::size_t t_max,
                                 bool with_dbar = true);

// Smallest t with d(t) <= eps.
std::size_t exact_tmix(const Kernel& k, std::span<const double> pi, double eps,
                       std::size_t t_limit = 10'000'000);

// sup over pairs of P(tau > t), t = 0..t_max, from a coupled kernel.
std::vector<double> sup_pair_tail(const Kernel& coupled, std::size_t t_max);

struct ContractionCheck {
    double max_adjacent = 0.0; // max E[rho_1] over adjacent pairs
    double min_adjacent = 0.0;
    double upper_bound = 0.0;  // 1 - gamma/n
    double lower_bound = 0.0;  // 1 - beta/n
    bool pass = false;         // max_adjacent <= upper_bound + 1e-12
    bool lower_pass = false;   // min_adjacent >= lower_bound - 1e-12
    double gamma = 0.0;
    double beta = 0.0;
};

// Requires the upper regime and the independent coupling (precondition_error otherwise).
ContractionCheck exact_contraction_check(const MultiGraph& g, const Params& params,
                                         CouplingKind kind = CouplingKind::PaperIndependent);
// Same enumeration on an already built coupled kernel, no precondition checks.
ContractionCheck contraction_from_kernel(const Kernel& coupled, double gamma, double beta);

struct SecondMomentRow {
    std::size_t t = 0;
    double e_rho2 = 0.0;   // E[rho_t^2] from the extremal pair
    double bound = 0.0;    // n^2 (1 - 2 gamma/n)^t + n/(2 gamma)
    double variance = 0.0; // Var(rho_t) from the extremal pair
};

struct SecondMomentCheck {
    std::vector<SecondMomentRow> rows;
    double gamma = 0.0;
    double variance_bound = 0.0; // n/(2 gamma)
    bool pass = false;           // extremal pair, slack 1e-10
    bool all_pairs_pass = false; // same inequality from every starting pair
    double max_violation = 0.0;  // largest (E - bound) over pairs and t
    bool variance_checked = false;
    bool variance_pass = false;
};

// alpha, when given, enables the variance comparison if the lower regime holds.
SecondMomentCheck exact_second_moment_check(const MultiGraph& g, const Params& params,
                                            CouplingKind kind, std::size_t t_max,
                                            std::optional<double> alpha = std::nullopt);

struct CouplingInequalityCheck {
    std::vector<double> d;
    std::vector<double> tail;
    bool pass = false; // d(t) <= tail(t) + 1e-10 for all t
    double max_gap = 0.0;
};

CouplingInequalityCheck coupling_inequality_check(const MultiGraph& g, const Params& params,
                                                  CouplingKind kind, std::size_t t_max);

/// Exact d(t) on the edgeless graph through the chain lumped by
/// (infected among initially infected, infected among initially susceptible).
/// The law from a start with k infected is exchangeable within both groups, as
/// is pi, so TV on the lumped chain equals TV on the full chain. Scales to
/// a few hundred vertices.
std::vector<double> edgeless_distance_profile(std::size_t n, const Params& params,
                                              std::size_t t_max);
std::size_t edgeless_exact_tmix(std::size_t n, const Params& params, double eps,
                                std::size_t t_limit = 10'000'000);

} // namespace nsis

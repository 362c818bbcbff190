#pragma once

#include "nsis/graph.hpp"
#include "nsis/rng.hpp"
#include "nsis/sis.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nsis {

/// How the flip randomness of two chains is shared at the (common) chosen vertex.
///   PaperIndependent: independent flip draws for each chain until the chains
///                     meet, one shared draw afterwards.
///   CommonUniform:    one uniform U drives both chains (flip iff U < rate).
enum class CouplingKind { PaperIndependent, CommonUniform };

std::string_view to_string(CouplingKind kind);
// Accepts "paper" / "common".
CouplingKind parse_coupling_kind(std::string_view text);

std::size_t hamming(const Configuration& sigma, const Configuration& eta);

struct CoupledState {
    Configuration sigma;
    Configuration eta;
    // Hamming distance, kept in sync by coupled_step.
    std::size_t rho = 0;
    bool coalesced = false;

    CoupledState() = default;
    CoupledState(Configuration s, Configuration e);
};

/// Runs two chains on the same graph/params with a shared vertex choice.
class CoupledChain {
public:
    CoupledChain(const MultiGraph& g, const Params& params, CouplingKind kind);

    const SisChain& chain() const noexcept { return chain_; }
    CouplingKind kind() const noexcept { return kind_; }

    // Draws: vertex index, then one uniform (coalesced or CommonUniform) or two
    // uniforms, sigma's first (PaperIndependent before meeting).
    void step(CoupledState& s, rng_t& rng) const;

private:
    SisChain chain_;
    CouplingKind kind_;
};

CoupledState coupled_step(const MultiGraph& g, const Params& params, const CoupledState& s,
                          CouplingKind kind, rng_t& rng);

struct CoalescenceRecord {
    // First t with sigma_t == eta_t; empty on timeout.
    std::optional<std::uint64_t> tau;
    std::uint64_t t_max = 0;
    std::uint64_t seed = 0;
    std::string initial_pair;

    bool timed_out() const noexcept { return !tau.has_value(); }
};

CoalescenceRecord coalescence_time(const MultiGraph& g, const Params& params,
                                   const Configuration& sigma0, const Configuration& eta0,
                                   CouplingKind kind, std::uint64_t seed, std::uint64_t t_max);

struct PairSpec {
    enum class Kind { Extremal, Random } kind = Kind::Extremal;
    std::size_t k = 1;

    static PairSpec extremal() { return {}; }
    static PairSpec random(std::size_t k) { return {Kind::Random, k}; }
    // "extremal" or "random:K"
    static PairSpec parse(std::string_view text);
    std::string describe() const;
};

struct SurvivalPoint {
    std::uint64_t t = 0;
    double survival = 0.0;
    double std_error = 0.0;
};

// Coalescence times of `replicas` coupled runs from one initial pair, replica r
// on stream (seed, r). Timeouts are reported as empty optionals.
std::vector<std::optional<std::uint64_t>>
sample_coalescence_times(const MultiGraph& g, const Params& params, const Configuration& sigma0,
                         const Configuration& eta0, CouplingKind kind, std::size_t replicas,
                         std::uint64_t seed, std::uint64_t t_max);

// Empirical P(tau > t) with binomial standard error sqrt(S(1-S)/R).
SurvivalPoint survival_at(const std::vector<std::optional<std::uint64_t>>& taus, std::uint64_t t);

/// Monte Carlo survival curve of the coalescence time. Extremal uses
/// (all-0, all-1). Random draws k distinct uniform pairs (pair i on sub-stream
/// (seed, 2^32 + i)) and reports, per t, the pair with the largest survival.
/// Runs are capped at max(t_grid); a timed-out run counts as tau > t.
std::vector<SurvivalPoint> tail_curve(const MultiGraph& g, const Params& params,
                                      CouplingKind kind, const PairSpec& pair,
                                      const std::vector<std::uint64_t>& t_grid,
                                      std::size_t replicas, std::uint64_t seed);

struct TmixEstimate {
    // Smallest t with P(tau > t) + 3 se <= eps.
    std::uint64_t t_hat = 0;
    // Smallest t with P(tau > t) - 3 se <= eps.
    std::uint64_t t_low = 0;
    std::uint64_t budget = 0;
    std::size_t timeouts = 0;
};

std::uint64_t default_step_budget(std::size_t n);

// Coupling-based upper estimate of the eps-mixing time from the extremal pair.
// Throws TimeoutError when the budget is exhausted before the criterion holds.
TmixEstimate tmix_upper_estimate(const MultiGraph& g, const Params& params, CouplingKind kind,
                                 double eps, std::size_t replicas, std::uint64_t seed,
                                 std::optional<std::uint64_t> step_budget = std::nullopt);

class timeout_error : public std::runtime_error {
public:
    timeout_error(const std::string& what, std::uint64_t budget)
        : std::runtime_error(what), budget_(budget)
    {}
    std::uint64_t budget() const noexcept { return budget_; }

private:
    std::uint64_t budget_;
};

struct ContractionEstimate {
    double max_mean = 0.0;
    double std_error = 0.0;
    vertex_t worst_vertex = 0;
    std::string worst_base;
    std::size_t pairs = 0;
};

// For each vertex x: adjacent pairs (sigma, sigma with x infected) with sigma_x = 0,
// for the bases all-0, all-1 (off x) and `random_bases` uniform draws. Each pair gets
// `replicas` one-step coupled moves; the largest mean rho_1 is reported.
ContractionEstimate contraction_estimate(const MultiGraph& g, const Params& params,
                                         CouplingKind kind, std::size_t replicas,
                                         std::uint64_t seed, std::size_t random_bases = 8);

} // namespace nsis

#include "nsis/exact.hpp"

#include "nsis/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace nsis {

Kernel::Kernel(std::size_t vertices, bool coupled, std::vector<std::size_t> offsets,
               std::vector<Entry> entries)
    : vertices_(vertices), coupled_(coupled), offsets_(std::move(offsets)),
      entries_(std::move(entries))
{}

double Kernel::at(std::size_t i, std::size_t j) const
{
    if (i >= size() || j >= size())
        throw input_error("kernel index out of range");
    const auto r = row(i);
    const auto it = std::lower_bound(r.begin(), r.end(), j,
                                     [](const Entry& e, std::size_t c) { return e.col < c; });
    return (it != r.end() && it->col == j) ? it->prob : 0.0;
}

std::vector<double> Kernel::dense() const
{
    const std::size_t N = size();
    if (N > 4096)
        throw resource_error("dense kernel copy limited to 4096 states");
    std::vector<double> m(N * N, 0.0);
    for (std::size_t i = 0; i < N; ++i)
        for (const Entry& e : row(i))
            m[i * N + e.col] = e.prob;
    return m;
}

void Kernel::apply_left(std::span<const double> mu, std::span<double> out) const
{
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < size(); ++i) {
        const double w = mu[i];
        if (w == 0.0)
            continue;
        for (const Entry& e : row(i))
            out[e.col] += w * e.prob;
    }
}

void Kernel::apply_right(std::span<const double> f, std::span<double> out) const
{
    for (std::size_t i = 0; i < size(); ++i) {
        double acc = 0.0;
        for (const Entry& e : row(i))
            acc += e.prob * f[e.col];
        out[i] = acc;
    }
}

double Kernel::max_row_sum_error() const
{
    double worst = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        double s = 0.0;
        for (const Entry& e : row(i))
            s += e.prob;
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

bool Kernel::entries_in_unit_interval() const
{
    return std::all_of(entries_.begin(), entries_.end(),
                       [](const Entry& e) { return e.prob >= 0.0 && e.prob <= 1.0; });
}

namespace {

// Flip probability of vertex x in the configuration encoded by `bits`.
struct BitRates {
    const MultiGraph& g;
    Params params;

    double flip(std::uint64_t bits, vertex_t x) const
    {
        if ((bits >> x) & 1U)
            return params.kappa;
        std::size_t infected = 0;
        for (const Neighbor& nb : g.neighbors(x))
            infected += ((bits >> nb.vertex) & 1U) ? nb.multiplicity : 0;
        return params.a + params.lambda * static_cast<double>(infected);
    }
};

void finish_row(std::size_t state, std::vector<Kernel::Entry>& entries, std::size_t row_begin,
                double off_diagonal)
{
    entries.push_back({static_cast<std::uint32_t>(state), 1.0 - off_diagonal});
    std::sort(entries.begin() + static_cast<std::ptrdiff_t>(row_begin), entries.end(),
              [](const Kernel::Entry& a, const Kernel::Entry& b) { return a.col < b.col; });
}

} // namespace

Kernel build_kernel(const MultiGraph& g, const Params& params, bool allow_large)
{
    const std::size_t n = g.num_vertices();
    if (n > kMaxKernelVertices && !allow_large)
        throw resource_error("exact kernel limited to n <= " + std::to_string(kMaxKernelVertices) +
                             " (got n=" + std::to_string(n) + ")");
    if (n > 31)
        throw resource_error("exact kernel cannot index more than 31 vertices");
    const SisChain chain(g, params); // validates p* < 1
    const BitRates rates{g, params};
    const std::size_t N = std::size_t{1} << n;
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<std::size_t> offsets(N + 1, 0);
    std::vector<Kernel::Entry> entries;
    entries.reserve(N * (n + 1));
    for (std::size_t s = 0; s < N; ++s) {
        const std::size_t begin = entries.size();
        double off = 0.0;
        for (vertex_t x = 0; x < n; ++x) {
            const double p = rates.flip(s, x) * inv_n;
            if (p > 0.0) {
                entries.push_back({static_cast<std::uint32_t>(s ^ (std::size_t{1} << x)), p});
                off += p;
            }
        }
        finish_row(s, entries, begin, off);
        offsets[s + 1] = entries.size();
    }
    return Kernel(n, false, std::move(offsets), std::move(entries));
}

Kernel build_coupled_kernel(const MultiGraph& g, const Params& params, CouplingKind kind,
                            bool allow_large)
{
    const std::size_t n = g.num_vertices();
    if (n > kMaxCoupledKernelVertices && !allow_large)
        throw resource_error("coupled kernel limited to n <= " +
                             std::to_string(kMaxCoupledKernelVertices) + " (got n=" +
                             std::to_string(n) + ")");
    if (n > 15)
        throw resource_error("coupled kernel cannot index more than 15 vertices");
    const SisChain chain(g, params);
    const BitRates rates{g, params};
    const std::size_t N = std::size_t{1} << n;
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<std::size_t> offsets(N * N + 1, 0);
    std::vector<Kernel::Entry> entries;
    entries.reserve(N * N * (3 * n + 1));
    for (std::size_t sigma = 0; sigma < N; ++sigma) {
        for (std::size_t eta = 0; eta < N; ++eta) {
            const std::size_t s = (sigma << n) | eta;
            const std::size_t begin = entries.size();
            double off = 0.0;
            auto push = [&](std::size_t sig, std::size_t et, double p) {
                if (p > 0.0) {
                    entries.push_back({static_cast<std::uint32_t>((sig << n) | et), p});
                    off += p;
                }
            };
            for (vertex_t x = 0; x < n; ++x) {
                const std::size_t bit = std::size_t{1} << x;
                const double fs = rates.flip(sigma, x);
                if (sigma == eta) {
                    push(sigma ^ bit, eta ^ bit, fs * inv_n);
                    continue;
                }
                const double fe = rates.flip(eta, x);
                double both = 0.0, only_s = 0.0, only_e = 0.0;
                if (kind == CouplingKind::PaperIndependent) {
                    both = fs * fe;
                    only_s = fs * (1.0 - fe);
                    only_e = (1.0 - fs) * fe;
                } else {
                    both = std::min(fs, fe);
                    only_s = std::max(0.0, fs - fe);
                    only_e = std::max(0.0, fe - fs);
                }
                push(sigma ^ bit, eta ^ bit, both * inv_n);
                push(sigma ^ bit, eta, only_s * inv_n);
                push(sigma, eta ^ bit, only_e * inv_n);
            }
            finish_row(s, entries, begin, off);
            offsets[s + 1] = entries.size();
        }
    }
    return Kernel(n, true, std::move(offsets), std::move(entries));
}

double stationary_residual(const Kernel& k, std::span<const double> pi)
{
    std::vector<double> next(k.size());
    k.apply_left(pi, next);
    double r = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i)
        r += std::abs(next[i] - pi[i]);
    return r;
}

namespace {

// Grassmann-Taksar-Heyman state reduction. Subtraction-free, so every
// component keeps full relative accuracy even when pi spans many decades.
DistributionVector stationary_gth(const Kernel& k)
{
    const std::size_t N = k.size();
    std::vector<double> a = k.dense();
    for (std::size_t m = N - 1; m >= 1; --m) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            s += a[m * N + j];
        if (!(s > 0.0))
            throw numerical_error("GTH elimination hit a zero pivot (chain not irreducible?)", 1.0);
        for (std::size_t i = 0; i < m; ++i)
            a[i * N + m] /= s;
        for (std::size_t i = 0; i < m; ++i) {
            const double aim = a[i * N + m];
            if (aim == 0.0)
                continue;
            double* ai = &a[i * N];
            const double* am = &a[m * N];
            for (std::size_t j = 0; j < m; ++j)
                ai[j] += aim * am[j];
        }
    }
    DistributionVector pi(N, 0.0);
    pi[0] = 1.0;
    for (std::size_t j = 1; j < N; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < j; ++i)
            acc += pi[i] * a[i * N + j];
        pi[j] = acc;
    }
    const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
    for (double& v : pi)
        v /= total;
    return pi;
}

} // namespace

DistributionVector stationary_power_iteration(const Kernel& k, std::size_t max_iterations)
{
    const std::size_t N = k.size();
    DistributionVector pi(N, 1.0 / static_cast<double>(N));
    DistributionVector next(N);
    double diff = 1.0;
    for (std::size_t it = 0; it < max_iterations; ++it) {
        k.apply_left(pi, next);
        const double total = std::accumulate(next.begin(), next.end(), 0.0);
        diff = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            next[i] /= total;
            diff += std::abs(next[i] - pi[i]);
        }
        pi.swap(next);
        if (diff <= kPowerIterationTolerance)
            return pi;
    }
    throw numerical_error("power iteration did not converge", diff);
}

DistributionVector stationary(const Kernel& k)
{
    DistributionVector pi = k.size() <= 2048 ? stationary_gth(k) : stationary_power_iteration(k);
    const double residual = stationary_residual(k, pi);
    if (!(residual <= kStationaryResidual))
        throw numerical_error("stationary distribution residual above tolerance", residual);
    return pi;
}

double tv(std::span<const double> mu, std::span<const double> nu)
{
    if (mu.size() != nu.size())
        throw input_error("tv: distributions have different sizes (" + std::to_string(mu.size()) +
                          " vs " + std::to_string(nu.size()) + ")");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        s += std::abs(mu[i] - nu[i]);
    return 0.5 * s;
}

namespace {

/// Laws from every point mass, evolved together.
class PointMassLaws {
public:
    explicit PointMassLaws(const Kernel& k) : k_(k), N_(k.size()), laws_(N_ * N_, 0.0), scratch_(N_ * N_)
    {
        for (std::size_t i = 0; i < N_; ++i)
            laws_[i * N_ + i] = 1.0;
    }

    std::span<const double> law(std::size_t i) const { return {laws_.data() + i * N_, N_}; }

    void advance()
    {
        for (std::size_t i = 0; i < N_; ++i)
            k_.apply_left(law(i), std::span<double>(scratch_.data() + i * N_, N_));
        laws_.swap(scratch_);
    }

    std::vector<double> distances_to(std::span<const double> pi) const
    {
        std::vector<double> d(N_);
        for (std::size_t i = 0; i < N_; ++i)
            d[i] = tv(law(i), pi);
        return d;
    }

    // max over pairs of tv(law_i, law_j). tv(law_i, law_j) <= d_i + d_j prunes.
    double max_pair_distance(const std::vector<double>& d) const
    {
        std::vector<std::size_t> order(N_);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
        double best = 0.0;
        for (std::size_t a = 0; a + 1 < N_; ++a) {
            const std::size_t i = order[a];
            if (d[i] + d[order[a + 1]] <= best)
                break;
            for (std::size_t b = a + 1; b < N_; ++b) {
                const std::size_t j = order[b];
                if (d[i] + d[j] <= best)
                    break;
                best = std::max(best, tv(law(i), law(j)));
            }
        }
        return best;
    }

private:
    const Kernel& k_;
    std::size_t N_;
    std::vector<double> laws_;
    std::vector<double> scratch_;
};

void check_profile_args(const Kernel& k, std::span<const double> pi)
{
    if (k.coupled())
        throw input_error("distance profile needs a single-chain kernel");
    if (k.vertices() > kMaxProfileVertices)
        throw resource_error("distance profile limited to n <= " +
                             std::to_string(kMaxProfileVertices));
    if (pi.size() != k.size())
        throw input_error("stationary vector size does not match kernel");
}

} // namespace

DistanceProfile distance_profile(const Kernel& k, std::span<const double> pi, std::size_t t_max,
                                 bool with_dbar)
{
    check_profile_args(k, pi);
    PointMassLaws laws(k);
    DistanceProfile out;
    out.d.reserve(t_max + 1);
    for (std::size_t t = 0; t <= t_max; ++t) {
        if (t > 0)
            laws.advance();
        const auto d = laws.distances_to(pi);
        out.d.push_back(*std::max_element(d.begin(), d.end()));
        if (with_dbar)
            out.dbar.push_back(laws.max_pair_distance(d));
    }
    return out;
}

std::size_t exact_tmix(const Kernel& k, std::span<const double> pi, double eps,
                       std::size_t t_limit)
{
    check_profile_args(k, pi);
    if (!(eps > 0.0))
        throw input_error("exact_tmix needs eps > 0");
    PointMassLaws laws(k);
    for (std::size_t t = 0; t <= t_limit; ++t) {
        if (t > 0)
            laws.advance();
        const auto d = laws.distances_to(pi);
        if (*std::max_element(d.begin(), d.end()) <= eps)
            return t;
    }
    throw numerical_error("d(t) stayed above eps up to the step limit", eps);
}

namespace {

std::size_t pair_rho(std::size_t state, std::size_t n)
{
    const std::size_t mask = (std::size_t{1} << n) - 1;
    return static_cast<std::size_t>(std::popcount((state >> n) ^ (state & mask)));
}

void require_coupled(const Kernel& k)
{
    if (!k.coupled())
        throw input_error("expected a coupled kernel");
}

} // namespace

std::vector<double> sup_pair_tail(const Kernel& coupled, std::size_t t_max)
{
    require_coupled(coupled);
    const std::size_t N2 = coupled.size();
    const std::size_t n = coupled.vertices();
    std::vector<double> u(N2), next(N2);
    for (std::size_t s = 0; s < N2; ++s)
        u[s] = pair_rho(s, n) > 0 ? 1.0 : 0.0;
    std::vector<double> tail;
    tail.reserve(t_max + 1);
    for (std::size_t t = 0; t <= t_max; ++t) {
        if (t > 0) {
            coupled.apply_right(u, next);
            u.swap(next);
        }
        tail.push_back(*std::max_element(u.begin(), u.end()));
    }
    return tail;
}

ContractionCheck contraction_from_kernel(const Kernel& coupled, double gamma, double beta)
{
    require_coupled(coupled);
    const std::size_t n = coupled.vertices();
    const std::size_t N = std::size_t{1} << n;
    ContractionCheck c;
    c.gamma = gamma;
    c.beta = beta;
    c.upper_bound = 1.0 - gamma / static_cast<double>(n);
    c.lower_bound = 1.0 - beta / static_cast<double>(n);
    c.max_adjacent = -1.0;
    c.min_adjacent = 2.0;
    for (std::size_t sigma = 0; sigma < N; ++sigma) {
        for (std::size_t x = 0; x < n; ++x) {
            const std::size_t eta = sigma ^ (std::size_t{1} << x);
            double e = 0.0;
            for (const Kernel::Entry& en : coupled.row((sigma << n) | eta))
                e += en.prob * static_cast<double>(pair_rho(en.col, n));
            c.max_adjacent = std::max(c.max_adjacent, e);
            c.min_adjacent = std::min(c.min_adjacent, e);
        }
    }
    c.pass = c.max_adjacent <= c.upper_bound + 1e-12;
    c.lower_pass = c.min_adjacent >= c.lower_bound - 1e-12;
    return c;
}

ContractionCheck exact_contraction_check(const MultiGraph& g, const Params& params,
                                         CouplingKind kind)
{
    if (kind != CouplingKind::PaperIndependent)
        throw precondition_error("contraction check is defined for the independent coupling only");
    const RegimeReport r = check_regime(g, params);
    if (!r.regime_upper)
        throw precondition_error("upper regime violated: " + r.upper_failure);
    const Kernel coupled = build_coupled_kernel(g, params, kind);
    return contraction_from_kernel(coupled, r.gamma, *r.beta);
}

SecondMomentCheck exact_second_moment_check(const MultiGraph& g, const Params& params,
                                            CouplingKind kind, std::size_t t_max,
                                            std::optional<double> alpha)
{
    if (kind != CouplingKind::PaperIndependent)
        throw precondition_error("second-moment check is defined for the independent coupling only");
    const std::size_t n = g.num_vertices();
    const double gamma = gamma_const(params, n);
    if (!(gamma > 0.0))
        throw domain_error("second-moment bound needs gamma > 0");
    const Kernel coupled = build_coupled_kernel(g, params, kind);
    const std::size_t N2 = coupled.size();
    const double nn = static_cast<double>(n);
    const double rate = 1.0 - 2.0 * gamma / nn;

    SecondMomentCheck out;
    out.gamma = gamma;
    out.variance_bound = nn / (2.0 * gamma);
    if (alpha && n >= 2) {
        const RegimeReport r = check_regime(params, n, alpha);
        out.variance_checked = r.regime_lower;
    }
    out.pass = true;
    out.all_pairs_pass = true;
    out.variance_pass = true;
    out.max_violation = -INFINITY;

    std::vector<double> m1(N2), m2(N2), rho0(N2), next(N2);
    for (std::size_t s = 0; s < N2; ++s) {
        rho0[s] = static_cast<double>(pair_rho(s, n));
        m1[s] = rho0[s];
        m2[s] = rho0[s] * rho0[s];
    }
    const std::size_t extremal = (std::size_t{1} << n) - 1; // sigma = all-0, eta = all-1
    double decay = 1.0;
    for (std::size_t t = 0; t <= t_max; ++t) {
        if (t > 0) {
            coupled.apply_right(m1, next);
            m1.swap(next);
            coupled.apply_right(m2, next);
            m2.swap(next);
            decay *= rate;
        }
        for (std::size_t s = 0; s < N2; ++s) {
            const double bound = rho0[s] * rho0[s] * decay + out.variance_bound;
            out.max_violation = std::max(out.max_violation, m2[s] - bound);
            if (m2[s] > bound + 1e-10)
                out.all_pairs_pass = false;
        }
        SecondMomentRow row;
        row.t = t;
        row.e_rho2 = m2[extremal];
        row.bound = nn * nn * decay + out.variance_bound;
        row.variance = m2[extremal] - m1[extremal] * m1[extremal];
        if (row.e_rho2 > row.bound + 1e-10)
            out.pass = false;
        if (out.variance_checked && row.variance > out.variance_bound + 1e-10)
            out.variance_pass = false;
        out.rows.push_back(row);
    }
    return out;
}

CouplingInequalityCheck coupling_inequality_check(const MultiGraph& g, const Params& params,
                                                  CouplingKind kind, std::size_t t_max)
{
    const Kernel k = build_kernel(g, params);
    const DistributionVector pi = stationary(k);
    CouplingInequalityCheck out;
    out.d = distance_profile(k, pi, t_max, false).d;
    out.tail = sup_pair_tail(build_coupled_kernel(g, params, kind), t_max);
    out.max_gap = -INFINITY;
    for (std::size_t t = 0; t <= t_max; ++t)
        out.max_gap = std::max(out.max_gap, out.d[t] - out.tail[t]);
    out.pass = out.max_gap <= 1e-10;
    return out;
}

namespace {

/// Lumped edgeless chain for one start with k infected out of n.
class LumpedEdgeless {
public:
    LumpedEdgeless(std::size_t n, std::size_t k, const Params& params)
        : n_(n), k_(k), m_(n - k), a_(params.a), kappa_(params.kappa),
          law_((k + 1) * (n - k + 1), 0.0), next_(law_.size()), pi_(law_.size())
    {
        law_[index(k, 0)] = 1.0;
        const double q = params.a / (params.a + params.kappa);
        const auto pa = binomial_pmf(k_, q);
        const auto pb = binomial_pmf(m_, q);
        for (std::size_t i = 0; i <= k_; ++i)
            for (std::size_t j = 0; j <= m_; ++j)
                pi_[index(i, j)] = pa[i] * pb[j];
    }

    double distance() const { return tv(law_, pi_); }

    void advance()
    {
        std::fill(next_.begin(), next_.end(), 0.0);
        const double inv_n = 1.0 / static_cast<double>(n_);
        for (std::size_t i = 0; i <= k_; ++i) {
            for (std::size_t j = 0; j <= m_; ++j) {
                const double w = law_[index(i, j)];
                if (w == 0.0)
                    continue;
                const double rec_a = static_cast<double>(i) * inv_n * kappa_;
                const double inf_a = static_cast<double>(k_ - i) * inv_n * a_;
                const double rec_b = static_cast<double>(j) * inv_n * kappa_;
                const double inf_b = static_cast<double>(m_ - j) * inv_n * a_;
                if (i > 0)
                    next_[index(i - 1, j)] += w * rec_a;
                if (i < k_)
                    next_[index(i + 1, j)] += w * inf_a;
                if (j > 0)
                    next_[index(i, j - 1)] += w * rec_b;
                if (j < m_)
                    next_[index(i, j + 1)] += w * inf_b;
                next_[index(i, j)] += w * (1.0 - rec_a - inf_a - rec_b - inf_b);
            }
        }
        law_.swap(next_);
    }

private:
    std::size_t index(std::size_t i, std::size_t j) const { return i * (m_ + 1) + j; }

    static std::vector<double> binomial_pmf(std::size_t trials, double q)
    {
        std::vector<double> p(trials + 1);
        for (std::size_t i = 0; i <= trials; ++i) {
            const double log_c = std::lgamma(static_cast<double>(trials) + 1.0) -
                                 std::lgamma(static_cast<double>(i) + 1.0) -
                                 std::lgamma(static_cast<double>(trials - i) + 1.0);
            p[i] = std::exp(log_c + static_cast<double>(i) * std::log(q) +
                            static_cast<double>(trials - i) * std::log1p(-q));
        }
        return p;
    }

    std::size_t n_, k_, m_;
    double a_, kappa_;
    std::vector<double> law_, next_, pi_;
};

std::vector<LumpedEdgeless> lumped_starts(std::size_t n, const Params& params)
{
    params.validate();
    if (n == 0)
        throw input_error("edgeless profile needs n >= 1");
    std::vector<LumpedEdgeless> starts;
    starts.reserve(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
        starts.emplace_back(n, k, params);
    return starts;
}

double max_distance(const std::vector<LumpedEdgeless>& starts)
{
    double d = 0.0;
    for (const auto& s : starts)
        d = std::max(d, s.distance());
    return d;
}

} // namespace

std::vector<double> edgeless_distance_profile(std::size_t n, const Params& params,
                                              std::size_t t_max)
{
    auto starts = lumped_starts(n, params);
    std::vector<double> d;
    d.reserve(t_max + 1);
    for (std::size_t t = 0; t <= t_max; ++t) {
        if (t > 0)
            for (auto& s : starts)
                s.advance();
        d.push_back(max_distance(starts));
    }
    return d;
}

std::size_t edgeless_exact_tmix(std::size_t n, const Params& params, double eps,
                                std::size_t t_limit)
{
    if (!(eps > 0.0))
        throw input_error("edgeless_exact_tmix needs eps > 0");
    auto starts = lumped_starts(n, params);
    for (std::size_t t = 0; t <= t_limit; ++t) {
        if (t > 0)
            for (auto& s : starts)
                s.advance();
        if (max_distance(starts) <= eps)
            return t;
    }
    throw numerical_error("d(t) stayed above eps up to the step limit", eps);
}

} // namespace nsis

#pragma once

#include "nsis/graph.hpp"
#include "nsis/sis.hpp"

#include <cmath>
#include <cstddef>

namespace nsis::test {

// Binomial 3-sigma band half-width for a frequency estimated from r draws.
inline double three_sigma(double p, double r)
{
    return 3.0 * std::sqrt(p * (1.0 - p) / r);
}

// Upper-regime parameters used throughout: kappa = 1/(8(n-1)), a = 1 - kappa/2.
inline Params recipe(const MultiGraph& g)
{
    const double n = static_cast<double>(g.num_vertices());
    const double kappa = 1.0 / (8.0 * (n - 1.0));
    const double lambda = g.max_degree() ? kappa / (4.0 * static_cast<double>(g.max_degree())) : 0.0;
    return {1.0 - kappa / 2.0, lambda, kappa};
}

} // namespace nsis::test

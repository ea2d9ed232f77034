// Shared per-element formulas. Every kernel variant goes through these for the
// transcendental parts so that scalar and vector paths round identically.
#pragma once

#include <cmath>

#include "llab/kernels.hpp"

namespace llab::kernels::detail {

inline double radial_coefficient(double r, double excess, const RadialCoefficient& c) {
    if (r == 0.0) return 0.0;
    double pw = 0.0;
    if (excess > 0.0) pw = c.lambda == 1.0 ? excess : std::pow(excess, c.lambda);
    const double rq = c.eps_power == 0.0 ? 1.0 : std::pow(r, c.eps_power);
    double coeff = pw / r;
    coeff = coeff + c.eps * rq;
    return coeff;
}

inline double power_term(double v, double q) {
    const double a = std::fabs(v);
    if (q == 2.0) return a * a;
    if (q == 1.0) return a;
    return a == 0.0 ? 0.0 : std::pow(a, q);
}

#if defined(LLAB_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif

}  // namespace llab::kernels::detail

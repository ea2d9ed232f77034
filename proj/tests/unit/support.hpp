// Small helpers shared by the unit tests.
#pragma once

#include <cmath>
#include <random>

#include "llab/flux.hpp"

namespace testsupport {

inline llab::SpatialVector random_vector(std::mt19937_64& rng, std::size_t n, double scale) {
    std::uniform_real_distribution<double> d(-scale, scale);
    llab::SpatialVector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = d(rng);
    return v;
}

inline double max_abs_diff(const llab::SpatialVector& a, const llab::SpatialVector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

}  // namespace testsupport

#include "llab/flux.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "llab/error.hpp"

namespace llab {

SpatialVector::SpatialVector(std::size_t n) : n_(n) {
    if (n == 0 || n > kMaxDim) throw InvalidInput("SpatialVector dimension must be in [1, 3]");
}

SpatialVector::SpatialVector(std::initializer_list<double> values) : n_(values.size()) {
    if (n_ == 0 || n_ > kMaxDim) throw InvalidInput("SpatialVector dimension must be in [1, 3]");
    std::copy(values.begin(), values.end(), v_.begin());
}

double SpatialVector::norm() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += v_[i] * v_[i];
    return std::sqrt(s);
}

bool SpatialVector::all_finite() const noexcept {
    for (std::size_t i = 0; i < n_; ++i)
        if (!std::isfinite(v_[i])) return false;
    return true;
}

SpatialVector& SpatialVector::operator+=(const SpatialVector& o) noexcept {
    for (std::size_t i = 0; i < n_; ++i) v_[i] += o.v_[i];
    return *this;
}

SpatialVector& SpatialVector::operator-=(const SpatialVector& o) noexcept {
    for (std::size_t i = 0; i < n_; ++i) v_[i] -= o.v_[i];
    return *this;
}

SpatialVector& SpatialVector::operator*=(double s) noexcept {
    for (std::size_t i = 0; i < n_; ++i) v_[i] *= s;
    return *this;
}

SpatialVector operator+(SpatialVector a, const SpatialVector& b) noexcept { return a += b; }
SpatialVector operator-(SpatialVector a, const SpatialVector& b) noexcept { return a -= b; }
SpatialVector operator*(double s, SpatialVector a) noexcept { return a *= s; }

double dot(const SpatialVector& a, const SpatialVector& b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void FluxParams::validate() const {
    if (!std::isfinite(p) || p < 2.0) throw ParameterError("flux exponent p must satisfy p >= 2");
    if (!std::isfinite(nu) || nu < 0.0) throw ParameterError("degeneracy radius nu must be >= 0");
    if (!std::isfinite(epsilon) || epsilon < 0.0 || epsilon > 1.0)
        throw ParameterError("regularization weight epsilon must lie in [0, 1]");
}

namespace {

void require_finite(const SpatialVector& xi) {
    if (!xi.all_finite()) throw InvalidInput("non-finite vector component");
}

SpatialVector zero_like(const SpatialVector& xi) { return SpatialVector(xi.size()); }

// |xi|^{q} xi, with the origin mapped to the origin.
SpatialVector radial_power(const SpatialVector& xi, double q) {
    const double r = xi.norm();
    if (r == 0.0) return zero_like(xi);
    return std::pow(r, q) * xi;
}

}  // namespace

SpatialVector h_lambda(const SpatialVector& xi, double lambda, double nu) {
    require_finite(xi);
    if (!(lambda > 0.0)) throw ParameterError("h_lambda requires lambda > 0");
    const double r = xi.norm();
    const double excess = std::max(r - nu, 0.0);
    if (r == 0.0 || excess == 0.0) return zero_like(xi);
    return (std::pow(excess, lambda) / r) * xi;
}

SpatialVector v_p(const SpatialVector& xi, double p) {
    require_finite(xi);
    if (p < 2.0) throw ParameterError("v_p requires p >= 2");
    if (p == 2.0) return xi;
    return radial_power(xi, 0.5 * (p - 2.0));
}

SpatialVector regularized_flux(const SpatialVector& xi, const FluxParams& params) {
    SpatialVector out = h_lambda(xi, params.p - 1.0, params.nu);
    if (params.epsilon > 0.0) {
        if (params.p == 2.0)
            out += params.epsilon * xi;
        else
            out += params.epsilon * radial_power(xi, params.p - 2.0);
    }
    return out;
}

SmallMatrix regularized_flux_jacobian(const SpatialVector& xi, const FluxParams& params) {
    require_finite(xi);
    const std::size_t n = xi.size();
    const double p = params.p;
    const double nu = params.nu;
    const double eps = params.epsilon;
    const double lambda = p - 1.0;
    const double r = xi.norm();

    if (eps == 0.0 && (r == 0.0 || r == nu))
        throw SingularPoint("flux Jacobian requested at |xi| in {0, nu} with epsilon = 0");

    SmallMatrix J;
    J.n = n;

    if (r == 0.0) {
        // Origin: H part is linear (nu = 0, p = 2), flat otherwise; the
        // epsilon part contributes epsilon * I only for p = 2.
        double diag = 0.0;
        if (nu == 0.0 && lambda == 1.0) diag += 1.0;
        if (p == 2.0) diag += eps;
        for (std::size_t i = 0; i < n; ++i) J(i, i) = diag;
        return J;
    }

    // Flux is phi(r) xi/r, so J = (phi/r) I + (phi' - phi/r) xi xi^T / r^2.
    double phi = 0.0;
    double dphi = 0.0;
    if (r > nu) {
        const double excess = r - nu;
        phi = std::pow(excess, lambda);
        dphi = lambda * std::pow(excess, lambda - 1.0);
    }
    if (eps > 0.0) {
        phi += eps * std::pow(r, p - 1.0);
        dphi += eps * (p - 1.0) * std::pow(r, p - 2.0);
    }
    const double a = phi / r;
    const double b = (dphi - a) / (r * r);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            J(i, j) = b * xi[i] * xi[j];
        }
        J(i, i) += a;
    }
    return J;
}

GapPair flux_monotonicity_gap(const SpatialVector& xi, const SpatialVector& eta, double p, double nu) {
    if (p < 2.0) throw ParameterError("flux gap inequalities require p >= 2");
    const SpatialVector dh_full = h_lambda(xi, p - 1.0, nu) - h_lambda(eta, p - 1.0, nu);
    const SpatialVector dh_half = h_lambda(xi, 0.5 * p, nu) - h_lambda(eta, 0.5 * p, nu);
    const double d2 = dot(dh_half, dh_half);
    return {dot(dh_full, xi - eta), (4.0 / (p * p)) * d2};
}

GapPair flux_lipschitz_gap(const SpatialVector& xi, const SpatialVector& eta, double p, double nu) {
    if (p < 2.0) throw ParameterError("flux gap inequalities require p >= 2");
    const SpatialVector hx = h_lambda(xi, 0.5 * p, nu);
    const SpatialVector he = h_lambda(eta, 0.5 * p, nu);
    const double expo = (p - 2.0) / p;
    const double weight = std::pow(hx.norm(), expo) + std::pow(he.norm(), expo);
    const double lhs = (h_lambda(xi, p - 1.0, nu) - h_lambda(eta, p - 1.0, nu)).norm();
    return {lhs, (p - 1.0) * weight * (hx - he).norm()};
}

VpGaps vp_gaps(const SpatialVector& xi, const SpatialVector& eta, double p) {
    if (p < 2.0) throw ParameterError("V_p inequalities require p >= 2");
    require_finite(xi);
    require_finite(eta);
    const SpatialVector dv = v_p(xi, p) - v_p(eta, p);
    const SpatialVector da = (p == 2.0 ? xi - eta : radial_power(xi, p - 2.0) - radial_power(eta, p - 2.0));
    const double half = 0.5 * (p - 2.0);
    VpGaps g;
    g.mono_lhs = dot(dv, dv);
    g.mono_rhs = 0.25 * p * p * dot(da, xi - eta);
    g.lip_lhs = da.norm();
    g.lip_rhs = (p - 1.0) * (std::pow(xi.norm(), half) + std::pow(eta.norm(), half)) * dv.norm();
    return g;
}

SpatialVector compose_half_to_full(const SpatialVector& eta, double p) {
    require_finite(eta);
    if (p == 2.0) return eta;
    return radial_power(eta, (p - 2.0) / p);
}

double relative_tolerance(double value, double tol) {
    return std::max(tol * (1.0 + std::fabs(value)), 1e-12);
}

}  // namespace llab

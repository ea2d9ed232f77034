/// @file flux.hpp
/// @brief Degenerate flux maps H_lambda, V_p, the regularized flux and its Jacobian,
/// plus the monotonicity/Lipschitz gap pairs used by the property sweeps.
///
/// Everything here is a pure function of its arguments.
#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>

namespace llab {

/// Largest spatial dimension handled by the pointwise algebra.
inline constexpr std::size_t kMaxDim = 3;

/// Vector in R^n with inline storage, 1 <= n <= kMaxDim.
class SpatialVector {
public:
    SpatialVector() = default;
    explicit SpatialVector(std::size_t n);
    SpatialVector(std::initializer_list<double> values);

    std::size_t size() const noexcept { return n_; }
    double& operator[](std::size_t i) noexcept { return v_[i]; }
    double operator[](std::size_t i) const noexcept { return v_[i]; }

    double norm() const noexcept;
    bool all_finite() const noexcept;

    SpatialVector& operator+=(const SpatialVector& o) noexcept;
    SpatialVector& operator-=(const SpatialVector& o) noexcept;
    SpatialVector& operator*=(double s) noexcept;

private:
    std::array<double, kMaxDim> v_{};
    std::size_t n_ = 0;
};

SpatialVector operator+(SpatialVector a, const SpatialVector& b) noexcept;
SpatialVector operator-(SpatialVector a, const SpatialVector& b) noexcept;
SpatialVector operator*(double s, SpatialVector a) noexcept;
double dot(const SpatialVector& a, const SpatialVector& b) noexcept;

/// Dense n x n matrix, row-major, n <= kMaxDim.
struct SmallMatrix {
    std::size_t n = 0;
    std::array<std::array<double, kMaxDim>, kMaxDim> a{};

    double operator()(std::size_t i, std::size_t j) const noexcept { return a[i][j]; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return a[i][j]; }
};

/// Exponent p >= 2, degeneracy radius nu >= 0, regularization weight 0 <= epsilon <= 1.
struct FluxParams {
    double p = 2.0;
    double nu = 1.0;
    double epsilon = 0.0;

    /// Throws ParameterError when an invariant is violated.
    void validate() const;
};

/// (|xi| - nu)_+^lambda xi/|xi|, and 0 at xi = 0.
SpatialVector h_lambda(const SpatialVector& xi, double lambda, double nu);

/// |xi|^{(p-2)/2} xi.
SpatialVector v_p(const SpatialVector& xi, double p);

/// H_{p-1}(xi) + epsilon |xi|^{p-2} xi.
SpatialVector regularized_flux(const SpatialVector& xi, const FluxParams& params);

/// Exact Jacobian of regularized_flux.
///
/// With epsilon == 0 the flux is not differentiable on {|xi| = nu} or at the
/// origin; those points raise SingularPoint. With epsilon > 0 the sphere |xi| = nu
/// takes the inner branch, where the H part vanishes on a neighbourhood.
SmallMatrix regularized_flux_jacobian(const SpatialVector& xi, const FluxParams& params);

struct GapPair {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// lhs = <H_{p-1}(xi) - H_{p-1}(eta), xi - eta>,
/// rhs = (4/p^2) |H_{p/2}(xi) - H_{p/2}(eta)|^2.  Holds as lhs >= rhs.
GapPair flux_monotonicity_gap(const SpatialVector& xi, const SpatialVector& eta, double p, double nu);

/// lhs = |H_{p-1}(xi) - H_{p-1}(eta)|,
/// rhs = (p-1)(|H_{p/2}(xi)|^{(p-2)/p} + |H_{p/2}(eta)|^{(p-2)/p}) |H_{p/2}(xi) - H_{p/2}(eta)|.
/// Holds as lhs <= rhs.
GapPair flux_lipschitz_gap(const SpatialVector& xi, const SpatialVector& eta, double p, double nu);

struct VpGaps {
    double mono_lhs = 0.0;  ///< |V_p(xi) - V_p(eta)|^2
    double mono_rhs = 0.0;  ///< (p^2/4) <|xi|^{p-2}xi - |eta|^{p-2}eta, xi - eta>
    double lip_lhs = 0.0;   ///< ||xi|^{p-2}xi - |eta|^{p-2}eta|
    double lip_rhs = 0.0;   ///< (p-1)(|xi|^{(p-2)/2} + |eta|^{(p-2)/2}) |V_p(xi) - V_p(eta)|
};

VpGaps vp_gaps(const SpatialVector& xi, const SpatialVector& eta, double p);

/// eta -> |eta|^{(p-2)/p} eta; maps H_{p/2}(xi) onto H_{p-1}(xi).
SpatialVector compose_half_to_full(const SpatialVector& eta, double p);

/// tol * (1 + |value|) with an absolute floor of 1e-12.
double relative_tolerance(double value, double tol);

}  // namespace llab

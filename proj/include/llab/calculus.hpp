/// @file calculus.hpp
/// @brief Discrete gradient/divergence pair, difference quotients, mollification
/// and integrals over parabolic cylinders.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "llab/grid.hpp"

namespace llab {

/// Gradient of one spatial slice.
///
/// Interior nodes use centered differences; boundary nodes use first-order
/// one-sided differences. Together with the trapezoid weights of
/// SpatialGrid::sbp_weight this is a summation-by-parts pair with divergence().
VectorSlice gradient(const SpatialGrid& grid, std::span<const double> u);

/// Gradient of every level.
VectorField gradient(const ScalarField& u);

/// Negative adjoint of gradient() under <a, b> = sum_k w_k a_k b_k, w = sbp_weight.
///
/// Per axis this is the centered difference at interior nodes, (F_0 + F_1)/h at
/// the low end and -(F_{N-2} + F_{N-1})/h at the high end.
std::vector<double> divergence(const SpatialGrid& grid, const VectorSlice& f);

/// Weighted inner products used by the adjointness identity.
double inner(const SpatialGrid& grid, std::span<const double> a, std::span<const double> b);
double inner(const SpatialGrid& grid, const VectorSlice& a, const VectorSlice& b);

/// Result of tau_shift on one slice. Entries outside the shrunk domain
/// Omega_|h| (or whose shifted node leaves the grid) are 0 with valid == 0.
struct ShiftedSlice {
    std::vector<double> values;
    std::vector<std::uint8_t> valid;
    std::size_t valid_count = 0;
};

/// F(x + hstep e_axis) - F(x). hstep must be a nonzero integer multiple of h.
ShiftedSlice tau_shift(const SpatialGrid& grid, std::span<const double> f, int axis, double hstep);

/// tau_shift / hstep.
ShiftedSlice difference_quotient(const SpatialGrid& grid, std::span<const double> f, int axis, double hstep);

/// Discrete bump kernel exp(-1/(1-s^2)) sampled on the stencil |offset| < epsilon.
struct MollifierKernel {
    struct SpatialTap {
        int di = 0;
        int dj = 0;
        double w = 0.0;
    };
    struct TemporalTap {
        int dk = 0;
        double w = 0.0;
    };

    double epsilon = 0.0;
    std::vector<SpatialTap> spatial;   ///< the centre tap is stored last
    std::vector<TemporalTap> temporal; ///< the centre tap is stored last

    /// Spatial support radius in physical units (max |offset| h), <= epsilon.
    double spatial_radius = 0.0;
    double temporal_radius = 0.0;
};

MollifierKernel make_mollifier(const SpaceTimeGrid& grid, double epsilon);

/// Space-then-time convolution with zero extension outside the grid.
/// epsilon == 0 returns a copy of f.
ScalarField mollify(const ScalarField& f, double epsilon);

/// Pointwise |v| or a derived field per level.
ScalarField magnitude(const VectorField& v);

/// sum over Q of |F|^q h^n tau.
double cylinder_integral(const ScalarField& f, const CylinderNodes& q, double exponent);

/// (sum over Q of |F|^q h^n tau)^(1/q).
double cylinder_norm(const ScalarField& f, const ParabolicCylinder& q, double exponent);

/// max over levels of Q of (sum over B_rho of |F|^2 h^n)^(1/2).
double sup_time_slice_norm(const ScalarField& f, const ParabolicCylinder& q);

/// max over levels of sum over B_rho of |F|^q h^n.
double sup_time_slice_integral(const ScalarField& f, const CylinderNodes& q, double exponent);

struct InequalityPair {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// lhs = int_Q |v|^{p + pq/n}, rhs = (sup_t int_B |v|^q)^{p/n} int_Q |Dv|^p.
InequalityPair interpolation_check(const ScalarField& v, const ParabolicCylinder& q, double p, double qexp);

/// Both claims of the difference-quotient lemma on one slice, for the ball
/// B_rho(x0) and the enlarged ball B_{rho + |hstep|}(x0):
/// shift: int_{B_rho} |tau_h F|^q  vs  |h|^q int_{B_R} |DF|^q,
/// translate: int_{B_rho} |F(x + h e_axis)|^q  vs  int_{B_R} |F|^q.
struct DifferenceQuotientCheck {
    InequalityPair shift;
    InequalityPair translate;
};

DifferenceQuotientCheck difference_quotient_check(const SpatialGrid& grid, std::span<const double> f, int axis,
                                                  double hstep, std::array<double, 2> x0, double rho,
                                                  double qexp);

}  // namespace llab

/// @file props.hpp
/// @brief Seeded randomized sweeps over the pointwise flux inequalities and
/// the grid lemma checks. Everything here is deterministic in the seed.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "llab/grid.hpp"

namespace llab {

struct SweepConfig {
    std::uint64_t samples = 1'000'000;  ///< pairs per (p, nu, n) case
    std::uint64_t seed = 1;
    std::vector<double> p{2.0, 3.0, 4.0, 5.0};
    std::vector<double> nu{0.0, 0.5, 1.0};
    std::vector<int> n{2, 3};
    double tolerance = 1e-9;  ///< allowed negative relative slack

    void validate() const;  ///< ParameterError on empty grids, p < 2, nu < 0, n outside {1, 2, 3}
};

/// One inequality at one parameter point. slack = (big - small) / (1 + |big|),
/// minimized over the samples.
struct SweepCase {
    std::string inequality;
    double p = 0.0;
    double nu = 0.0;  ///< NaN for the V_p family, which has no nu
    int n = 0;
    std::uint64_t samples = 0;
    double min_slack = 0.0;
    std::uint64_t violations = 0;  ///< samples with slack < -tolerance
};

struct SweepReport {
    std::vector<SweepCase> cases;
    bool pass() const;
};

/// Monotonicity and Lipschitz bounds for H_{p-1} in terms of H_{p/2}.
SweepReport flux_gap_sweep(const SweepConfig& cfg);

/// The same two bounds for V_p; nu is not swept.
SweepReport vp_gap_sweep(const SweepConfig& cfg);

struct JacobianSweep {
    std::uint64_t points = 0;
    std::uint64_t skipped = 0;  ///< finite-difference stencil straddles the kink sphere or the origin
    double max_rel_error = 0.0;  ///< max |J - J_fd| / (1 + max |J|)
};

/// Analytic Jacobian of the regularized flux against central differences
/// with the given step, over eps in {0.01, 0.1, 1}, p in {2, 3, 4}, n in {2, 3}.
JacobianSweep jacobian_sweep(std::uint64_t points, std::uint64_t seed, double step = 1e-6);

/// Smooth seeded field on a spatial grid: a few random Fourier modes.
std::vector<double> smooth_slice(const SpatialGrid& grid, std::uint64_t seed);

/// Smooth seeded space-time field supported in the ball |x - c| < radius.
ScalarField smooth_bump_field(const SpaceTimeGrid& grid, std::uint64_t seed, std::array<double, 2> centre,
                              double radius);

/// Fitted constants for the two grid lemmas over `fields` seeded fields.
struct CalculusLemmaSweep {
    std::size_t fields = 0;
    double shift_constant_h = 0.0;    ///< difference quotient, step h
    double shift_constant_2h = 0.0;   ///< step 2h
    bool translate_ok = true;         ///< translation bound on every field and step
    double interp_constant_coarse = 0.0;
    double interp_constant_fine = 0.0;  ///< one grid refinement
    double tolerance = 0.3;
    bool shift_stable() const;
    bool interp_stable() const;
    bool pass() const { return fields == 0 || (translate_ok && shift_stable() && interp_stable()); }
};

CalculusLemmaSweep calculus_lemma_sweep(std::size_t fields, std::uint64_t seed);

nlohmann::json to_json(const SweepReport& r);
nlohmann::json to_json(const JacobianSweep& r);
nlohmann::json to_json(const CalculusLemmaSweep& r);

}  // namespace llab

/// @file filtration.hpp
/// @brief Gas filtration with a limiting pressure gradient: physical
/// parameters, reduction to the model equation for u = P^2, mass flux and
/// stagnant zones.
#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "llab/scenario.hpp"

namespace llab {

struct PhysicalParams {
    double k = 1.0;   ///< permeability
    double mu = 1.0;  ///< viscosity
    double m = 1.0;   ///< porosity-like constant
    double G = 1.0;   ///< limiting gradient of P^2
    double P0 = 1.0;  ///< reference pressure
    double C = 1.0;   ///< density-law constant

    void validate() const;  ///< ParameterError on a nonpositive entry
    double time_scale() const { return k * P0 / (m * mu); }
    static PhysicalParams from(const FiltrationConfig& c);
};

/// Map between physical (x, t, P^2) and scenario (x, s, u) variables:
/// s = time_scale * t, u = value_scale * P^2.
struct FiltrationTransform {
    double time_scale = 1.0;
    double value_scale = 1.0;  ///< 1, or 1/G when gradients are normalized
    bool normalized = false;

    nlohmann::json to_json() const;
};

/// p = 2, f = 0, nu = G (or 1 with normalization), Dirichlet data and the
/// initial state from the pressure expressions. `geometry` supplies domain,
/// grid (physical time), schedule and solver settings.
Scenario to_scenario(const PhysicalParams& phys, const Scenario& geometry, const std::string& boundary_pressure,
                     const std::string& initial_pressure = "", bool normalize_gradient = false);

/// Same, with everything read from geometry.filtration.
Scenario to_scenario(const Scenario& geometry);

FiltrationTransform transform_of(const Scenario& s);

struct FiltrationState {
    ScalarField P;  ///< pressure, physical time axis
    ScalarField u;  ///< P^2
    std::vector<std::vector<std::uint8_t>> stagnant;  ///< per level, |D u| <= G

    /// From a scenario solution. Negative u beyond round-off raises InvalidInput.
    static FiltrationState from_solution(const ScalarField& u_scenario, const FiltrationTransform& tr,
                                         const PhysicalParams& phys);
};

/// j = -(k / (2 mu C)) H_1(D u; G), the second branch included by the positive part.
VectorSlice mass_flux(const FiltrationState& state, const PhysicalParams& phys, std::size_t level);

/// true where |D u| <= nu at the node.
std::vector<std::uint8_t> stagnant_zone(const ScalarField& u, double nu, std::size_t level);

/// Stagnant fraction of interior nodes per level, and pressure range diagnostics.
struct FiltrationSummary {
    std::vector<double> stagnant_fraction;
    bool stagnant_nondecreasing = true;  ///< reported, not asserted
    double p_min = 0.0;
    double p_max = 0.0;
    double max_relative_deviation = 0.0;  ///< max |P - P0| / P0
    double max_mass_flux = 0.0;
};

FiltrationSummary summarize(const FiltrationState& state, const PhysicalParams& phys);
nlohmann::json to_json(const FiltrationSummary& s);

}  // namespace llab

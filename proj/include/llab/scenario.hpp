/// @file scenario.hpp
/// @brief Problem description: grid, flux parameters, data f and g, the
/// regularization schedule and solver/estimate settings. Loaded from JSON
/// (comments allowed).
#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "llab/expr.hpp"
#include "llab/flux.hpp"
#include "llab/grid.hpp"

namespace llab {

/// Closed-form expression or a tabulated field on the scenario grid.
class DataSource {
public:
    DataSource() = default;
    static DataSource expression(Expression e);
    static DataSource table(std::shared_ptr<const ScalarField> f, std::string origin);

    bool is_table() const noexcept { return table_ != nullptr; }
    const std::string& description() const noexcept { return description_; }

    /// Value at a grid node and level (tables) or at the node's coordinates.
    double at(const SpaceTimeGrid& grid, std::size_t level, std::size_t node) const;

    /// Sample every node of every level.
    ScalarField sample(const SpaceTimeGrid& grid) const;

private:
    Expression expr_;
    std::shared_ptr<const ScalarField> table_;
    std::string description_ = "0";
};

struct NewtonConfig {
    double atol = 1e-9;           ///< absolute residual tolerance (max norm)
    double rtol = 1e-10;          ///< relative to the residual of the initial guess
    int max_iterations = 40;
    double armijo = 1e-4;         ///< sufficient-decrease constant on ||R||_2
    int max_backtracks = 5;       ///< rejected halvings before switching to Picard
    bool picard_fallback = true;
    int picard_max_iterations = 400;

    void validate() const;
};

/// Cylinder family used by the estimate reports.
struct EstimateConfig {
    std::array<double, 2> x0{0.0, 0.0};
    std::optional<double> t0;     ///< defaults to the final time
    std::optional<double> R0;     ///< defaults to the largest cylinder that fits
    int family = 5;               ///< rho in [R0/4, R0/2]
    double radius_factor = 2.0;   ///< R = radius_factor * rho
    std::vector<double> theta;    ///< empty: the weakest admissible exponent only
    double stability_factor = 2.0;
};

/// Physical block of a filtration scenario.
struct FiltrationConfig {
    double k = 1.0;
    double mu = 1.0;
    double m = 1.0;
    double G = 1.0;
    double P0 = 1.0;
    double C = 1.0;
    bool normalize_gradient = false;
    std::string boundary_pressure = "1";
    std::string initial_pressure;  ///< empty: same as boundary_pressure
};

struct Scenario {
    std::string name = "scenario";
    SpaceTimeGrid grid;
    FluxParams params;
    DataSource f;
    DataSource g;
    std::vector<double> epsilon_schedule{0.01};
    NewtonConfig newton;
    bool mollify_datum = true;
    EstimateConfig estimates;
    std::optional<FiltrationConfig> filtration;
    std::uint64_t seed = 1;
    nlohmann::json metadata = nlohmann::json::object();
    nlohmann::json source = nlohmann::json::object();  ///< resolved configuration echo

    /// Throws ConfigError / ParameterError on any invariant violation.
    void validate() const;
};

/// Parse a scenario document. Relative table paths resolve against base_dir.
Scenario parse_scenario(const nlohmann::json& doc, const std::string& base_dir = ".");

/// Read, strip comments, parse.
Scenario load_scenario(const std::string& path);

nlohmann::json parse_json_text(const std::string& text);

/// Resolved configuration echo, stable key order.
nlohmann::json scenario_to_json(const Scenario& s);

}  // namespace llab

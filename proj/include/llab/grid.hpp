/// @file grid.hpp
/// @brief Uniform space-time grids and the fields that live on them.
#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace llab {

/// Uniform Cartesian node grid in one or two space dimensions.
///
/// Nodes are numbered x-fastest: node = j * extents[0] + i. For dim == 1,
/// extents[1] is 1.
struct SpatialGrid {
    int dim = 2;
    std::array<std::size_t, 2> extents{2, 2};
    double h = 1.0;
    std::array<double, 2> origin{0.0, 0.0};

    std::size_t node_count() const noexcept { return extents[0] * extents[1]; }
    std::size_t index(std::size_t i, std::size_t j = 0) const noexcept { return j * extents[0] + i; }
    std::size_t ix(std::size_t node) const noexcept { return node % extents[0]; }
    std::size_t jy(std::size_t node) const noexcept { return node / extents[0]; }

    /// Coordinate of a node along one axis.
    double coord(std::size_t node, int axis) const noexcept;
    double upper(int axis) const noexcept;

    bool on_boundary(std::size_t node) const noexcept;

    /// h^dim.
    double cell_volume() const noexcept;

    /// Quadrature weight of the summation-by-parts inner product: h^dim times
    /// 1/2 for every axis along which the node sits on the boundary.
    double sbp_weight(std::size_t node) const noexcept;

    /// Throws ParameterError on h <= 0, extents < 2, or dim outside {1, 2}.
    void validate() const;

    friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;
};

/// Space grid plus time levels t0 + k*tau, k = 0..steps.
struct SpaceTimeGrid {
    SpatialGrid space;
    double tau = 1.0;
    double t0 = 0.0;
    std::size_t steps = 1;

    /// Guard against accidental huge allocations (values stored per field).
    static constexpr std::size_t kDefaultValueBudget = std::size_t{1} << 27;

    std::size_t levels() const noexcept { return steps + 1; }
    double time(std::size_t level) const noexcept { return t0 + static_cast<double>(level) * tau; }
    double t_end() const noexcept { return time(steps); }
    std::size_t value_count() const noexcept { return space.node_count() * levels(); }

    void validate(std::size_t budget = kDefaultValueBudget) const;

    friend bool operator==(const SpaceTimeGrid&, const SpaceTimeGrid&) = default;
};

/// Builds a grid on [lower, upper] with the given node counts per axis.
SpatialGrid make_spatial_grid(int dim, std::array<double, 2> lower, std::array<double, 2> upper,
                              std::array<std::size_t, 2> nodes);

/// One scalar per node per time level, level-major.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(SpaceTimeGrid grid, double fill = 0.0);
    ScalarField(SpaceTimeGrid grid, std::vector<double> values);

    const SpaceTimeGrid& grid() const noexcept { return grid_; }
    std::span<double> slice(std::size_t level);
    std::span<const double> slice(std::size_t level) const;
    std::span<const double> values() const noexcept { return values_; }
    std::vector<double>& mutable_values() noexcept { return values_; }

    double& at(std::size_t level, std::size_t node) { return values_[level * grid_.space.node_count() + node]; }
    double at(std::size_t level, std::size_t node) const { return values_[level * grid_.space.node_count() + node]; }

    bool all_finite() const noexcept;

private:
    SpaceTimeGrid grid_;
    std::vector<double> values_;
};

/// Vector-valued spatial slice, stored one array per component.
struct VectorSlice {
    int dim = 2;
    std::array<std::vector<double>, 2> comp;

    VectorSlice() = default;
    VectorSlice(int d, std::size_t nodes);

    std::size_t size() const noexcept { return comp[0].size(); }
    /// |F| per node.
    std::vector<double> magnitude() const;
};

/// Spatial gradient of every level of a scalar field.
struct VectorField {
    SpaceTimeGrid grid;
    std::vector<VectorSlice> levels;
};

/// Q = B_rho(x0) x (t0 - rho^2, t0).
struct ParabolicCylinder {
    std::array<double, 2> x0{0.0, 0.0};
    double t0 = 0.0;
    double rho = 1.0;

    ParabolicCylinder scaled(double factor) const { return {x0, t0, rho * factor}; }
};

/// Discrete realization of a cylinder: nodes with |x - x0| < rho, levels with
/// t in (t0 - rho^2, t0].
struct CylinderNodes {
    std::vector<std::size_t> nodes;
    std::vector<std::size_t> levels;
    double node_measure = 0.0;  ///< h^dim * tau
    double spatial_measure = 0.0;  ///< h^dim

    double measure() const noexcept {
        return static_cast<double>(nodes.size() * levels.size()) * node_measure;
    }
};

/// Throws GeometryError when the closed cylinder leaves the grid box, and
/// DegenerateRegion when no node or level falls inside.
CylinderNodes realize(const SpaceTimeGrid& grid, const ParabolicCylinder& q);

/// True when q fits inside the grid box (no exception).
bool fits(const SpaceTimeGrid& grid, const ParabolicCylinder& q) noexcept;

}  // namespace llab

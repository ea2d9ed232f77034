#include "llab/grid.hpp"

#include <cmath>
#include <string>

#include "llab/error.hpp"

namespace llab {

double SpatialGrid::coord(std::size_t node, int axis) const noexcept {
    const std::size_t k = axis == 0 ? ix(node) : jy(node);
    return origin[static_cast<std::size_t>(axis)] + static_cast<double>(k) * h;
}

double SpatialGrid::upper(int axis) const noexcept {
    const auto a = static_cast<std::size_t>(axis);
    return origin[a] + static_cast<double>(extents[a] - 1) * h;
}

bool SpatialGrid::on_boundary(std::size_t node) const noexcept {
    const std::size_t i = ix(node);
    if (i == 0 || i + 1 == extents[0]) return true;
    if (dim == 2) {
        const std::size_t j = jy(node);
        if (j == 0 || j + 1 == extents[1]) return true;
    }
    return false;
}

double SpatialGrid::cell_volume() const noexcept { return dim == 1 ? h : h * h; }

double SpatialGrid::sbp_weight(std::size_t node) const noexcept {
    double w = cell_volume();
    const std::size_t i = ix(node);
    if (i == 0 || i + 1 == extents[0]) w *= 0.5;
    if (dim == 2) {
        const std::size_t j = jy(node);
        if (j == 0 || j + 1 == extents[1]) w *= 0.5;
    }
    return w;
}

void SpatialGrid::validate() const {
    if (dim != 1 && dim != 2) throw ParameterError("grid dimension must be 1 or 2");
    if (!(h > 0.0) || !std::isfinite(h)) throw ParameterError("grid spacing h must be positive");
    if (extents[0] < 2) throw ParameterError("every grid axis needs at least 2 nodes");
    if (dim == 2 && extents[1] < 2) throw ParameterError("every grid axis needs at least 2 nodes");
    if (dim == 1 && extents[1] != 1) throw ParameterError("1D grids must have extents[1] == 1");
}

void SpaceTimeGrid::validate(std::size_t budget) const {
    space.validate();
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ParameterError("time step tau must be positive");
    if (steps < 1) throw ParameterError("grid needs at least one time step");
    if (value_count() > budget)
        throw ParameterError("grid has " + std::to_string(value_count()) + " values, above the budget of " +
                             std::to_string(budget));
}

SpatialGrid make_spatial_grid(int dim, std::array<double, 2> lower, std::array<double, 2> upper,
                              std::array<std::size_t, 2> nodes) {
    SpatialGrid g;
    g.dim = dim;
    g.origin = lower;
    if (dim == 1) {
        nodes[1] = 1;
        g.origin[1] = 0.0;
    }
    g.extents = nodes;
    if (nodes[0] < 2) throw ParameterError("every grid axis needs at least 2 nodes");
    g.h = (upper[0] - lower[0]) / static_cast<double>(nodes[0] - 1);
    if (dim == 2) {
        if (nodes[1] < 2) throw ParameterError("every grid axis needs at least 2 nodes");
        const double hy = (upper[1] - lower[1]) / static_cast<double>(nodes[1] - 1);
        if (std::fabs(hy - g.h) > 1e-12 * std::fabs(g.h))
            throw ParameterError("grid spacing must be equal along both axes");
    }
    g.validate();
    return g;
}

ScalarField::ScalarField(SpaceTimeGrid grid, double fill)
    : grid_(grid), values_(grid.value_count(), fill) {
    grid_.validate();
}

ScalarField::ScalarField(SpaceTimeGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    grid_.validate();
    if (values_.size() != grid_.value_count())
        throw InvalidInput("field value count does not match the grid");
}

std::span<double> ScalarField::slice(std::size_t level) {
    const std::size_t n = grid_.space.node_count();
    return {values_.data() + level * n, n};
}

std::span<const double> ScalarField::slice(std::size_t level) const {
    const std::size_t n = grid_.space.node_count();
    return {values_.data() + level * n, n};
}

bool ScalarField::all_finite() const noexcept {
    for (double v : values_)
        if (!std::isfinite(v)) return false;
    return true;
}

VectorSlice::VectorSlice(int d, std::size_t nodes) : dim(d) {
    comp[0].assign(nodes, 0.0);
    if (d == 2) comp[1].assign(nodes, 0.0);
}

std::vector<double> VectorSlice::magnitude() const {
    std::vector<double> r(size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        r[k] = dim == 1 ? std::fabs(comp[0][k]) : std::sqrt(comp[0][k] * comp[0][k] + comp[1][k] * comp[1][k]);
    }
    return r;
}

namespace {

constexpr double kGeomSlack = 1e-12;

}  // namespace

bool fits(const SpaceTimeGrid& grid, const ParabolicCylinder& q) noexcept {
    if (!(q.rho > 0.0)) return false;
    const auto& s = grid.space;
    for (int a = 0; a < s.dim; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        if (q.x0[ua] - q.rho < s.origin[ua] - kGeomSlack) return false;
        if (q.x0[ua] + q.rho > s.upper(a) + kGeomSlack) return false;
    }
    if (q.t0 - q.rho * q.rho < grid.t0 - kGeomSlack) return false;
    if (q.t0 > grid.t_end() + kGeomSlack) return false;
    return true;
}

CylinderNodes realize(const SpaceTimeGrid& grid, const ParabolicCylinder& q) {
    if (!fits(grid, q))
        throw GeometryError("cylinder with rho = " + std::to_string(q.rho) + " and vertex t0 = " +
                            std::to_string(q.t0) + " does not fit inside the grid");
    const auto& s = grid.space;
    CylinderNodes c;
    c.spatial_measure = s.cell_volume();
    c.node_measure = c.spatial_measure * grid.tau;
    const double r2 = q.rho * q.rho;
    for (std::size_t node = 0; node < s.node_count(); ++node) {
        double d2 = 0.0;
        for (int a = 0; a < s.dim; ++a) {
            const double d = s.coord(node, a) - q.x0[static_cast<std::size_t>(a)];
            d2 += d * d;
        }
        if (d2 < r2) c.nodes.push_back(node);
    }
    const double t_lo = q.t0 - r2;
    for (std::size_t k = 0; k < grid.levels(); ++k) {
        const double t = grid.time(k);
        if (t > t_lo + kGeomSlack && t <= q.t0 + kGeomSlack) c.levels.push_back(k);
    }
    if (c.nodes.empty() || c.levels.empty())
        throw DegenerateRegion("cylinder with rho = " + std::to_string(q.rho) + " contains no grid node");
    return c;
}

}  // namespace llab

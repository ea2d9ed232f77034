#include "llab/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "llab/error.hpp"
#include "llab/kernels.hpp"

namespace llab {

namespace {

void require_slice(const SpatialGrid& grid, std::size_t size) {
    if (size != grid.node_count()) throw InvalidInput("slice size does not match the grid");
}

// One-sided first-order closure at the two ends of every x row.
void close_x(const double* u, double* out, std::size_t nx, std::size_t ny, double invh) {
    for (std::size_t j = 0; j < ny; ++j) {
        const double* row = u + j * nx;
        double* o = out + j * nx;
        o[0] = (row[1] - row[0]) * invh;
        o[nx - 1] = (row[nx - 1] - row[nx - 2]) * invh;
    }
}

void close_y(const double* u, double* out, std::size_t nx, std::size_t ny, double invh) {
    const double* r0 = u;
    const double* r1 = u + nx;
    const double* rm = u + (ny - 2) * nx;
    const double* rl = u + (ny - 1) * nx;
    double* o0 = out;
    double* ol = out + (ny - 1) * nx;
    for (std::size_t i = 0; i < nx; ++i) {
        o0[i] = (r1[i] - r0[i]) * invh;
        ol[i] = (rl[i] - rm[i]) * invh;
    }
}

}  // namespace

VectorSlice gradient(const SpatialGrid& grid, std::span<const double> u) {
    require_slice(grid, u.size());
    const auto& k = kernels::active();
    const std::size_t nx = grid.extents[0];
    const std::size_t ny = grid.extents[1];
    const double inv2h = 0.5 / grid.h;
    const double invh = 1.0 / grid.h;
    VectorSlice g(grid.dim, grid.node_count());
    k.centered_diff_x(u.data(), g.comp[0].data(), nx, ny, inv2h);
    close_x(u.data(), g.comp[0].data(), nx, ny, invh);
    if (grid.dim == 2) {
        k.centered_diff_y(u.data(), g.comp[1].data(), nx, ny, inv2h);
        close_y(u.data(), g.comp[1].data(), nx, ny, invh);
    }
    return g;
}

VectorField gradient(const ScalarField& u) {
    VectorField v;
    v.grid = u.grid();
    v.levels.reserve(v.grid.levels());
    for (std::size_t l = 0; l < v.grid.levels(); ++l) v.levels.push_back(gradient(v.grid.space, u.slice(l)));
    return v;
}

std::vector<double> divergence(const SpatialGrid& grid, const VectorSlice& f) {
    require_slice(grid, f.size());
    if (f.dim != grid.dim) throw InvalidInput("vector slice dimension does not match the grid");
    const auto& k = kernels::active();
    const std::size_t nx = grid.extents[0];
    const std::size_t ny = grid.extents[1];
    const double inv2h = 0.5 / grid.h;
    const double invh = 1.0 / grid.h;
    std::vector<double> out(grid.node_count(), 0.0);

    k.centered_diff_x(f.comp[0].data(), out.data(), nx, ny, inv2h);
    for (std::size_t j = 0; j < ny; ++j) {
        const double* row = f.comp[0].data() + j * nx;
        double* o = out.data() + j * nx;
        o[0] = (row[0] + row[1]) * invh;
        o[nx - 1] = -(row[nx - 2] + row[nx - 1]) * invh;
    }
    if (grid.dim == 2) {
        std::vector<double> dy(grid.node_count(), 0.0);
        const double* fy = f.comp[1].data();
        k.centered_diff_y(fy, dy.data(), nx, ny, inv2h);
        for (std::size_t i = 0; i < nx; ++i) {
            dy[i] = (fy[i] + fy[nx + i]) * invh;
            dy[(ny - 1) * nx + i] = -(fy[(ny - 2) * nx + i] + fy[(ny - 1) * nx + i]) * invh;
        }
        for (std::size_t n = 0; n < out.size(); ++n) out[n] += dy[n];
    }
    return out;
}

namespace {

/// Neumaier-compensated running sum.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double t = sum + x;
        carry += std::fabs(sum) >= std::fabs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + carry; }
};

void accumulate(CompensatedSum& acc, const SpatialGrid& grid, std::span<const double> a, std::span<const double> b) {
    require_slice(grid, a.size());
    require_slice(grid, b.size());
    for (std::size_t n = 0; n < a.size(); ++n) acc.add(grid.sbp_weight(n) * a[n] * b[n]);
}

}  // namespace

double inner(const SpatialGrid& grid, std::span<const double> a, std::span<const double> b) {
    CompensatedSum acc;
    accumulate(acc, grid, a, b);
    return acc.value();
}

double inner(const SpatialGrid& grid, const VectorSlice& a, const VectorSlice& b) {
    CompensatedSum acc;
    accumulate(acc, grid, a.comp[0], b.comp[0]);
    if (grid.dim == 2) accumulate(acc, grid, a.comp[1], b.comp[1]);
    return acc.value();
}

namespace {

long aligned_steps(const SpatialGrid& grid, double hstep) {
    if (hstep == 0.0 || !std::isfinite(hstep)) throw AlignmentError("shift step must be a nonzero finite number");
    const double ratio = hstep / grid.h;
    const double k = std::round(ratio);
    if (k == 0.0 || std::fabs(ratio - k) > 1e-9 * std::max(1.0, std::fabs(k)))
        throw AlignmentError("shift step " + std::to_string(hstep) + " is not an integer multiple of h = " +
                             std::to_string(grid.h));
    return static_cast<long>(k);
}

}  // namespace

ShiftedSlice tau_shift(const SpatialGrid& grid, std::span<const double> f, int axis, double hstep) {
    require_slice(grid, f.size());
    if (axis < 0 || axis >= grid.dim) throw InvalidInput("shift axis out of range");
    const long k = aligned_steps(grid, hstep);
    const long m = std::labs(k);
    const long nx = static_cast<long>(grid.extents[0]);
    const long ny = static_cast<long>(grid.extents[1]);

    ShiftedSlice s;
    s.values.assign(f.size(), 0.0);
    s.valid.assign(f.size(), 0);
    for (long j = 0; j < ny; ++j) {
        for (long i = 0; i < nx; ++i) {
            // dist(x, boundary) > |h| in every direction
            if (i <= m || i >= nx - 1 - m) continue;
            if (grid.dim == 2 && (j <= m || j >= ny - 1 - m)) continue;
            const long si = axis == 0 ? i + k : i;
            const long sj = axis == 1 ? j + k : j;
            const auto node = static_cast<std::size_t>(j * nx + i);
            const auto shifted = static_cast<std::size_t>(sj * nx + si);
            s.values[node] = f[shifted] - f[node];
            s.valid[node] = 1;
            ++s.valid_count;
        }
    }
    if (s.valid_count == 0) throw DegenerateRegion("shrunk domain for this shift step is empty");
    return s;
}

ShiftedSlice difference_quotient(const SpatialGrid& grid, std::span<const double> f, int axis, double hstep) {
    ShiftedSlice s = tau_shift(grid, f, axis, hstep);
    for (std::size_t n = 0; n < s.values.size(); ++n)
        if (s.valid[n]) s.values[n] /= hstep;
    return s;
}

namespace {

double bump(double s) { return s < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; }

}  // namespace

MollifierKernel make_mollifier(const SpaceTimeGrid& grid, double epsilon) {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ParameterError("mollifier radius must be >= 0");
    MollifierKernel m;
    m.epsilon = epsilon;
    if (epsilon == 0.0) {
        m.spatial.push_back({0, 0, 1.0});
        m.temporal.push_back({0, 1.0});
        return m;
    }
    const double h = grid.space.h;
    const int rs = static_cast<int>(std::ceil(epsilon / h));
    const int rj = grid.space.dim == 2 ? rs : 0;
    double total = 0.0;
    for (int dj = -rj; dj <= rj; ++dj) {
        for (int di = -rs; di <= rs; ++di) {
            if (di == 0 && dj == 0) continue;
            const double r = std::sqrt(static_cast<double>(di * di + dj * dj)) * h;
            if (!(r < epsilon)) continue;
            const double w = bump(r / epsilon);
            if (w <= 0.0) continue;
            m.spatial.push_back({di, dj, w});
            m.spatial_radius = std::max(m.spatial_radius, r);
            total += w;
        }
    }
    total += bump(0.0);
    double others = 0.0;
    for (auto& t : m.spatial) {
        t.w /= total;
        others += t.w;
    }
    m.spatial.push_back({0, 0, 1.0 - others});

    const double tau = grid.tau;
    const int rt = static_cast<int>(std::ceil(epsilon / tau));
    total = 0.0;
    for (int dk = -rt; dk <= rt; ++dk) {
        if (dk == 0) continue;
        const double r = std::fabs(static_cast<double>(dk)) * tau;
        if (!(r < epsilon)) continue;
        const double w = bump(r / epsilon);
        if (w <= 0.0) continue;
        m.temporal.push_back({dk, w});
        m.temporal_radius = std::max(m.temporal_radius, r);
        total += w;
    }
    total += bump(0.0);
    others = 0.0;
    for (auto& t : m.temporal) {
        t.w /= total;
        others += t.w;
    }
    m.temporal.push_back({0, 1.0 - others});
    return m;
}

ScalarField mollify(const ScalarField& f, double epsilon) {
    if (epsilon == 0.0) return f;
    const SpaceTimeGrid& g = f.grid();
    const MollifierKernel m = make_mollifier(g, epsilon);
    const long nx = static_cast<long>(g.space.extents[0]);
    const long ny = static_cast<long>(g.space.extents[1]);
    const std::size_t nodes = g.space.node_count();
    const long levels = static_cast<long>(g.levels());

    std::vector<double> space_pass(f.values().size(), 0.0);
    for (long l = 0; l < levels; ++l) {
        const auto src = f.slice(static_cast<std::size_t>(l));
        double* dst = space_pass.data() + static_cast<std::size_t>(l) * nodes;
        for (long j = 0; j < ny; ++j) {
            for (long i = 0; i < nx; ++i) {
                double acc = 0.0;
                for (const auto& t : m.spatial) {
                    // f(x - eps y): sample at x - offset
                    const long si = i - t.di;
                    const long sj = j - t.dj;
                    if (si < 0 || si >= nx || sj < 0 || sj >= ny) continue;
                    acc += t.w * src[static_cast<std::size_t>(sj * nx + si)];
                }
                dst[j * nx + i] = acc;
            }
        }
    }

    ScalarField out(g, 0.0);
    auto& ov = out.mutable_values();
    for (long l = 0; l < levels; ++l) {
        double* dst = ov.data() + static_cast<std::size_t>(l) * nodes;
        for (const auto& t : m.temporal) {
            const long sl = l - t.dk;
            if (sl < 0 || sl >= levels) continue;
            const double* src = space_pass.data() + static_cast<std::size_t>(sl) * nodes;
            for (std::size_t n = 0; n < nodes; ++n) dst[n] += t.w * src[n];
        }
    }
    return out;
}

ScalarField magnitude(const VectorField& v) {
    ScalarField out(v.grid, 0.0);
    const auto& k = kernels::active();
    for (std::size_t l = 0; l < v.levels.size(); ++l) {
        const VectorSlice& s = v.levels[l];
        auto dst = out.slice(l);
        k.radial_norm(s.comp[0].data(), s.dim == 2 ? s.comp[1].data() : nullptr, dst.data(), dst.size());
    }
    return out;
}

namespace {

double slice_power_sum(std::span<const double> slice, const std::vector<std::size_t>& nodes, double exponent,
                       std::vector<double>& buffer) {
    buffer.resize(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) buffer[k] = slice[nodes[k]];
    return kernels::active().power_sum(buffer.data(), buffer.size(), exponent);
}

void require_exponent(double q) {
    if (!(q > 0.0) || !std::isfinite(q)) throw ParameterError("integration exponent must be positive");
}

}  // namespace

double cylinder_integral(const ScalarField& f, const CylinderNodes& q, double exponent) {
    require_exponent(exponent);
    std::vector<double> buffer;
    double total = 0.0;
    for (std::size_t l : q.levels) total += slice_power_sum(f.slice(l), q.nodes, exponent, buffer);
    return total * q.node_measure;
}

double cylinder_norm(const ScalarField& f, const ParabolicCylinder& q, double exponent) {
    const CylinderNodes c = realize(f.grid(), q);
    return std::pow(cylinder_integral(f, c, exponent), 1.0 / exponent);
}

double sup_time_slice_integral(const ScalarField& f, const CylinderNodes& q, double exponent) {
    require_exponent(exponent);
    std::vector<double> buffer;
    double best = 0.0;
    for (std::size_t l : q.levels)
        best = std::max(best, slice_power_sum(f.slice(l), q.nodes, exponent, buffer) * q.spatial_measure);
    return best;
}

double sup_time_slice_norm(const ScalarField& f, const ParabolicCylinder& q) {
    const CylinderNodes c = realize(f.grid(), q);
    return std::sqrt(sup_time_slice_integral(f, c, 2.0));
}

InequalityPair interpolation_check(const ScalarField& v, const ParabolicCylinder& q, double p, double qexp) {
    if (!(p >= 1.0) || !(qexp >= 1.0)) throw ParameterError("interpolation exponents must be >= 1");
    const CylinderNodes c = realize(v.grid(), q);
    const double n = static_cast<double>(v.grid().space.dim);
    InequalityPair r;
    r.lhs = cylinder_integral(v, c, p + p * qexp / n);
    const ScalarField dv = magnitude(gradient(v));
    const double sup = sup_time_slice_integral(v, c, qexp);
    const double grad = cylinder_integral(dv, c, p);
    r.rhs = sup == 0.0 ? 0.0 : std::pow(sup, p / n) * grad;
    return r;
}

namespace {

std::vector<std::size_t> ball_nodes(const SpatialGrid& grid, std::array<double, 2> x0, double rho) {
    std::vector<std::size_t> nodes;
    const double r2 = rho * rho;
    for (std::size_t n = 0; n < grid.node_count(); ++n) {
        double d2 = 0.0;
        for (int a = 0; a < grid.dim; ++a) {
            const double d = grid.coord(n, a) - x0[static_cast<std::size_t>(a)];
            d2 += d * d;
        }
        if (d2 < r2) nodes.push_back(n);
    }
    return nodes;
}

}  // namespace

DifferenceQuotientCheck difference_quotient_check(const SpatialGrid& grid, std::span<const double> f, int axis,
                                                  double hstep, std::array<double, 2> x0, double rho,
                                                  double qexp) {
    require_slice(grid, f.size());
    require_exponent(qexp);
    if (axis < 0 || axis >= grid.dim) throw InvalidInput("shift axis out of range");
    const long k = aligned_steps(grid, hstep);
    const double big = rho + std::fabs(hstep);
    for (int a = 0; a < grid.dim; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        if (x0[ua] - big < grid.origin[ua] - 1e-12 || x0[ua] + big > grid.upper(a) + 1e-12)
            throw GeometryError("enlarged ball does not fit inside the grid");
    }
    const auto inner_nodes = ball_nodes(grid, x0, rho);
    const auto outer_nodes = ball_nodes(grid, x0, big);
    if (inner_nodes.empty()) throw DegenerateRegion("ball contains no grid node");

    const long stride = axis == 0 ? k : k * static_cast<long>(grid.extents[0]);
    std::vector<double> diff(inner_nodes.size());
    std::vector<double> moved(inner_nodes.size());
    for (std::size_t m = 0; m < inner_nodes.size(); ++m) {
        const auto shifted = static_cast<std::size_t>(static_cast<long>(inner_nodes[m]) + stride);
        moved[m] = f[shifted];
        diff[m] = f[shifted] - f[inner_nodes[m]];
    }
    const VectorSlice g = gradient(grid, f);
    const std::vector<double> dmag = g.magnitude();
    std::vector<double> outer_grad(outer_nodes.size());
    std::vector<double> outer_val(outer_nodes.size());
    for (std::size_t m = 0; m < outer_nodes.size(); ++m) {
        outer_grad[m] = dmag[outer_nodes[m]];
        outer_val[m] = f[outer_nodes[m]];
    }
    const auto& ker = kernels::active();
    const double vol = grid.cell_volume();
    DifferenceQuotientCheck r;
    r.shift.lhs = ker.power_sum(diff.data(), diff.size(), qexp) * vol;
    r.shift.rhs = std::pow(std::fabs(hstep), qexp) * ker.power_sum(outer_grad.data(), outer_grad.size(), qexp) * vol;
    r.translate.lhs = ker.power_sum(moved.data(), moved.size(), qexp) * vol;
    r.translate.rhs = ker.power_sum(outer_val.data(), outer_val.size(), qexp) * vol;
    return r;
}

}  // namespace llab

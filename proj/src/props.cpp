#include "llab/props.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "llab/calculus.hpp"
#include "llab/error.hpp"
#include "llab/flux.hpp"

namespace llab {

namespace {

using Rng = std::mt19937_64;

Rng case_rng(std::uint64_t seed, std::uint64_t tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
    return Rng(seq);
}

SpatialVector uniform_vector(Rng& rng, int n, double scale) {
    std::uniform_real_distribution<double> d(-scale, scale);
    SpatialVector v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = d(rng);
    return v;
}

SpatialVector direction(Rng& rng, int n) {
    std::normal_distribution<double> d;
    SpatialVector v(static_cast<std::size_t>(n));
    double m = 0.0;
    while (m < 1e-6) {
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = d(rng);
        m = v.norm();
    }
    v *= 1.0 / m;
    return v;
}

// three regimes: independent at the scale of nu, near-coincident, log-uniform
void draw_pair(Rng& rng, int n, double nu, SpatialVector& xi, SpatialVector& eta) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double scale = 3.0 * (nu + 1.0);
    const double regime = u01(rng);
    if (regime < 0.4) {
        xi = uniform_vector(rng, n, scale);
        eta = uniform_vector(rng, n, scale);
    } else if (regime < 0.7) {
        xi = uniform_vector(rng, n, scale);
        const double r = std::pow(10.0, -6.0 * u01(rng));
        eta = xi + r * direction(rng, n);
    } else {
        const double a = (nu + 1.0) * std::pow(10.0, -3.0 + 4.0 * u01(rng));
        const double b = (nu + 1.0) * std::pow(10.0, -3.0 + 4.0 * u01(rng));
        xi = a * direction(rng, n);
        eta = b * direction(rng, n);
    }
}

double slack(double big, double small) { return (big - small) / (1.0 + std::fabs(big)); }

void record(SweepCase& c, double s, double tol) {
    c.min_slack = std::min(c.min_slack, s);
    if (!(s >= -tol)) ++c.violations;
}

SweepCase blank(const char* name, double p, double nu, int n, std::uint64_t samples) {
    SweepCase c;
    c.inequality = name;
    c.p = p;
    c.nu = nu;
    c.n = n;
    c.samples = samples;
    c.min_slack = std::numeric_limits<double>::infinity();
    return c;
}

void finish(SweepCase& c) {
    if (c.samples == 0) c.min_slack = 0.0;
}

}  // namespace

void SweepConfig::validate() const {
    if (p.empty() || nu.empty() || n.empty()) throw ParameterError("sweep grids must be nonempty");
    for (double v : p)
        if (!(v >= 2.0) || !std::isfinite(v)) throw ParameterError("sweep p must be >= 2");
    for (double v : nu)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("sweep nu must be >= 0");
    for (int v : n)
        if (v < 1 || v > static_cast<int>(kMaxDim)) throw ParameterError("sweep n must be 1, 2 or 3");
    if (!(tolerance >= 0.0)) throw ParameterError("sweep tolerance must be >= 0");
}

bool SweepReport::pass() const {
    return std::all_of(cases.begin(), cases.end(), [](const SweepCase& c) { return c.violations == 0; });
}

SweepReport flux_gap_sweep(const SweepConfig& cfg) {
    cfg.validate();
    SweepReport r;
    std::uint64_t tag = 0;
    SpatialVector xi, eta;
    for (double p : cfg.p)
        for (double nu : cfg.nu)
            for (int n : cfg.n) {
                Rng rng = case_rng(cfg.seed, tag++);
                SweepCase mono = blank("H monotonicity", p, nu, n, cfg.samples);
                SweepCase lip = blank("H Lipschitz", p, nu, n, cfg.samples);
                for (std::uint64_t s = 0; s < cfg.samples; ++s) {
                    draw_pair(rng, n, nu, xi, eta);
                    const GapPair m = flux_monotonicity_gap(xi, eta, p, nu);
                    const GapPair l = flux_lipschitz_gap(xi, eta, p, nu);
                    record(mono, slack(m.lhs, m.rhs), cfg.tolerance);
                    record(lip, slack(l.rhs, l.lhs), cfg.tolerance);
                }
                finish(mono);
                finish(lip);
                r.cases.push_back(mono);
                r.cases.push_back(lip);
            }
    return r;
}

SweepReport vp_gap_sweep(const SweepConfig& cfg) {
    cfg.validate();
    SweepReport r;
    std::uint64_t tag = 1u << 20;
    SpatialVector xi, eta;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (double p : cfg.p)
        for (int n : cfg.n) {
            Rng rng = case_rng(cfg.seed, tag++);
            SweepCase mono = blank("V_p monotonicity", p, nan, n, cfg.samples);
            SweepCase lip = blank("V_p Lipschitz", p, nan, n, cfg.samples);
            for (std::uint64_t s = 0; s < cfg.samples; ++s) {
                draw_pair(rng, n, 0.0, xi, eta);
                const VpGaps g = vp_gaps(xi, eta, p);
                record(mono, slack(g.mono_rhs, g.mono_lhs), cfg.tolerance);
                record(lip, slack(g.lip_rhs, g.lip_lhs), cfg.tolerance);
            }
            finish(mono);
            finish(lip);
            r.cases.push_back(mono);
            r.cases.push_back(lip);
        }
    return r;
}

JacobianSweep jacobian_sweep(std::uint64_t points, std::uint64_t seed, double step) {
    if (!(step > 0.0)) throw ParameterError("finite-difference step must be positive");
    Rng rng = case_rng(seed, 1u << 21);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double eps_values[] = {0.01, 0.1, 1.0};
    const double p_values[] = {2.0, 3.0, 4.0};
    JacobianSweep out;
    for (std::uint64_t s = 0; s < points; ++s) {
        const FluxParams prm{p_values[s % 3], 2.0 * u01(rng), eps_values[(s / 3) % 3]};
        const int n = 2 + static_cast<int>((s / 9) % 2);
        const SpatialVector xi = uniform_vector(rng, n, 3.0);
        const double r = xi.norm();
        // central stencil must not cross the kink sphere |xi| = nu or the origin
        if (std::fabs(r - prm.nu) <= 4.0 * step || r <= 4.0 * step) {
            ++out.skipped;
            continue;
        }
        const SmallMatrix J = regularized_flux_jacobian(xi, prm);
        double diff = 0.0, mag = 0.0;
        for (int j = 0; j < n; ++j) {
            SpatialVector a = xi, b = xi;
            a[static_cast<std::size_t>(j)] += step;
            b[static_cast<std::size_t>(j)] -= step;
            const SpatialVector fa = regularized_flux(a, prm);
            const SpatialVector fb = regularized_flux(b, prm);
            for (int i = 0; i < n; ++i) {
                const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
                const double fd = (fa[ui] - fb[ui]) / (2.0 * step);
                diff = std::max(diff, std::fabs(J(ui, uj) - fd));
                mag = std::max(mag, std::fabs(J(ui, uj)));
            }
        }
        out.max_rel_error = std::max(out.max_rel_error, diff / (1.0 + mag));
        ++out.points;
    }
    return out;
}

std::vector<double> smooth_slice(const SpatialGrid& grid, std::uint64_t seed) {
    Rng rng = case_rng(seed, 1u << 22);
    std::uniform_real_distribution<double> amp(0.3, 1.0), freq(0.5, 2.0), phase(0.0, 2.0 * std::numbers::pi);
    struct Mode {
        double a, k1, k2, p1, p2;
    };
    Mode modes[3];
    for (auto& m : modes) m = {amp(rng), freq(rng), freq(rng), phase(rng), phase(rng)};
    std::vector<double> v(grid.node_count());
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double x = grid.coord(k, 0), y = grid.dim == 2 ? grid.coord(k, 1) : 0.0;
        double s = 0.0;
        for (const auto& m : modes) s += m.a * std::sin(2.0 * std::numbers::pi * m.k1 * x + m.p1) * std::cos(2.0 * std::numbers::pi * m.k2 * y + m.p2);
        v[k] = s;
    }
    return v;
}

ScalarField smooth_bump_field(const SpaceTimeGrid& grid, std::uint64_t seed, std::array<double, 2> centre,
                              double radius) {
    if (!(radius > 0.0)) throw ParameterError("bump radius must be positive");
    Rng rng = case_rng(seed, 1u << 23);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double a = 0.2 + 0.3 * u01(rng), b = 0.5 * u01(rng);
    const double k1 = 1.0 + 3.0 * u01(rng), k2 = 1.0 + 3.0 * u01(rng), ph = 6.0 * u01(rng);
    const double amp = 0.5 + 1.5 * u01(rng);
    ScalarField v(grid, 0.0);
    const auto& sg = grid.space;
    for (std::size_t l = 0; l < grid.levels(); ++l) {
        const double t = grid.time(l);
        for (std::size_t k = 0; k < sg.node_count(); ++k) {
            const double x = sg.coord(k, 0) - centre[0];
            const double y = sg.dim == 2 ? sg.coord(k, 1) - centre[1] : 0.0;
            const double r2 = (x * x + y * y) / (radius * radius);
            if (r2 >= 1.0) continue;
            const double w = (1.0 - r2) * (1.0 - r2) * (1.0 - r2);
            v.at(l, k) = amp * w * (1.0 + a * std::sin(k1 * x + k2 * y + ph)) * (1.0 + b * t);
        }
    }
    return v;
}

bool CalculusLemmaSweep::shift_stable() const {
    return std::isfinite(shift_constant_h) && std::isfinite(shift_constant_2h) && shift_constant_2h > 0.0 &&
           std::fabs(shift_constant_h / shift_constant_2h - 1.0) <= tolerance;
}

bool CalculusLemmaSweep::interp_stable() const {
    return std::isfinite(interp_constant_coarse) && std::isfinite(interp_constant_fine) &&
           interp_constant_coarse > 0.0 && std::fabs(interp_constant_fine / interp_constant_coarse - 1.0) <= tolerance;
}

CalculusLemmaSweep calculus_lemma_sweep(std::size_t fields, std::uint64_t seed) {
    CalculusLemmaSweep out;
    out.fields = fields;
    if (fields == 0) return out;

    const SpatialGrid g = make_spatial_grid(2, {0.0, 0.0}, {1.0, 1.0}, {129, 129});
    auto st = [](std::size_t nodes) {
        SpaceTimeGrid s;
        s.space = make_spatial_grid(2, {0.0, 0.0}, {1.0, 1.0}, {nodes, nodes});
        s.tau = 0.01;
        s.steps = 40;
        return s;
    };
    const SpaceTimeGrid coarse = st(65), fine = st(129);
    const ParabolicCylinder q{{0.5, 0.5}, 0.4, 0.35};

    for (std::size_t i = 0; i < fields; ++i) {
        const std::uint64_t s = seed * 1000003u + i;
        const auto f = smooth_slice(g, s);
        const int axis = static_cast<int>(i % 2);
        const auto a = difference_quotient_check(g, f, axis, 2.0 * g.h, {0.5, 0.5}, 0.3, 2.0);
        const auto b = difference_quotient_check(g, f, axis, 4.0 * g.h, {0.5, 0.5}, 0.3, 2.0);
        out.shift_constant_h = std::max(out.shift_constant_h, a.shift.lhs / a.shift.rhs);
        out.shift_constant_2h = std::max(out.shift_constant_2h, b.shift.lhs / b.shift.rhs);
        for (const auto* c : {&a, &b})
            if (!(c->translate.lhs <= c->translate.rhs * (1.0 + 1e-12))) out.translate_ok = false;

        const auto vc = smooth_bump_field(coarse, s, {0.5, 0.5}, 0.3);
        const auto vf = smooth_bump_field(fine, s, {0.5, 0.5}, 0.3);
        const auto ic = interpolation_check(vc, q, 2.0, 2.0);
        const auto iff = interpolation_check(vf, q, 2.0, 2.0);
        out.interp_constant_coarse = std::max(out.interp_constant_coarse, ic.lhs / ic.rhs);
        out.interp_constant_fine = std::max(out.interp_constant_fine, iff.lhs / iff.rhs);
    }
    return out;
}

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json to_json(const SweepReport& r) {
    nlohmann::json cases = nlohmann::json::array();
    for (const auto& c : r.cases)
        cases.push_back({{"inequality", c.inequality},
                         {"p", c.p},
                         {"nu", finite_or_null(c.nu)},
                         {"n", c.n},
                         {"samples", c.samples},
                         {"min_slack", c.min_slack},
                         {"violations", c.violations}});
    return {{"cases", cases}, {"pass", r.pass()}};
}

nlohmann::json to_json(const JacobianSweep& r) {
    return {{"points", r.points}, {"skipped", r.skipped}, {"max_rel_error", r.max_rel_error}};
}

nlohmann::json to_json(const CalculusLemmaSweep& r) {
    return {{"fields", r.fields},
            {"shift_constant_h", r.shift_constant_h},
            {"shift_constant_2h", r.shift_constant_2h},
            {"translate_ok", r.translate_ok},
            {"interpolation_constant_coarse", r.interp_constant_coarse},
            {"interpolation_constant_fine", r.interp_constant_fine},
            {"tolerance", r.tolerance},
            {"pass", r.pass()}};
}

}  // namespace llab

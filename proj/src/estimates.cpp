#include "llab/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "llab/error.hpp"
#include "llab/kernels.hpp"

namespace llab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double integral(const ScalarField& f, const CylinderNodes& q, double exponent) {
    return cylinder_integral(f, q, exponent);
}

double norm(const ScalarField& f, const CylinderNodes& q, double exponent) {
    return std::pow(cylinder_integral(f, q, exponent), 1.0 / exponent);
}

// Scalar field with the same grid and f(level, node) = op(level, node).
template <class Op>
ScalarField build(const SpaceTimeGrid& g, Op op) {
    ScalarField out(g, 0.0);
    for (std::size_t l = 0; l < g.levels(); ++l) {
        auto s = out.slice(l);
        op(l, s);
    }
    return out;
}

VectorSlice h_of_gradient(const SpatialGrid& g, std::span<const double> u, double lambda, double nu) {
    const VectorSlice d = gradient(g, u);
    VectorSlice h(g.dim, g.node_count());
    const bool two = g.dim == 2;
    kernels::active().radial_map(d.comp[0].data(), two ? d.comp[1].data() : nullptr, h.comp[0].data(),
                                 two ? h.comp[1].data() : nullptr, d.size(), {nu, lambda, 0.0, 0.0});
    return h;
}

// Frobenius norm of the discrete gradient of a vector slice.
std::vector<double> jacobian_norm(const SpatialGrid& g, const VectorSlice& h) {
    std::vector<double> out(g.node_count(), 0.0);
    for (int a = 0; a < g.dim; ++a) {
        const VectorSlice d = gradient(g, h.comp[static_cast<std::size_t>(a)]);
        for (int b = 0; b < g.dim; ++b) {
            const auto& c = d.comp[static_cast<std::size_t>(b)];
            for (std::size_t k = 0; k < out.size(); ++k) out[k] += c[k] * c[k];
        }
    }
    for (double& x : out) x = std::sqrt(x);
    return out;
}

ScalarField gradient_magnitude(const ScalarField& u) {
    const auto& sg = u.grid().space;
    return build(u.grid(), [&](std::size_t l, std::span<double> s) {
        const auto m = gradient(sg, u.slice(l)).magnitude();
        std::copy(m.begin(), m.end(), s.begin());
    });
}

void add_term(EstimateReport& r, std::string name, double value, double degree) {
    r.terms.push_back({std::move(name), value, degree});
}

nlohmann::json cyl_json(const std::string& name, const ParabolicCylinder& q) {
    return {{"name", name}, {"x0", {q.x0[0], q.x0[1]}}, {"t0", q.t0}, {"rho", q.rho}};
}

double maybe(double x) { return std::isfinite(x) ? x : kNaN; }

}  // namespace

double EstimateReport::constant() const {
    if (rhs == 0.0) return lhs == 0.0 ? kNaN : std::numeric_limits<double>::infinity();
    return lhs / rhs;
}

ReportStatus EstimateReport::status() const {
    if (!std::isfinite(lhs) || !std::isfinite(rhs) || lhs < 0.0 || rhs < 0.0) return ReportStatus::violation;
    if (lhs == 0.0 && rhs == 0.0) return ReportStatus::vacuous;
    if (rhs == 0.0) return ReportStatus::violation;
    return ReportStatus::pass;
}

const ReportTerm* EstimateReport::term(const std::string& name) const {
    for (const auto& t : terms)
        if (t.name == name) return &t;
    return nullptr;
}

std::vector<CylinderSet> make_family(const SpaceTimeGrid& grid, const EstimateConfig& cfg) {
    const auto& s = grid.space;
    const double t0 = cfg.t0.value_or(grid.t_end());
    double room = std::numeric_limits<double>::infinity();
    for (int a = 0; a < s.dim; ++a) {
        const double x = cfg.x0[static_cast<std::size_t>(a)];
        const double lo = x - s.origin[static_cast<std::size_t>(a)];
        const double hi = s.upper(a) - x;
        if (lo <= 0.0 || hi <= 0.0) throw GeometryError("estimate vertex x0 lies outside the domain");
        room = std::min({room, lo, hi});
    }
    if (!(t0 > grid.t0) || t0 > grid.t_end() + 1e-12) throw GeometryError("estimate vertex t0 lies outside (t0, T]");
    room = std::min(room, std::sqrt(t0 - grid.t0));
    const double R0 = cfg.R0.value_or(room * (1.0 - 1e-9));
    if (!(R0 > 0.0)) throw GeometryError("R0 must be positive");
    const ParabolicCylinder outer{cfg.x0, t0, R0};
    if (!fits(grid, outer))
        throw GeometryError("cylinder Q_R0 with R0 = " + std::to_string(R0) + " does not fit inside the grid");
    std::vector<CylinderSet> out;
    const int n = std::max(cfg.family, 1);
    for (int i = 0; i < n; ++i) {
        const double frac = n == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        CylinderSet c;
        c.x0 = cfg.x0;
        c.t0 = t0;
        c.rho = R0 * (0.25 + 0.25 * frac);
        c.R = std::min(cfg.radius_factor * c.rho, R0);
        c.R0 = R0;
        out.push_back(c);
    }
    return out;
}

ScalarField dh_magnitude(const ScalarField& u, double lambda, double nu) {
    const auto& sg = u.grid().space;
    return build(u.grid(), [&](std::size_t l, std::span<double> s) {
        const auto m = jacobian_norm(sg, h_of_gradient(sg, u.slice(l), lambda, nu));
        std::copy(m.begin(), m.end(), s.begin());
    });
}

SolutionView analyze(const ScalarField& u, const ScalarField& f_eps, const ScalarField& f, const FluxParams& params) {
    if (!(f_eps.grid() == u.grid()) || !(f.grid() == u.grid())) throw InvalidInput("fields live on different grids");
    SolutionView v;
    v.params = params;
    v.u = u;
    v.f_eps = f_eps;
    v.f = f;
    v.grad_mag = gradient_magnitude(u);
    v.excess = build(u.grid(), [&](std::size_t l, std::span<double> s) {
        const auto g = v.grad_mag.slice(l);
        for (std::size_t k = 0; k < s.size(); ++k) s[k] = std::max(g[k] - params.nu, 0.0);
    });
    v.dh_half = dh_magnitude(u, params.p / 2.0, params.nu);
    v.df_eps = gradient_magnitude(f_eps);
    v.df = gradient_magnitude(f);
    return v;
}

SolutionView analyze(const SolveResult& r, const ScalarField& f, const FluxParams& params) {
    FluxParams prm = params;
    prm.epsilon = r.epsilon;
    return analyze(r.u, r.f_eps, f, prm);
}

SolutionView rescaled(const SolutionView& v, double lambda) {
    const double fs = std::pow(lambda, v.params.p - 1.0);
    auto scale = [](const ScalarField& a, double s) {
        ScalarField b = a;
        for (double& x : b.mutable_values()) x *= s;
        return b;
    };
    FluxParams prm = v.params;
    prm.nu *= lambda;
    return analyze(scale(v.u, lambda), scale(v.f_eps, fs), scale(v.f, fs), prm);
}

double theta_min(double p, int n) {
    const double np = static_cast<double>(n) * p;
    return (np + 4.0) / (np + 4.0 - n);
}

EstimateReport caccioppoli_report(const SolutionView& v, const CylinderSet& c) {
    const auto& grid = v.u.grid();
    const double p = v.params.p;
    const double pc = p / (p - 1.0);
    const CylinderNodes qh = realize(grid, c.half());
    const CylinderNodes q0 = realize(grid, c.outer());

    EstimateReport r;
    r.id = "caccioppoli";
    r.cylinders = {{"Q_half", c.half()}, {"Q_R0", c.outer()}};
    const double sup_grad = sup_time_slice_integral(v.grad_mag, qh, 2.0);
    const double dh = integral(v.dh_half, qh, 2.0);
    const double df = norm(v.df_eps, q0, pc);
    const double dup = integral(v.grad_mag, q0, p);
    const double rho2 = c.rho * c.rho;
    add_term(r, "sup_t int_B |Du|^2", sup_grad, 2.0);
    add_term(r, "int |DH_{p/2}(Du)|^2", dh, p);
    add_term(r, "||Df_eps||_{L^p'}", df, p - 1.0);
    add_term(r, "int_Q_R0 |Du|^p", dup, p);
    add_term(r, "|Q_R0|", q0.measure(), 0.0);
    r.lhs = sup_grad + dh;
    r.rhs = df * std::pow(dup, 1.0 / p) + (dup + q0.measure()) / rho2;
    r.metadata["rho"] = c.rho;
    r.metadata["epsilon"] = v.params.epsilon;
    return r;
}

EstimateReport higher_integrability_report(const SolutionView& v, const CylinderSet& c) {
    const auto& grid = v.u.grid();
    const double p = v.params.p;
    const double n = v.dim();
    const double pc = p / (p - 1.0);
    const CylinderNodes qh = realize(grid, c.half());
    const CylinderNodes qi = realize(grid, c.inner());
    const CylinderNodes q0 = realize(grid, c.outer());

    EstimateReport r;
    r.id = "higher_integrability";
    r.cylinders = {{"Q_half", c.half()}, {"Q_rho", c.inner()}, {"Q_R0", c.outer()}};
    const double lhs = integral(v.excess, qh, p + 4.0 / n);
    const double df = norm(v.df_eps, q0, pc);
    const double dup = integral(v.grad_mag, q0, p);
    const double rho2 = c.rho * c.rho;
    add_term(r, "int (|Du|-nu)_+^{p+4/n}", lhs, p + 4.0 / n);
    add_term(r, "||Df_eps||_{L^p'}", df, p - 1.0);
    add_term(r, "int_Q_R0 |Du|^p", dup, p);
    add_term(r, "|Q_R0|", q0.measure(), 0.0);

    // product form with gamma = rho/2 on Q_rho
    const double sup_rho = sup_time_slice_integral(v.grad_mag, qi, 2.0);
    const double dh_rho = integral(v.dh_half, qi, 2.0);
    const double dup_rho = integral(v.grad_mag, qi, p);
    const double gap = c.rho - 0.5 * c.rho;
    const double product = std::pow(sup_rho, 2.0 / n) * (dh_rho + dup_rho / (gap * gap));
    add_term(r, "sup_t int_B_rho |Du|^2", sup_rho, 2.0);
    add_term(r, "int_Q_rho |DH_{p/2}(Du)|^2", dh_rho, p);
    add_term(r, "int_Q_rho |Du|^p", dup_rho, p);
    add_term(r, "product form", product, p + 4.0 / n);

    r.lhs = lhs;
    r.rhs = std::pow(df * std::pow(dup, 1.0 / p) + (dup + q0.measure()) / rho2, 1.0 + 2.0 / n);
    r.metadata["rho"] = c.rho;
    r.metadata["epsilon"] = v.params.epsilon;
    r.metadata["product_form_ratio"] = maybe(product > 0.0 ? lhs / product : (lhs == 0.0 ? kNaN : HUGE_VAL));
    return r;
}

EstimateReport main_sobolev_report(const SolutionView& v, const CylinderSet& c, double theta) {
    const double p = v.params.p;
    const int n = v.dim();
    const double tmin = theta_min(p, n);
    if (!(theta >= tmin * (1.0 - 1e-12)) || !std::isfinite(theta))
        throw ParameterError("theta = " + std::to_string(theta) + " is below the admissible minimum " +
                             std::to_string(tmin));
    const auto& grid = v.u.grid();
    const CylinderNodes qh = realize(grid, c.half());
    const CylinderNodes q0 = realize(grid, c.outer());
    const double nu = v.params.nu;
    const double np = n * p;
    const double e = (np + 4.0) / (np + 2.0 - n);

    EstimateReport r;
    r.id = "main_sobolev";
    r.cylinders = {{"Q_half", c.half()}, {"Q_R", c.mid()}, {"Q_R0", c.outer()}};
    const double lhs = integral(v.dh_half, qh, 2.0);
    const double df = norm(v.df, q0, theta);
    const double dun = norm(v.grad_mag, q0, p);
    add_term(r, "int |DH_{p/2}(Du)|^2", lhs, p);
    add_term(r, "||Df||_{L^theta}", df, p - 1.0);
    add_term(r, "||Du||_{L^p}", dun, 1.0);
    add_term(r, "nu", nu, 1.0);
    r.lhs = lhs;
    r.rhs = nu * df + std::pow(df, e) +
            (std::pow(dun, p) + dun * dun + std::pow(nu, p) + nu * nu) / (c.R * c.R);
    r.metadata["rho"] = c.rho;
    r.metadata["R"] = c.R;
    r.metadata["theta"] = theta;
    r.metadata["epsilon"] = v.params.epsilon;
    return r;
}

EstimateReport time_derivative_report(const SolutionView& v, const CylinderSet& c, double theta) {
    const double p = v.params.p;
    const int n = v.dim();
    const double tmin = theta_min(p, n);
    if (!(theta >= tmin * (1.0 - 1e-12)) || !std::isfinite(theta))
        throw ParameterError("theta = " + std::to_string(theta) + " is below the admissible minimum " +
                             std::to_string(tmin));
    const auto& grid = v.u.grid();
    const auto& sg = grid.space;
    const CylinderNodes qh = realize(grid, c.half());
    const CylinderNodes q0 = realize(grid, c.outer());
    const double nu = v.params.nu;
    const double kappa = std::min(theta, p / (p - 1.0));
    const double np = n * p;
    const double e = (np + 4.0) / (np + 2.0 - n);

    // (a) backward differences, (b) div H_{p-1}(Du) + f_eps
    ScalarField a(grid, 0.0), b(grid, 0.0), diff(grid, 0.0), dh_full(grid, 0.0);
    for (std::size_t l : qh.levels) {
        if (l == 0) continue;
        const auto cur = v.u.slice(l);
        const auto prev = v.u.slice(l - 1);
        const VectorSlice h = h_of_gradient(sg, cur, p - 1.0, nu);
        const auto div = divergence(sg, h);
        const auto fe = v.f_eps.slice(l);
        auto sa = a.slice(l), sb = b.slice(l), sd = diff.slice(l), sj = dh_full.slice(l);
        const auto jn = jacobian_norm(sg, h);
        for (std::size_t k = 0; k < sa.size(); ++k) {
            sa[k] = (cur[k] - prev[k]) / grid.tau;
            sb[k] = div[k] + fe[k];
            sd[k] = sa[k] - sb[k];
            sj[k] = jn[k];
        }
    }

    EstimateReport r;
    r.id = "time_derivative";
    r.cylinders = {{"Q_half", c.half()}, {"Q_R", c.mid()}, {"Q_R0", c.outer()}};
    const double lhs = norm(a, qh, kappa);
    const double bn = norm(b, qh, kappa);
    const double disc = norm(diff, qh, kappa);
    const double fn = norm(v.f, q0, theta);
    const double df = norm(v.df, q0, theta);
    const double dun = norm(v.grad_mag, q0, p);
    add_term(r, "||u_t (backward difference)||", lhs, 1.0);
    add_term(r, "||div H_{p-1}(Du) + f_eps||", bn, p - 1.0);
    add_term(r, "discrepancy", disc, kNaN);
    add_term(r, "||f||_{L^theta}", fn, p - 1.0);
    add_term(r, "||Df||_{L^theta}", df, p - 1.0);
    add_term(r, "||Du||_{L^p}", dun, 1.0);
    add_term(r, "nu", nu, 1.0);
    r.lhs = lhs;
    r.rhs = fn + std::pow(dun, (p - 2.0) / 2.0) * std::sqrt(nu * df + std::pow(df, e)) +
            std::sqrt(std::pow(dun, 2.0 * p - 2.0) + std::pow(dun, p) + (std::pow(nu, p) + nu * nu) * std::pow(dun, p - 2.0)) /
                c.R;
    r.metadata["rho"] = c.rho;
    r.metadata["R"] = c.R;
    r.metadata["theta"] = theta;
    r.metadata["kappa"] = kappa;
    r.metadata["epsilon"] = v.params.epsilon;
    r.metadata["discrepancy"] = disc;
    if (p > 2.0) {
        const double pc = p / (p - 1.0);
        const double cr_lhs = norm(dh_full, qh, pc);
        const double cr_rhs = std::pow(norm(v.grad_mag, qh, p), (p - 2.0) / 2.0) * norm(v.dh_half, qh, 2.0);
        add_term(r, "||DH_{p-1}(Du)||_{L^p'}", cr_lhs, p - 1.0);
        add_term(r, "||Du||^{(p-2)/2} ||DH_{p/2}(Du)||_{L^2}", cr_rhs, p - 1.0);
        r.metadata["chain_rule_ratio"] = maybe(cr_rhs > 0.0 ? cr_lhs / cr_rhs : (cr_lhs == 0.0 ? kNaN : HUGE_VAL));
    }
    return r;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) continue;
        const double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
        ++m;
    }
    if (m < 2) return kNaN;
    const double den = m * sxx - sx * sx;
    return den == 0.0 ? kNaN : (m * sxy - sx * sy) / den;
}

ComparisonSummary comparison_report(const ContinuationResult& run, const FluxParams& params,
                                    const ParabolicCylinder& q_r0) {
    if (run.solves.size() < 2) throw InvalidInput("comparison needs at least two schedule entries");
    const auto& grid = run.solves.front().u.grid();
    const auto& sg = grid.space;
    const CylinderNodes q = realize(grid, q_r0);
    const double p = params.p;
    const double n = sg.dim;
    const double s = (n * p + 2.0 * p) / (n * p + 2.0 * p - n);

    ComparisonSummary out;
    std::vector<double> sups, hs;
    for (std::size_t k = 0; k + 1 < run.solves.size(); ++k) {
        const auto& a = run.solves[k];
        const auto& b = run.solves[k + 1];
        ScalarField du(grid, 0.0), dh(grid, 0.0), ddu(grid, 0.0), df(grid, 0.0);
        for (std::size_t l = 0; l < grid.levels(); ++l) {
            const auto ua = a.u.slice(l), ub = b.u.slice(l);
            auto s_du = du.slice(l), s_dh = dh.slice(l), s_ddu = ddu.slice(l), s_df = df.slice(l);
            const VectorSlice ga = gradient(sg, ua), gb = gradient(sg, ub);
            const VectorSlice ha = h_of_gradient(sg, ua, p / 2.0, params.nu);
            const VectorSlice hb = h_of_gradient(sg, ub, p / 2.0, params.nu);
            const auto fa = a.f_eps.slice(l), fb = b.f_eps.slice(l);
            for (std::size_t i = 0; i < s_du.size(); ++i) {
                s_du[i] = ua[i] - ub[i];
                s_df[i] = fa[i] - fb[i];
                double x = 0.0, y = 0.0;
                for (int ax = 0; ax < sg.dim; ++ax) {
                    const auto c = static_cast<std::size_t>(ax);
                    x += (ha.comp[c][i] - hb.comp[c][i]) * (ha.comp[c][i] - hb.comp[c][i]);
                    y += (ga.comp[c][i] - gb.comp[c][i]) * (ga.comp[c][i] - gb.comp[c][i]);
                }
                s_dh[i] = std::sqrt(x);
                s_ddu[i] = std::sqrt(y);
            }
        }
        EstimateReport r;
        r.id = "comparison";
        r.cylinders = {{"Q_R0", q_r0}};
        const double sup = sup_time_slice_integral(du, q, 2.0);
        const double hterm = integral(dh, q, 2.0);
        const double dup = integral(gradient_magnitude(b.u), q, p);
        const double fdiff = norm(df, q, s);
        const double dd = integral(ddu, q, p);
        add_term(r, "sup_t ||u_k - u_k+1||^2", sup, 2.0);
        add_term(r, "int |H_{p/2} difference|^2", hterm, p);
        add_term(r, "int |Du_k+1|^p", dup, p);
        add_term(r, "||f_k - f_k+1||_{L^s}", fdiff, p - 1.0);
        add_term(r, "int |Du_k - Du_k+1|^p", dd, p);
        r.lhs = sup + hterm;
        r.rhs = a.epsilon * dup + fdiff * std::pow(sup, 1.0 / (n + 2.0)) * std::pow(dd, n / (n * p + 2.0 * p));
        r.metadata["eps_k"] = a.epsilon;
        r.metadata["eps_next"] = b.epsilon;
        out.eps.push_back(a.epsilon);
        out.lhs.push_back(r.lhs);
        sups.push_back(sup);
        hs.push_back(hterm);
        out.reports.push_back(std::move(r));
    }
    out.slope = loglog_slope(out.eps, out.lhs);
    for (std::size_t k = 2; k < sups.size(); ++k) {
        if (sups[k] > sups[k - 1]) out.sup_nonincreasing = false;
        if (hs[k] > hs[k - 1]) out.h_nonincreasing = false;
    }
    return out;
}

std::vector<ExponentSanity> exponent_sanity() {
    std::vector<ExponentSanity> out;
    for (double p : {2.0, 3.0, 4.0, 5.0}) {
        for (int n : {2, 3}) {
            const double np = n * p;
            ExponentSanity e;
            e.p = p;
            e.n = n;
            e.lhs = (np + 4.0) / (np + 4.0 - n);
            e.rhs = (np + 2.0 * p) / (np + 2.0 * p - n);
            e.pass = e.lhs >= e.rhs;
            out.push_back(e);
        }
    }
    return out;
}

// Dyadic iteration t_{i+1} = t_i + (1 - lambda) lambda^i (r1 - r0) gives
// Psi(r0) <= sum_i (theta lambda^{-alpha})^i (1-lambda)^{-alpha} [A d^-alpha + B d^-beta] + C/(1-theta)
// for beta <= alpha. lambda^alpha = (1+theta)/2 makes the ratio 2 theta/(1+theta) < 1.
double iteration_constant(double alpha, double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw ParameterError("theta must lie in (0, 1)");
    if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
    const double lambda = std::pow(0.5 * (1.0 + theta), 1.0 / alpha);
    return std::pow(1.0 - lambda, -alpha) * (1.0 + theta) / (1.0 - theta);
}

double iteration_bound(double A, double B, double C, double alpha, double beta, double theta, double r0, double r1) {
    if (!(A >= 0.0 && B >= 0.0 && C >= 0.0)) throw ParameterError("A, B, C must be nonnegative");
    if (!(beta > 0.0 && alpha >= beta)) throw ParameterError("need alpha >= beta > 0");
    if (!(r0 < r1)) throw ParameterError("need r0 < r1");
    const double d = r1 - r0;
    return iteration_constant(alpha, theta) * (A / std::pow(d, alpha) + B / std::pow(d, beta) + C);
}

IterationCheck iteration_check(std::span<const double> psi, double A, double B, double C, double alpha, double beta,
                               double theta, double r0, double r1) {
    if (psi.size() < 2) throw InvalidInput("need at least two samples of Psi");
    IterationCheck out;
    out.bound = iteration_bound(A, B, C, alpha, beta, theta, r0, r1);
    out.psi_r0 = psi[0];
    const double step = (r1 - r0) / static_cast<double>(psi.size() - 1);
    out.hypothesis_holds = true;
    for (std::size_t i = 0; i < psi.size() && out.hypothesis_holds; ++i) {
        for (std::size_t j = i + 1; j < psi.size(); ++j) {
            const double d = static_cast<double>(j - i) * step;
            const double rhs = theta * psi[j] + A / std::pow(d, alpha) + B / std::pow(d, beta) + C;
            if (psi[i] > rhs + 1e-12 * (1.0 + std::fabs(rhs))) {
                out.hypothesis_holds = false;
                break;
            }
        }
    }
    out.pass = !out.hypothesis_holds || out.psi_r0 <= out.bound;
    return out;
}

IterationCheck iteration_trial(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double r0 = u01(rng);
    const double r1 = r0 + 0.5 + 1.5 * u01(rng);
    const double alpha = 0.5 + 2.5 * u01(rng);
    const double beta = alpha * (0.1 + 0.9 * u01(rng));
    const double theta = 0.05 + 0.9 * u01(rng);
    const double A = std::pow(10.0, -3.0 + 3.0 * u01(rng));
    const double B = std::pow(10.0, -3.0 + 3.0 * u01(rng));
    const double a = 2.0 * u01(rng), d = 0.05 + u01(rng), gam = 3.0 * u01(rng);
    const double b = u01(rng), c = u01(rng), w = 20.0 * u01(rng), ph = 6.3 * u01(rng);

    constexpr std::size_t M = 201;
    std::vector<double> psi(M);
    const double step = (r1 - r0) / static_cast<double>(M - 1);
    for (std::size_t i = 0; i < M; ++i) {
        const double s = r0 + static_cast<double>(i) * step;
        const double sn = std::sin(w * s + ph);
        psi[i] = a * std::pow(r1 + d - s, -gam) + b + c * sn * sn;
    }
    // least C for which the hypothesis holds on every sampled pair
    double C = 0.0;
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = i + 1; j < M; ++j) {
            const double dist = static_cast<double>(j - i) * step;
            C = std::max(C, psi[i] - theta * psi[j] - A / std::pow(dist, alpha) - B / std::pow(dist, beta));
        }
    C *= 1.0 + 1e-12;
    return iteration_check(psi, A, B, C, alpha, beta, theta, r0, r1);
}

EstimateReport iteration_report(const IterationCheck& c) {
    EstimateReport r;
    r.id = "iteration_lemma";
    r.lhs = c.psi_r0;
    r.rhs = c.bound;
    r.metadata["hypothesis_holds"] = c.hypothesis_holds;
    return r;
}

EstimateReport interpolation_lemma_report(const ScalarField& v, const ParabolicCylinder& q, double p, double qexp) {
    const InequalityPair ip = interpolation_check(v, q, p, qexp);
    const double n = v.grid().space.dim;
    EstimateReport r;
    r.id = "interpolation_lemma";
    r.cylinders = {{"Q", q}};
    r.lhs = ip.lhs;
    r.rhs = ip.rhs;
    add_term(r, "lhs", ip.lhs, p + p * qexp / n);
    add_term(r, "rhs", ip.rhs, p + p * qexp / n);
    r.metadata["p"] = p;
    r.metadata["q"] = qexp;
    return r;
}

EstimateReport diff_quotient_lemma_report(const SpatialGrid& grid, std::span<const double> f, int axis, double hstep,
                                          std::array<double, 2> x0, double rho, double qexp) {
    const DifferenceQuotientCheck d = difference_quotient_check(grid, f, axis, hstep, x0, rho, qexp);
    EstimateReport r;
    r.id = "diff_quotient_lemma";
    r.cylinders = {{"B_rho", ParabolicCylinder{x0, 0.0, rho}}};
    r.lhs = d.shift.lhs;
    r.rhs = d.shift.rhs;
    add_term(r, "int |tau_h F|^q", d.shift.lhs, qexp);
    add_term(r, "|h|^q int |DF|^q", d.shift.rhs, qexp);
    add_term(r, "int |F(x+h)|^q", d.translate.lhs, qexp);
    add_term(r, "int_B_R |F|^q", d.translate.rhs, qexp);
    r.metadata["axis"] = axis;
    r.metadata["h"] = hstep;
    r.metadata["q"] = qexp;
    return r;
}

FittedConstant fit(const std::vector<EstimateReport>& family) {
    FittedConstant f;
    if (!family.empty()) f.id = family.front().id;
    for (const auto& r : family) {
        switch (r.status()) {
            case ReportStatus::vacuous:
                break;
            case ReportStatus::violation:
                f.violation = true;
                f.vacuous = false;
                f.constant = std::numeric_limits<double>::infinity();
                break;
            case ReportStatus::pass:
                f.vacuous = false;
                if (!f.violation) f.constant = std::isnan(f.constant) ? r.constant() : std::max(f.constant, r.constant());
                break;
        }
    }
    return f;
}

bool stable(const FittedConstant& coarse, const FittedConstant& fine, double factor) {
    if (coarse.vacuous && fine.vacuous) return true;
    if (coarse.violation || fine.violation) return false;
    if (!(coarse.constant > 0.0) || !(fine.constant > 0.0)) return coarse.constant == fine.constant;
    const double ratio = coarse.constant / fine.constant;
    return ratio >= 1.0 / factor && ratio <= factor;
}

HomogeneityAudit audit_homogeneity(const EstimateReport& base, const EstimateReport& scaled, double lambda,
                                   double tol) {
    HomogeneityAudit a;
    a.lambda = lambda;
    for (const auto& t : base.terms) {
        if (std::isnan(t.degree)) continue;
        const ReportTerm* s = scaled.term(t.name);
        if (!s) {
            a.failures.push_back(base.id + ": missing term " + t.name);
            continue;
        }
        const double expected = t.value * std::pow(lambda, t.degree);
        const double scale = std::max(std::fabs(expected), std::fabs(s->value));
        const double defect = scale == 0.0 ? 0.0 : std::fabs(s->value - expected) / scale;
        a.max_defect = std::max(a.max_defect, defect);
        if (!(defect <= tol)) a.failures.push_back(base.id + ": " + t.name);
    }
    return a;
}

nlohmann::json to_json(const EstimateReport& r) {
    nlohmann::json j;
    j["id"] = r.id;
    nlohmann::json cyl = nlohmann::json::array();
    for (const auto& [name, q] : r.cylinders) cyl.push_back(cyl_json(name, q));
    j["cylinders"] = cyl;
    j["lhs"] = maybe(r.lhs);
    j["rhs"] = maybe(r.rhs);
    const double c = r.constant();
    j["constant"] = std::isfinite(c) ? nlohmann::json(c) : nlohmann::json(nullptr);
    const ReportStatus st = r.status();
    j["status"] = st == ReportStatus::pass ? "pass" : st == ReportStatus::vacuous ? "vacuous" : "violation";
    nlohmann::json terms = nlohmann::json::object();
    for (const auto& t : r.terms)
        terms[t.name] = {{"value", maybe(t.value)},
                         {"degree", std::isnan(t.degree) ? nlohmann::json(nullptr) : nlohmann::json(t.degree)}};
    j["terms"] = terms;
    j["metadata"] = r.metadata;
    return j;
}

nlohmann::json to_json(const FittedConstant& f) {
    return {{"id", f.id},
            {"constant", std::isfinite(f.constant) ? nlohmann::json(f.constant) : nlohmann::json(nullptr)},
            {"vacuous", f.vacuous},
            {"violation", f.violation}};
}

std::string render_table(const std::vector<EstimateReport>& reports) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-22s %10s %14s %14s %14s  %s\n", "estimate", "rho", "lhs", "rhs", "constant",
                  "status");
    out << line;
    for (const auto& r : reports) {
        const double rho = r.cylinders.empty() ? kNaN : r.cylinders.back().second.rho;
        const double rho_show = r.metadata.contains("rho") ? r.metadata["rho"].get<double>() : rho;
        const ReportStatus st = r.status();
        std::snprintf(line, sizeof line, "%-22s %10.4g %14.6g %14.6g %14.6g  %s\n", r.id.c_str(), rho_show, r.lhs,
                      r.rhs, r.constant(),
                      st == ReportStatus::pass ? "pass" : st == ReportStatus::vacuous ? "vacuous" : "VIOLATION");
        out << line;
    }
    return out.str();
}

}  // namespace llab

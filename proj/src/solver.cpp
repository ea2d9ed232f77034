#include "llab/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <string>

#include "llab/error.hpp"
#include "llab/kernels.hpp"

namespace llab {

double SolveResult::max_residual() const {
    double m = 0.0;
    for (const auto& s : steps) m = std::max(m, s.final_residual);
    return m;
}

int SolveResult::total_newton_iterations() const {
    int n = 0;
    for (const auto& s : steps) n += s.newton_iterations;
    return n;
}

namespace {

struct Tap {
    std::size_t node;
    double coef;
};

// Gradient stencil of one node along one axis (always two taps).
std::array<Tap, 2> stencil(const SpatialGrid& g, std::size_t node, int axis) {
    const std::size_t stride = axis == 0 ? 1 : g.extents[0];
    const std::size_t pos = axis == 0 ? g.ix(node) : g.jy(node);
    const std::size_t last = g.extents[static_cast<std::size_t>(axis)] - 1;
    const double invh = 1.0 / g.h;
    if (pos == 0) return {Tap{node, -invh}, Tap{node + stride, invh}};
    if (pos == last) return {Tap{node - stride, -invh}, Tap{node, invh}};
    return {Tap{node - stride, -0.5 * invh}, Tap{node + stride, 0.5 * invh}};
}

kernels::RadialCoefficient flux_coefficient(const FluxParams& prm) {
    return {prm.nu, prm.p - 1.0, prm.epsilon, prm.p == 2.0 ? 0.0 : prm.p - 2.0};
}

double max_abs(const std::vector<double>& v, const std::vector<std::size_t>& idx) {
    double m = 0.0;
    for (std::size_t k : idx) m = std::max(m, std::fabs(v[k]));
    return m;
}

double norm2(const std::vector<double>& v, const std::vector<std::size_t>& idx) {
    double s = 0.0;
    for (std::size_t k : idx) s += v[k] * v[k];
    return std::sqrt(s);
}

}  // namespace

struct ImplicitStepper::Impl {
    using SpMat = Eigen::SparseMatrix<double>;

    SpatialGrid grid;
    double tau;
    FluxParams params;
    NewtonConfig newton;
    std::vector<std::size_t> interior;
    std::vector<long> unknown;  // node -> unknown index or -1
    std::vector<double> weight_scaled;  // sbp_weight / h^n
    mutable Eigen::SimplicialLDLT<SpMat> ldlt;
    mutable bool analyzed = false;

    Impl(const SpatialGrid& g, double t, FluxParams p, NewtonConfig n)
        : grid(g), tau(t), params(p), newton(n) {
        unknown.assign(grid.node_count(), -1);
        weight_scaled.resize(grid.node_count());
        const double vol = grid.cell_volume();
        for (std::size_t k = 0; k < grid.node_count(); ++k) {
            weight_scaled[k] = grid.sbp_weight(k) / vol;
            if (!grid.on_boundary(k)) {
                unknown[k] = static_cast<long>(interior.size());
                interior.push_back(k);
            }
        }
    }

    VectorSlice flux(std::span<const double> u) const {
        const VectorSlice g = gradient(grid, u);
        VectorSlice f(grid.dim, grid.node_count());
        const bool two = grid.dim == 2;
        kernels::active().radial_map(g.comp[0].data(), two ? g.comp[1].data() : nullptr, f.comp[0].data(),
                                     two ? f.comp[1].data() : nullptr, g.size(), flux_coefficient(params));
        return f;
    }

    std::vector<double> residual(std::span<const double> u_prev, std::span<const double> f,
                                 std::span<const double> u) const {
        const std::vector<double> div = divergence(grid, flux(u));
        std::vector<double> r(grid.node_count(), 0.0);
        const double inv_tau = 1.0 / tau;
        for (std::size_t k : interior) r[k] = (u[k] - u_prev[k]) * inv_tau - div[k] - f[k];
        return r;
    }

    // Newton (lagged == false) or lagged-coefficient (lagged == true) matrix.
    SpMat assemble(std::span<const double> u, bool lagged) const {
        const VectorSlice g = gradient(grid, u);
        const int dim = grid.dim;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(grid.node_count() * static_cast<std::size_t>(4 * dim * dim) + interior.size());
        const double inv_tau = 1.0 / tau;
        for (std::size_t idx = 0; idx < interior.size(); ++idx)
            trip.emplace_back(static_cast<int>(idx), static_cast<int>(idx), inv_tau);

        const kernels::RadialCoefficient coeff = flux_coefficient(params);
        for (std::size_t k = 0; k < grid.node_count(); ++k) {
            double J[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
            if (lagged) {
                const double r = dim == 2 ? std::sqrt(g.comp[0][k] * g.comp[0][k] + g.comp[1][k] * g.comp[1][k])
                                          : std::fabs(g.comp[0][k]);
                double c = 0.0;
                if (r > 0.0) {
                    const double excess = std::max(r - coeff.nu, 0.0);
                    c = (excess > 0.0 ? std::pow(excess, coeff.lambda) : 0.0) / r +
                        coeff.eps * (coeff.eps_power == 0.0 ? 1.0 : std::pow(r, coeff.eps_power));
                    if (params.p >= 2.0) {
                        // radial slope; taking the larger of the two keeps the lagged
                        // operator above the Jacobian
                        const double q = params.p - 1.0;
                        const double slope = (excess > 0.0 ? q * (params.p == 2.0 ? 1.0 : std::pow(excess, q - 1.0)) : 0.0) +
                                             params.epsilon * q * (params.p == 2.0 ? 1.0 : std::pow(r, q - 1.0));
                        c = std::max(c, slope);
                    }
                } else {
                    // the lagged coefficient must stay positive for a usable system
                    c = (params.nu == 0.0 && params.p == 2.0 ? 1.0 : 0.0) + params.epsilon;
                }
                J[0][0] = c;
                J[1][1] = c;
            } else {
                SpatialVector xi(static_cast<std::size_t>(dim));
                for (int a = 0; a < dim; ++a) xi[static_cast<std::size_t>(a)] = g.comp[static_cast<std::size_t>(a)][k];
                const SmallMatrix m = regularized_flux_jacobian(xi, params);
                for (int a = 0; a < dim; ++a)
                    for (int b = 0; b < dim; ++b) J[a][b] = m(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
            }
            const double w = weight_scaled[k];
            for (int a = 0; a < dim; ++a) {
                const auto sa = stencil(grid, k, a);
                for (int b = 0; b < dim; ++b) {
                    // explicit zeros keep the sparsity pattern identical between calls
                    const double jab = J[a][b];
                    const auto sb = stencil(grid, k, b);
                    for (const Tap& ta : sa) {
                        const long row = unknown[ta.node];
                        if (row < 0) continue;
                        for (const Tap& tb : sb) {
                            const long col = unknown[tb.node];
                            if (col < 0) continue;
                            trip.emplace_back(static_cast<int>(row), static_cast<int>(col), w * ta.coef * jab * tb.coef);
                        }
                    }
                }
            }
        }
        SpMat m(static_cast<long>(interior.size()), static_cast<long>(interior.size()));
        m.setFromTriplets(trip.begin(), trip.end());
        return m;
    }

    // Discrete energy whose gradient (per unit interior weight) is the residual.
    double energy(std::span<const double> u_prev, std::span<const double> f, std::span<const double> u) const {
        const VectorSlice g = gradient(grid, u);
        const std::vector<double> mag = g.magnitude();
        const double p = params.p;
        double e = 0.0;
        for (std::size_t k = 0; k < mag.size(); ++k) {
            const double ex = std::max(mag[k] - params.nu, 0.0);
            e += weight_scaled[k] * (std::pow(ex, p) + params.epsilon * std::pow(mag[k], p)) / p;
        }
        const double inv_tau = 1.0 / tau;
        for (std::size_t k : interior) {
            const double d = u[k] - u_prev[k];
            e += 0.5 * inv_tau * d * d - f[k] * u[k];
        }
        return e;
    }

    bool linear_solve(const SpMat& m, const std::vector<double>& r, std::vector<double>& delta) const {
        if (!analyzed) {
            ldlt.analyzePattern(m);
            analyzed = true;
        }
        ldlt.factorize(m);
        if (ldlt.info() != Eigen::Success) return false;
        Eigen::VectorXd rhs(static_cast<long>(interior.size()));
        for (std::size_t i = 0; i < interior.size(); ++i) rhs[static_cast<long>(i)] = -r[interior[i]];
        const Eigen::VectorXd x = ldlt.solve(rhs);
        if (ldlt.info() != Eigen::Success || !x.allFinite()) return false;
        delta.assign(grid.node_count(), 0.0);
        for (std::size_t i = 0; i < interior.size(); ++i) delta[interior[i]] = x[static_cast<long>(i)];
        return true;
    }

    StepStats solve(std::span<const double> u_prev, std::span<const double> f, std::span<double> u) const {
        StepStats st;
        std::vector<double> r = residual(u_prev, f, u);
        double rinf = max_abs(r, interior);
        double r2 = norm2(r, interior);
        st.initial_residual = rinf;
        st.tolerance = newton.atol + newton.rtol * rinf;
        std::vector<double> delta;
        std::vector<double> trial(u.begin(), u.end());

        bool need_fallback = false;
        while (rinf > st.tolerance) {
            if (st.newton_iterations >= newton.max_iterations) {
                need_fallback = true;
                break;
            }
            if (!linear_solve(assemble(u, false), r, delta)) {
                need_fallback = true;
                break;
            }
            double alpha = 1.0;
            bool accepted = false;
            int rejected = 0;
            while (rejected < std::max(newton.max_backtracks, 1)) {
                for (std::size_t k : interior) trial[k] = u[k] + alpha * delta[k];
                std::vector<double> rt = residual(u_prev, f, trial);
                const double rt2 = norm2(rt, interior);
                if (std::isfinite(rt2) && rt2 <= (1.0 - newton.armijo * alpha) * r2) {
                    std::copy(trial.begin(), trial.end(), u.begin());
                    r = std::move(rt);
                    r2 = rt2;
                    rinf = max_abs(r, interior);
                    accepted = true;
                    break;
                }
                ++rejected;
                ++st.rejected_backtracks;
                alpha *= 0.5;
            }
            ++st.newton_iterations;
            if (!accepted) {
                need_fallback = true;
                break;
            }
        }

        if (need_fallback) {
            if (!newton.picard_fallback)
                throw StepFailure("Newton did not converge and the Picard fallback is disabled", -1, params.epsilon,
                                  rinf);
            st.fell_back = true;
            while (rinf > st.tolerance) {
                if (st.picard_iterations >= newton.picard_max_iterations || !linear_solve(assemble(u, true), r, delta))
                    throw StepFailure("Picard fallback did not converge", -1, params.epsilon, rinf);
                // damped: Armijo on the step energy, or plain residual decrease once
                // energy differences sink into round-off
                const double e0 = energy(u_prev, f, u);
                double slope = 0.0;
                for (std::size_t k : interior) slope += r[k] * delta[k];
                double alpha = 1.0;
                bool accepted = false;
                for (int bt = 0; bt < 40 && !accepted; ++bt, alpha *= 0.5) {
                    for (std::size_t k : interior) trial[k] = u[k] + alpha * delta[k];
                    std::vector<double> rt = residual(u_prev, f, trial);
                    const double rt2 = norm2(rt, interior);
                    if (!std::isfinite(rt2)) continue;
                    const double et = energy(u_prev, f, trial);
                    if (et <= e0 + newton.armijo * alpha * slope || rt2 <= (1.0 - newton.armijo * alpha) * r2) {
                        std::copy(trial.begin(), trial.end(), u.begin());
                        r = std::move(rt);
                        r2 = rt2;
                        rinf = max_abs(r, interior);
                        accepted = true;
                    } else {
                        ++st.rejected_backtracks;
                    }
                }
                ++st.picard_iterations;
                if (!accepted) throw StepFailure("Picard line search stalled", -1, params.epsilon, rinf);
            }
        }
        st.final_residual = rinf;
        return st;
    }
};

ImplicitStepper::ImplicitStepper(const SpatialGrid& grid, double tau, FluxParams params, NewtonConfig newton) {
    grid.validate();
    params.validate();
    newton.validate();
    if (!(params.epsilon > 0.0))
        throw ParameterError("implicit steps need epsilon > 0; epsilon = 0 is reached only by continuation");
    if (!(tau > 0.0)) throw ParameterError("time step must be positive");
    impl_ = std::make_unique<Impl>(grid, tau, params, newton);
}

ImplicitStepper::~ImplicitStepper() = default;

StepStats ImplicitStepper::solve(std::span<const double> u_prev, std::span<const double> f,
                                 std::span<double> u) const {
    const std::size_t n = impl_->grid.node_count();
    if (u_prev.size() != n || f.size() != n || u.size() != n) throw InvalidInput("slice size does not match the grid");
    return impl_->solve(u_prev, f, u);
}

std::vector<double> ImplicitStepper::residual(std::span<const double> u_prev, std::span<const double> f,
                                              std::span<const double> u) const {
    return impl_->residual(u_prev, f, u);
}

VectorSlice ImplicitStepper::flux(std::span<const double> u) const { return impl_->flux(u); }

const SpatialGrid& ImplicitStepper::grid() const noexcept { return impl_->grid; }

namespace {

FluxParams with_epsilon(FluxParams p, double eps) {
    p.epsilon = eps;
    return p;
}

void impose_boundary(const Scenario& s, std::size_t level, std::span<double> u) {
    const auto& g = s.grid.space;
    for (std::size_t k = 0; k < g.node_count(); ++k)
        if (g.on_boundary(k)) u[k] = s.g.at(s.grid, level, k);
}

}  // namespace

std::vector<double> step_implicit(std::span<const double> u_prev, std::size_t level, const Scenario& scenario,
                                  const ScalarField& f_eps, double epsilon, StepStats* stats) {
    if (level == 0 || level > scenario.grid.steps) throw InvalidInput("step level out of range");
    ImplicitStepper stepper(scenario.grid.space, scenario.grid.tau, with_epsilon(scenario.params, epsilon),
                            scenario.newton);
    std::vector<double> u(u_prev.begin(), u_prev.end());
    impose_boundary(scenario, level, u);
    try {
        const StepStats st = stepper.solve(u_prev, f_eps.slice(level), u);
        if (stats) *stats = st;
    } catch (const StepFailure& e) {
        throw StepFailure(std::string(e.what()) + " at level " + std::to_string(level) + " (epsilon " +
                              std::to_string(epsilon) + ")",
                          static_cast<int>(level), epsilon, e.residual());
    }
    return u;
}

SolveResult solve_with_datum(const Scenario& scenario, double epsilon, const ScalarField& f_eps,
                             const ScalarField* warm_start) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ParameterError("solve requires epsilon in (0, 1]");
    if (!(f_eps.grid() == scenario.grid)) throw InvalidInput("datum is on a different grid");
    if (warm_start && !(warm_start->grid() == scenario.grid)) throw InvalidInput("warm start is on a different grid");
    const auto t_begin = std::chrono::steady_clock::now();

    const ImplicitStepper stepper(scenario.grid.space, scenario.grid.tau, with_epsilon(scenario.params, epsilon),
                                  scenario.newton);
    SolveResult res;
    res.epsilon = epsilon;
    res.u = ScalarField(scenario.grid, 0.0);
    res.f_eps = f_eps;
    {
        auto u0 = res.u.slice(0);
        for (std::size_t k = 0; k < u0.size(); ++k) u0[k] = scenario.g.at(scenario.grid, 0, k);
    }
    res.steps.reserve(scenario.grid.steps);
    for (std::size_t l = 1; l <= scenario.grid.steps; ++l) {
        const auto prev = res.u.slice(l - 1);
        auto cur = res.u.slice(l);
        if (warm_start)
            std::copy(warm_start->slice(l).begin(), warm_start->slice(l).end(), cur.begin());
        else
            std::copy(prev.begin(), prev.end(), cur.begin());
        impose_boundary(scenario, l, cur);
        try {
            res.steps.push_back(stepper.solve(prev, f_eps.slice(l), cur));
        } catch (const StepFailure& e) {
            throw StepFailure(std::string(e.what()) + " at level " + std::to_string(l) + " (epsilon " +
                                  std::to_string(epsilon) + ")",
                              static_cast<int>(l), epsilon, e.residual());
        }
    }
    res.weak_form = weak_form_check(scenario, res);
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    return res;
}

SolveResult solve_cauchy_dirichlet(const Scenario& scenario, double epsilon, const ScalarField* warm_start) {
    const ScalarField f = scenario.f.sample(scenario.grid);
    return solve_with_datum(scenario, epsilon, scenario.mollify_datum ? mollify(f, epsilon) : f, warm_start);
}

WeakFormCheck weak_form_check(const Scenario& scenario, const SolveResult& result) {
    const SpaceTimeGrid& grid = scenario.grid;
    const SpatialGrid& sg = grid.space;
    const ImplicitStepper stepper(sg, grid.tau, with_epsilon(scenario.params, result.epsilon), scenario.newton);

    // spatial bumps (1 - |x-c|^2/a^2)_+^2 centred at the quarter points
    std::vector<std::array<double, 2>> centres;
    const double w0 = sg.upper(0) - sg.origin[0];
    const double w1 = sg.dim == 2 ? sg.upper(1) - sg.origin[1] : w0;
    const double a = 0.2 * std::min(w0, w1);
    for (double cx : {0.3, 0.7}) {
        if (sg.dim == 1) {
            centres.push_back({sg.origin[0] + cx * w0, 0.0});
            continue;
        }
        for (double cy : {0.3, 0.7}) centres.push_back({sg.origin[0] + cx * w0, sg.origin[1] + cy * w1});
    }
    const std::size_t N = grid.steps;
    std::vector<double> chi(N + 1, 0.0);
    for (std::size_t n = 1; n < N; ++n) {
        const double s = std::sin(std::numbers::pi * static_cast<double>(n) / static_cast<double>(N));
        chi[n] = s * s;
    }

    std::vector<VectorSlice> flux(N + 1);
    for (std::size_t n = 1; n <= N; ++n) flux[n] = stepper.flux(result.u.slice(n));

    WeakFormCheck out;
    out.functions = centres.size();
    const double rmax = result.max_residual();
    for (const auto& c : centres) {
        std::vector<double> psi(sg.node_count(), 0.0);
        for (std::size_t k = 0; k < psi.size(); ++k) {
            if (sg.on_boundary(k)) continue;
            double d2 = 0.0;
            for (int ax = 0; ax < sg.dim; ++ax) {
                const double d = sg.coord(k, ax) - c[static_cast<std::size_t>(ax)];
                d2 += d * d;
            }
            const double s = std::max(1.0 - d2 / (a * a), 0.0);
            psi[k] = s * s;
        }
        const VectorSlice dpsi = gradient(sg, psi);
        const double psi_l1 = inner(sg, psi, std::vector<double>(psi.size(), 1.0));

        double weak = 0.0;
        double mag = 0.0;
        double phi_l1 = 0.0;
        for (std::size_t n = 0; n < N; ++n) {
            // -<u^n, phi^{n+1} - phi^n>
            const double dchi = chi[n + 1] - chi[n];
            const auto un = result.u.slice(n);
            double t = 0.0, ta = 0.0;
            for (std::size_t k = 0; k < psi.size(); ++k) {
                const double term = sg.sbp_weight(k) * un[k] * psi[k] * dchi;
                t += term;
                ta += std::fabs(term);
            }
            weak -= t;
            mag += ta;
        }
        for (std::size_t n = 1; n <= N; ++n) {
            const auto fn = result.f_eps.slice(n);
            double t = 0.0, ta = 0.0;
            for (std::size_t k = 0; k < psi.size(); ++k) {
                double fl = flux[n].comp[0][k] * dpsi.comp[0][k];
                if (sg.dim == 2) fl += flux[n].comp[1][k] * dpsi.comp[1][k];
                const double term = sg.sbp_weight(k) * chi[n] * (fl - fn[k] * psi[k]);
                t += term;
                ta += std::fabs(term);
            }
            weak += grid.tau * t;
            mag += grid.tau * ta;
            phi_l1 += grid.tau * chi[n] * psi_l1;
        }
        const double bound = phi_l1 * rmax;
        out.max_abs = std::max(out.max_abs, std::fabs(weak));
        out.bound = std::max(out.bound, bound + 1e-11 * mag);
        if (std::fabs(weak) > bound * (1.0 + 1e-9) + 1e-11 * mag) out.pass = false;
    }
    return out;
}

namespace {

// H_lambda(grad u) for one slice.
VectorSlice h_field(const SpatialGrid& g, std::span<const double> u, double lambda, double nu) {
    const VectorSlice d = gradient(g, u);
    VectorSlice h(g.dim, g.node_count());
    const bool two = g.dim == 2;
    kernels::active().radial_map(d.comp[0].data(), two ? d.comp[1].data() : nullptr, h.comp[0].data(),
                                 two ? h.comp[1].data() : nullptr, d.size(), {nu, lambda, 0.0, 0.0});
    return h;
}

}  // namespace

ContinuationResult continuation_solve(const Scenario& scenario) {
    scenario.validate();
    ContinuationResult out;
    out.f = scenario.f.sample(scenario.grid);
    for (std::size_t k = 0; k < scenario.epsilon_schedule.size(); ++k) {
        const double eps = scenario.epsilon_schedule[k];
        const ScalarField datum = scenario.mollify_datum ? mollify(out.f, eps) : out.f;
        out.solves.push_back(solve_with_datum(scenario, eps, datum, k > 0 ? &out.solves[k - 1].u : nullptr));
    }

    const SpaceTimeGrid& grid = scenario.grid;
    const SpatialGrid& sg = grid.space;
    const double p = scenario.params.p;
    const double nu = scenario.params.nu;
    for (const auto& s : out.solves) {
        double total = 0.0;
        for (std::size_t l = 1; l <= grid.steps; ++l) {
            const auto mag = gradient(sg, s.u.slice(l)).magnitude();
            for (std::size_t k = 0; k < mag.size(); ++k) total += grid.tau * sg.sbp_weight(k) * std::pow(mag[k], p);
        }
        out.grad_lp.push_back(std::pow(total, 1.0 / p));
    }

    for (std::size_t k = 0; k + 1 < out.solves.size(); ++k) {
        const auto& a = out.solves[k];
        const auto& b = out.solves[k + 1];
        ComparisonPair c;
        c.eps_k = a.epsilon;
        c.eps_next = b.epsilon;
        double mono_mag = 0.0;
        for (std::size_t l = 1; l <= grid.steps; ++l) {
            const auto ua = a.u.slice(l);
            const auto ub = b.u.slice(l);
            double sq = 0.0;
            for (std::size_t n = 0; n < ua.size(); ++n) sq += sg.sbp_weight(n) * (ua[n] - ub[n]) * (ua[n] - ub[n]);
            c.sup_l2_sq = std::max(c.sup_l2_sq, sq);

            const VectorSlice ha = h_field(sg, ua, p / 2.0, nu);
            const VectorSlice hb = h_field(sg, ub, p / 2.0, nu);
            const VectorSlice fa = h_field(sg, ua, p - 1.0, nu);
            const VectorSlice fb = h_field(sg, ub, p - 1.0, nu);
            const VectorSlice da = gradient(sg, ua);
            const VectorSlice db = gradient(sg, ub);
            for (std::size_t n = 0; n < ua.size(); ++n) {
                double hh = 0.0, mono = 0.0;
                for (int ax = 0; ax < sg.dim; ++ax) {
                    const auto x = static_cast<std::size_t>(ax);
                    const double dh = ha.comp[x][n] - hb.comp[x][n];
                    hh += dh * dh;
                    mono += (fa.comp[x][n] - fb.comp[x][n]) * (da.comp[x][n] - db.comp[x][n]);
                }
                const double w = grid.tau * sg.sbp_weight(n);
                c.h_half_l2_sq += w * hh;
                c.monotone_term += w * mono;
                mono_mag += w * std::fabs(mono);
            }
        }
        c.monotone_ok = c.monotone_term >= -1e-12 * mono_mag;
        out.pairs.push_back(c);
    }
    return out;
}

}  // namespace llab

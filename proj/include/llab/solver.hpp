/// @file solver.hpp
/// @brief Backward-Euler solver for the regularized Cauchy-Dirichlet problem
/// and the continuation driver over a decreasing regularization schedule.
#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "llab/calculus.hpp"
#include "llab/scenario.hpp"

namespace llab {

/// Per-step statistics of the nonlinear solve.
struct StepStats {
    int newton_iterations = 0;
    int picard_iterations = 0;
    int rejected_backtracks = 0;
    bool fell_back = false;
    double initial_residual = 0.0;
    double final_residual = 0.0;  ///< max norm over interior nodes
    double tolerance = 0.0;
};

/// Discrete weak form tested against compactly supported bumps.
struct WeakFormCheck {
    std::size_t functions = 0;
    double max_abs = 0.0;   ///< largest |weak form| over the battery
    double bound = 0.0;     ///< sum tau ||phi||_1 * max step residual, plus round-off allowance
    bool pass = true;
};

struct SolveResult {
    double epsilon = 0.0;
    ScalarField u;
    ScalarField f_eps;  ///< datum actually used (mollified when configured)
    std::vector<StepStats> steps;  ///< steps[k] belongs to level k+1
    WeakFormCheck weak_form;
    double wall_seconds = 0.0;  ///< not part of any JSON output

    double max_residual() const;
    int total_newton_iterations() const;
};

/// Reusable implicit stepper for one grid, flux parameter set and epsilon.
///
/// Unknowns are the interior nodes; boundary nodes carry Dirichlet data.
/// The Jacobian of the residual
///   R(u) = (u - u_prev)/tau - div(flux(grad u)) - f
/// restricted to interior rows and columns is I/tau + h^{-n} (G^T W J G)_II,
/// which is symmetric, so a sparse LDL^T factorization is used.
class ImplicitStepper {
public:
    ImplicitStepper(const SpatialGrid& grid, double tau, FluxParams params, NewtonConfig newton);
    ~ImplicitStepper();
    ImplicitStepper(const ImplicitStepper&) = delete;
    ImplicitStepper& operator=(const ImplicitStepper&) = delete;

    /// Solve one step. `u` holds the initial guess on entry (its boundary
    /// values are taken as the Dirichlet data) and the solution on exit.
    /// Throws StepFailure (level -1; callers rethrow with the level).
    StepStats solve(std::span<const double> u_prev, std::span<const double> f, std::span<double> u) const;

    /// Residual at every node (boundary entries are 0).
    std::vector<double> residual(std::span<const double> u_prev, std::span<const double> f,
                                 std::span<const double> u) const;

    /// flux(grad u) as a vector slice.
    VectorSlice flux(std::span<const double> u) const;

    const SpatialGrid& grid() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One implicit step from u_prev at level `level - 1` to `level`, with boundary
/// values g(., t_level) and datum f_eps(., t_level). Requires epsilon > 0.
std::vector<double> step_implicit(std::span<const double> u_prev, std::size_t level, const Scenario& scenario,
                                  const ScalarField& f_eps, double epsilon, StepStats* stats = nullptr);

/// March all levels from u(., t0) = g(., t0).
/// `warm_start`, when given, supplies the initial Newton guess per level.
SolveResult solve_cauchy_dirichlet(const Scenario& scenario, double epsilon,
                                   const ScalarField* warm_start = nullptr);

/// Same, with an explicit datum (already mollified or not).
SolveResult solve_with_datum(const Scenario& scenario, double epsilon, const ScalarField& f_eps,
                             const ScalarField* warm_start = nullptr);

/// Comparison quantities between consecutive schedule entries k and k+1,
/// over the whole grid.
struct ComparisonPair {
    double eps_k = 0.0;
    double eps_next = 0.0;
    double sup_l2_sq = 0.0;        ///< max_t ||u_k - u_{k+1}||^2_{L2}
    double h_half_l2_sq = 0.0;     ///< int |H_{p/2}(Du_k) - H_{p/2}(Du_{k+1})|^2
    double monotone_term = 0.0;    ///< int <H_{p-1}(Du_k) - H_{p-1}(Du_{k+1}), Du_k - Du_{k+1}>
    bool monotone_ok = true;
};

struct ContinuationResult {
    std::vector<SolveResult> solves;
    ScalarField f;  ///< unmollified datum on the grid
    std::vector<ComparisonPair> pairs;
    std::vector<double> grad_lp;  ///< ||Du_{eps_k}||_{L^p(Omega_T)}

    const SolveResult& limit() const { return solves.back(); }
};

ContinuationResult continuation_solve(const Scenario& scenario);

/// Weak-form battery on a computed solution (used by solve_cauchy_dirichlet).
WeakFormCheck weak_form_check(const Scenario& scenario, const SolveResult& result);

}  // namespace llab

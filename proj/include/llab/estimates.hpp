/// @file estimates.hpp
/// @brief Both sides of the local a priori estimates on discrete solutions,
/// fitted constants over cylinder families, and formula audits.
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "llab/calculus.hpp"
#include "llab/scenario.hpp"
#include "llab/solver.hpp"

namespace llab {

/// A measured base quantity. Under u -> l u, nu -> l nu, f -> l^{p-1} f it
/// scales by l^degree; degree is NaN when the quantity is not homogeneous.
struct ReportTerm {
    std::string name;
    double value = 0.0;
    double degree = std::numeric_limits<double>::quiet_NaN();
};

enum class ReportStatus { pass, vacuous, violation };

struct EstimateReport {
    std::string id;
    std::vector<std::pair<std::string, ParabolicCylinder>> cylinders;
    double lhs = 0.0;
    double rhs = 0.0;
    std::vector<ReportTerm> terms;
    nlohmann::json metadata = nlohmann::json::object();

    /// lhs / rhs; +inf when rhs == 0 < lhs, NaN when both vanish.
    double constant() const;
    ReportStatus status() const;
    bool pass() const { return status() != ReportStatus::violation; }
    const ReportTerm* term(const std::string& name) const;
};

/// Nested cylinders Q_{rho/2} c Q_rho c Q_R c Q_R0 sharing one vertex.
struct CylinderSet {
    std::array<double, 2> x0{0.0, 0.0};
    double t0 = 0.0;
    double rho = 0.0;
    double R = 0.0;
    double R0 = 0.0;

    ParabolicCylinder half() const { return {x0, t0, 0.5 * rho}; }
    ParabolicCylinder inner() const { return {x0, t0, rho}; }
    ParabolicCylinder mid() const { return {x0, t0, R}; }
    ParabolicCylinder outer() const { return {x0, t0, R0}; }
};

/// Family of `family` concentric sets with rho evenly spread over [R0/4, R0/2]
/// and R = radius_factor * rho. Throws GeometryError when Q_R0 leaves the grid.
std::vector<CylinderSet> make_family(const SpaceTimeGrid& grid, const EstimateConfig& cfg);

/// Derived fields of one solution, shared by all reports on it.
struct SolutionView {
    FluxParams params;      ///< epsilon is the solve's epsilon
    ScalarField u;
    ScalarField f_eps;      ///< datum used by the solve
    ScalarField f;          ///< unmollified datum
    ScalarField grad_mag;   ///< |Du|
    ScalarField excess;     ///< (|Du| - nu)_+
    ScalarField dh_half;    ///< |D H_{p/2}(Du)| (Frobenius)
    ScalarField df_eps;     ///< |D f_eps|
    ScalarField df;         ///< |D f|

    int dim() const { return u.grid().space.dim; }
};

SolutionView analyze(const ScalarField& u, const ScalarField& f_eps, const ScalarField& f, const FluxParams& params);
SolutionView analyze(const SolveResult& r, const ScalarField& f, const FluxParams& params);

/// Same solution under u -> l u, nu -> l nu, f -> l^{p-1} f (no re-solve).
SolutionView rescaled(const SolutionView& v, double lambda);

/// |D H_lambda(Du)| on every level.
ScalarField dh_magnitude(const ScalarField& u, double lambda, double nu);

/// Weakest admissible datum exponent (np+4)/(np+4-n).
double theta_min(double p, int n);

EstimateReport caccioppoli_report(const SolutionView& v, const CylinderSet& c);
EstimateReport higher_integrability_report(const SolutionView& v, const CylinderSet& c);
/// Throws ParameterError when theta < theta_min.
EstimateReport main_sobolev_report(const SolutionView& v, const CylinderSet& c, double theta);
EstimateReport time_derivative_report(const SolutionView& v, const CylinderSet& c, double theta);

struct ComparisonSummary {
    std::vector<EstimateReport> reports;
    std::vector<double> eps;        ///< eps_k of each pair
    std::vector<double> lhs;
    double slope = std::numeric_limits<double>::quiet_NaN();  ///< log-log fit of lhs against eps_k
    bool sup_nonincreasing = true;  ///< from the second pair on
    bool h_nonincreasing = true;
};

/// Throws InvalidInput for fewer than two schedule entries.
ComparisonSummary comparison_report(const ContinuationResult& run, const FluxParams& params, const ParabolicCylinder& q_r0);

/// Least-squares slope of log y against log x over entries with x, y > 0.
double loglog_slope(std::span<const double> x, std::span<const double> y);

struct ExponentSanity {
    double p = 0.0;
    int n = 0;
    double lhs = 0.0;  ///< (p + 4/n)' = (np+4)/(np+4-n)
    double rhs = 0.0;  ///< (p + 2p/n)' = (np+2p)/(np+2p-n)
    bool pass = false;
};
std::vector<ExponentSanity> exponent_sanity();

/// Constant of the hole-filling iteration: with lambda^alpha = (1+theta)/2,
/// c = (1-lambda)^{-alpha} (1+theta)/(1-theta).
double iteration_constant(double alpha, double theta);

/// c(alpha, theta) (A/(r1-r0)^alpha + B/(r1-r0)^beta + C).
double iteration_bound(double A, double B, double C, double alpha, double beta, double theta, double r0, double r1);

struct IterationCheck {
    bool hypothesis_holds = false;
    double psi_r0 = 0.0;
    double bound = 0.0;
    bool pass = false;  ///< hypothesis fails, or Psi(r0) <= bound
};

/// Psi sampled on a uniform grid over [r0, r1]; the hypothesis is checked on
/// every sampled pair s < t.
IterationCheck iteration_check(std::span<const double> psi, double A, double B, double C, double alpha, double beta,
                               double theta, double r0, double r1);

/// Randomized trial: a smooth random Psi, random A, B, and C chosen as the
/// least value that makes the hypothesis hold on the sample grid.
IterationCheck iteration_trial(std::uint64_t seed);

EstimateReport iteration_report(const IterationCheck& c);
EstimateReport interpolation_lemma_report(const ScalarField& v, const ParabolicCylinder& q, double p, double qexp);
EstimateReport diff_quotient_lemma_report(const SpatialGrid& grid, std::span<const double> f, int axis, double hstep,
                                          std::array<double, 2> x0, double rho, double qexp);

/// Fitted constant over a family of reports of one estimate.
struct FittedConstant {
    std::string id;
    double constant = std::numeric_limits<double>::quiet_NaN();  ///< max over non-vacuous members
    bool vacuous = true;
    bool violation = false;
};
FittedConstant fit(const std::vector<EstimateReport>& family);

/// Two-resolution rule: both constants finite and coarse/fine within [1/factor, factor].
bool stable(const FittedConstant& coarse, const FittedConstant& fine, double factor);

struct HomogeneityAudit {
    double lambda = 1.0;
    double max_defect = 0.0;
    std::vector<std::string> failures;
    bool pass() const { return failures.empty(); }
};

/// Compares each homogeneous term of `scaled` with base * lambda^degree.
HomogeneityAudit audit_homogeneity(const EstimateReport& base, const EstimateReport& scaled, double lambda,
                                   double tol = 1e-8);

nlohmann::json to_json(const EstimateReport& r);
nlohmann::json to_json(const FittedConstant& f);
std::string render_table(const std::vector<EstimateReport>& reports);

}  // namespace llab

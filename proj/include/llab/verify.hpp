/// @file verify.hpp
/// @brief Runs the estimate reports over a cylinder family for every solve of
/// a continuation run and fits one constant per estimate.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "llab/estimates.hpp"

namespace llab {

/// Estimate ids accepted by VerifyOptions::estimates.
const std::vector<std::string>& known_estimates();

struct VerifyOptions {
    std::vector<std::string> estimates;  ///< empty: all of known_estimates()
    std::uint64_t seed = 1;              ///< iteration-lemma trials
    std::uint64_t samples = 100;         ///< number of iteration-lemma trials

    void validate() const;  ///< ConfigError on an unknown id
};

struct VerifyOutcome {
    std::vector<EstimateReport> reports;
    std::map<std::string, FittedConstant> fitted;
    std::optional<ComparisonSummary> comparison;

    /// No selected estimate has a violating member.
    bool pass() const;
};

/// Rebuild the continuation result of `s` from stored solutions (one per
/// schedule entry, in order): datum and mollified datum are resampled.
ContinuationResult rebuild_run(const Scenario& s, std::vector<ScalarField> solutions);

/// Reports for the selected estimates. Geometry problems raise GeometryError,
/// an inadmissible theta raises ParameterError.
VerifyOutcome verify_run(const Scenario& s, const ContinuationResult& run, const VerifyOptions& opt);

/// Fitted constants of two resolutions, per estimate id present in both.
struct StabilityCheck {
    std::string id;
    FittedConstant coarse;
    FittedConstant fine;
    bool stable = false;
};
std::vector<StabilityCheck> compare_resolutions(const VerifyOutcome& coarse, const VerifyOutcome& fine, double factor);

nlohmann::json to_json(const VerifyOutcome& v);
nlohmann::json to_json(const ComparisonSummary& c);
nlohmann::json to_json(const std::vector<StabilityCheck>& s);

}  // namespace llab

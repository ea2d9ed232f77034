#include "llab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "llab/calculus.hpp"
#include "llab/error.hpp"

namespace llab {

namespace {

bool wants(const VerifyOptions& o, const std::string& id) {
    return o.estimates.empty() || std::find(o.estimates.begin(), o.estimates.end(), id) != o.estimates.end();
}

void tag(EstimateReport& r, double eps, const CylinderSet& c) {
    r.metadata["epsilon"] = eps;
    r.metadata["rho"] = c.rho;
}

// zeta * u with zeta = (1 - |x - x0|^2 / R^2)_+^2, so v vanishes on the lateral boundary of B_R
ScalarField cut_off(const ScalarField& u, std::array<double, 2> x0, double R) {
    ScalarField v = u;
    const auto& g = u.grid();
    const auto& sg = g.space;
    for (std::size_t k = 0; k < sg.node_count(); ++k) {
        double r2 = 0.0;
        for (int a = 0; a < sg.dim; ++a) {
            const double d = sg.coord(k, a) - x0[static_cast<std::size_t>(a)];
            r2 += d * d;
        }
        const double w = std::max(1.0 - r2 / (R * R), 0.0);
        for (std::size_t l = 0; l < g.levels(); ++l) v.at(l, k) *= w * w;
    }
    return v;
}

}  // namespace

const std::vector<std::string>& known_estimates() {
    static const std::vector<std::string> ids{"caccioppoli",         "higher_integrability", "main_sobolev",
                                              "time_derivative",     "comparison",           "diff_quotient_lemma",
                                              "interpolation_lemma", "iteration_lemma"};
    return ids;
}

void VerifyOptions::validate() const {
    const auto& ids = known_estimates();
    for (const auto& e : estimates)
        if (std::find(ids.begin(), ids.end(), e) == ids.end()) throw ConfigError("unknown estimate '" + e + "'");
}

bool VerifyOutcome::pass() const {
    return std::none_of(fitted.begin(), fitted.end(), [](const auto& kv) { return kv.second.violation; });
}

ContinuationResult rebuild_run(const Scenario& s, std::vector<ScalarField> solutions) {
    if (solutions.size() != s.epsilon_schedule.size())
        throw InvalidInput("expected one stored solution per schedule entry");
    ContinuationResult run;
    run.f = s.f.sample(s.grid);
    for (std::size_t k = 0; k < solutions.size(); ++k) {
        if (!(solutions[k].grid() == s.grid)) throw InvalidInput("stored solution does not match the scenario grid");
        SolveResult r;
        r.epsilon = s.epsilon_schedule[k];
        r.u = std::move(solutions[k]);
        r.f_eps = s.mollify_datum ? mollify(run.f, r.epsilon) : run.f;
        run.solves.push_back(std::move(r));
    }
    return run;
}

VerifyOutcome verify_run(const Scenario& s, const ContinuationResult& run, const VerifyOptions& opt) {
    opt.validate();
    if (run.solves.empty()) throw InvalidInput("no solutions to verify");
    const auto family = make_family(s.grid, s.estimates);
    const int n = s.grid.space.dim;
    std::vector<double> thetas = s.estimates.theta;
    if (thetas.empty()) thetas.push_back(theta_min(s.params.p, n));

    VerifyOutcome out;
    std::map<std::string, std::vector<EstimateReport>> by_id;
    // with several theta values the theta-dependent estimates are fitted separately
    auto keep = [&](EstimateReport r) {
        std::string key = r.id;
        if (thetas.size() > 1 && r.metadata.contains("theta")) {
            char buf[48];
            std::snprintf(buf, sizeof buf, "[theta=%.6g]", r.metadata["theta"].get<double>());
            key += buf;
        }
        by_id[key].push_back(r);
        out.reports.push_back(std::move(r));
    };

    const bool need_view = wants(opt, "caccioppoli") || wants(opt, "higher_integrability") ||
                           wants(opt, "main_sobolev") || wants(opt, "time_derivative");
    if (need_view) {
        for (const auto& solve : run.solves) {
            const SolutionView v = analyze(solve, run.f, s.params);
            for (const auto& c : family) {
                auto add = [&](EstimateReport r) {
                    tag(r, solve.epsilon, c);
                    keep(std::move(r));
                };
                if (wants(opt, "caccioppoli")) add(caccioppoli_report(v, c));
                if (wants(opt, "higher_integrability")) add(higher_integrability_report(v, c));
                for (double th : thetas) {
                    if (wants(opt, "main_sobolev")) add(main_sobolev_report(v, c, th));
                    if (wants(opt, "time_derivative")) add(time_derivative_report(v, c, th));
                }
            }
        }
    }

    if (wants(opt, "comparison") && run.solves.size() >= 2) {
        out.comparison = comparison_report(run, s.params, family.front().outer());
        for (const auto& r : out.comparison->reports) keep(r);
    }

    const auto& sg = s.grid.space;
    const ScalarField& u = run.limit().u;
    const double R0 = family.front().R0;
    if (wants(opt, "diff_quotient_lemma")) {
        const auto last = u.slice(s.grid.levels() - 1);
        for (int axis = 0; axis < sg.dim; ++axis)
            for (double m : {1.0, 2.0}) {
                const double hstep = m * sg.h;
                if (!(0.5 * R0 + hstep < R0)) continue;
                keep(diff_quotient_lemma_report(sg, last, axis, hstep, s.estimates.x0, 0.5 * R0, 2.0));
            }
    }
    if (wants(opt, "interpolation_lemma")) {
        const ScalarField v = cut_off(u, s.estimates.x0, R0);
        for (const auto& c : family) keep(interpolation_lemma_report(v, c.outer(), s.params.p, 2.0));
    }
    if (wants(opt, "iteration_lemma")) {
        for (std::uint64_t i = 0; i < opt.samples; ++i) {
            EstimateReport r = iteration_report(iteration_trial(opt.seed * 1000003u + i));
            r.metadata["trial"] = i;
            keep(std::move(r));
        }
    }

    for (const auto& [id, fam] : by_id) out.fitted[id] = fit(fam);
    return out;
}

std::vector<StabilityCheck> compare_resolutions(const VerifyOutcome& coarse, const VerifyOutcome& fine, double factor) {
    std::vector<StabilityCheck> out;
    for (const auto& [id, c] : coarse.fitted) {
        const auto it = fine.fitted.find(id);
        if (it == fine.fitted.end()) continue;
        out.push_back({id, c, it->second, stable(c, it->second, factor)});
    }
    return out;
}

nlohmann::json to_json(const ComparisonSummary& c) {
    return {{"eps", c.eps},
            {"lhs", c.lhs},
            {"slope", std::isfinite(c.slope) ? nlohmann::json(c.slope) : nlohmann::json(nullptr)},
            {"sup_nonincreasing", c.sup_nonincreasing},
            {"h_nonincreasing", c.h_nonincreasing}};
}

nlohmann::json to_json(const VerifyOutcome& v) {
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& r : v.reports) reports.push_back(to_json(r));
    nlohmann::json fitted = nlohmann::json::object();
    for (const auto& [id, f] : v.fitted) fitted[id] = to_json(f);
    nlohmann::json j{{"reports", reports}, {"fitted", fitted}, {"pass", v.pass()}};
    if (v.comparison) j["comparison"] = to_json(*v.comparison);
    return j;
}

nlohmann::json to_json(const std::vector<StabilityCheck>& s) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : s)
        out.push_back({{"id", c.id}, {"coarse", to_json(c.coarse)}, {"fine", to_json(c.fine)}, {"stable", c.stable}});
    return out;
}

}  // namespace llab

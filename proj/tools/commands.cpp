#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "json.hpp"
#include "llab/error.hpp"
#include "llab/estimates.hpp"
#include "llab/field_io.hpp"
#include "llab/filtration.hpp"
#include "llab/plot.hpp"
#include "llab/props.hpp"
#include "llab/scenario.hpp"
#include "llab/solver.hpp"
#include "llab/verify.hpp"

namespace llab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void write_json(const std::string& dir, const std::string& name, const json& j) {
    write_file_atomic(path_in(dir, name), j.dump(2) + "\n");
}

/// One entry per command; rerunning a command replaces its entry.
void update_manifest(const std::string& dir, const std::string& command, json entry) {
    json m = json::object();
    const std::string path = path_in(dir, "manifest.json");
    if (fs::exists(path)) {
        try {
            m = json::parse(read_file(path));
        } catch (const std::exception&) {
            m = json::object();
        }
        if (!m.is_object()) m = json::object();
    }
    m["format"] = "llab-manifest-1";
    m["runs"][command] = std::move(entry);
    write_json(dir, "manifest.json", m);
}

json manifest_entry(const Options& o, const std::string& command, std::uint64_t seed, const json& config,
                    const std::vector<std::string>& files) {
    return {{"command", command},     {"scenario", o.config}, {"output_directory", o.out},
            {"seed", seed},          {"config", config},     {"files", files}};
}

void prepare_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + dir + "'");
}

Scenario load(const Options& o) {
    if (o.config.empty()) throw ConfigError("--config is required");
    Scenario s = load_scenario(o.config);
    if (o.seed) s.seed = *o.seed;
    return s;
}

Scenario effective(const Scenario& raw) {
    if (!raw.filtration) return raw;
    Scenario s = to_scenario(raw);
    s.seed = raw.seed;
    return s;
}

/// Same file with the grid node count n -> 2n - 1 per axis.
Scenario refined(const Options& o) {
    json doc = parse_json_text(read_file(o.config));
    json& grid = doc["grid"];
    if (!grid.is_object()) grid = json::object();
    json nodes = grid.value("nodes", json(33));
    if (nodes.is_number_integer())
        nodes = 2 * nodes.get<long>() - 1;
    else if (nodes.is_array())
        for (auto& n : nodes) n = 2 * n.get<long>() - 1;
    grid["nodes"] = nodes;
    const auto base = fs::path(o.config).parent_path();
    Scenario s = parse_scenario(doc, base.empty() ? "." : base.string());
    if (o.seed) s.seed = *o.seed;
    return effective(s);
}

std::string solution_name(std::size_t k) { return "solution_eps" + std::to_string(k) + ".llab1"; }

json solve_summary(const SolveResult& r) {
    const auto& g = r.u.grid();
    const auto first = r.u.slice(0);
    const auto last = r.u.slice(g.levels() - 1);
    double drift = 0.0, umax = 0.0;
    for (std::size_t k = 0; k < first.size(); ++k) drift = std::max(drift, std::fabs(last[k] - first[k]));
    for (double v : r.u.values()) umax = std::max(umax, std::fabs(v));
    long picard = 0, fallbacks = 0;
    for (const auto& st : r.steps) {
        picard += st.picard_iterations;
        fallbacks += st.fell_back ? 1 : 0;
    }
    return {{"epsilon", r.epsilon},
            {"newton_iterations", r.total_newton_iterations()},
            {"picard_iterations", picard},
            {"fallback_steps", fallbacks},
            {"max_step_residual", r.max_residual()},
            {"drift_sup", drift},
            {"max_abs_u", umax},
            {"weak_form",
             {{"functions", r.weak_form.functions},
              {"max_abs", r.weak_form.max_abs},
              {"bound", r.weak_form.bound},
              {"pass", r.weak_form.pass}}}};
}

std::string format_constant(double c) {
    if (!std::isfinite(c)) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", c);
    return buf;
}

bool same_config(json a, json b) {
    a.erase("seed");
    b.erase("seed");
    return a == b;
}

}  // namespace

int cmd_solve(const Options& o) {
    const Scenario raw = load(o);
    const Scenario s = effective(raw);
    prepare_dir(o.out);
    const ContinuationResult run = continuation_solve(s);

    std::vector<std::string> files;
    bool ok = true;
    json per_eps = json::array();
    for (std::size_t k = 0; k < run.solves.size(); ++k) {
        const auto& r = run.solves[k];
        write_file_atomic(path_in(o.out, solution_name(k)), to_binary(r.u));
        files.push_back(solution_name(k));
        json e = solve_summary(r);
        e["grad_lp"] = run.grad_lp[k];
        per_eps.push_back(e);
        ok = ok && r.weak_form.pass;
    }
    if (o.csv) {
        write_file_atomic(path_in(o.out, "solution.csv"), to_csv(run.limit().u));
        files.push_back("solution.csv");
    }
    const json config = scenario_to_json(s);
    write_json(o.out, "config.json", config);
    files.push_back("config.json");
    write_json(o.out, "summary.json", {{"scenario", s.name}, {"solves", per_eps}});
    files.push_back("summary.json");

    if (!run.pairs.empty()) {
        json pairs = json::array();
        for (const auto& p : run.pairs) {
            pairs.push_back({{"eps_k", p.eps_k},
                             {"eps_next", p.eps_next},
                             {"sup_l2_sq", p.sup_l2_sq},
                             {"h_half_l2_sq", p.h_half_l2_sq},
                             {"monotone_term", p.monotone_term},
                             {"monotone_ok", p.monotone_ok}});
            ok = ok && p.monotone_ok;
        }
        write_json(o.out, "comparison.json", {{"pairs", pairs}, {"grad_lp", run.grad_lp}});
        files.push_back("comparison.json");
    }
    if (o.plot) {
        const auto& u = run.limit().u;
        write_file_atomic(path_in(o.out, "solution.svg"),
                          heatmap_svg(u, u.grid().levels() - 1, s.name + ": u at t = T"));
        files.push_back("solution.svg");
    }
    update_manifest(o.out, "solve", manifest_entry(o, "solve", s.seed, config, files));
    std::cout << "solve: " << run.solves.size() << " schedule entr" << (run.solves.size() == 1 ? "y" : "ies")
              << ", artifacts in " << o.out << (ok ? "" : " (weak-form or monotonicity check failed)") << "\n";
    return ok ? kOk : kVerification;
}

int cmd_verify(const Options& o) {
    const Scenario raw = load(o);
    const Scenario s = effective(raw);
    const std::string src = o.solution_dir.empty() ? o.out : o.solution_dir;
    const std::string echo_path = path_in(src, "config.json");
    if (!fs::exists(echo_path)) throw ConfigError("missing solve artifacts in '" + src + "' (run `llab solve` first)");
    if (!same_config(json::parse(read_file(echo_path)), scenario_to_json(s)))
        throw ConfigError("solve artifacts in '" + src + "' were produced from a different configuration");
    std::vector<ScalarField> sols;
    for (std::size_t k = 0; k < s.epsilon_schedule.size(); ++k) {
        const std::string p = path_in(src, solution_name(k));
        if (!fs::exists(p)) throw ConfigError("missing solve artifact '" + p + "'");
        sols.push_back(read_binary_file(p));
    }
    const ContinuationResult run = rebuild_run(s, std::move(sols));

    VerifyOptions vo;
    vo.estimates = o.estimates;
    vo.seed = s.seed;
    vo.samples = o.samples.value_or(100);
    const VerifyOutcome outcome = verify_run(s, run, vo);
    json report = to_json(outcome);
    bool ok = outcome.pass();

    if (o.refine) {
        const Scenario fine = refined(o);
        const VerifyOutcome fine_outcome = verify_run(fine, continuation_solve(fine), vo);
        const auto checks = compare_resolutions(outcome, fine_outcome, s.estimates.stability_factor);
        report["stability"] = to_json(checks);
        report["fine_fitted"] = to_json(fine_outcome)["fitted"];
        for (const auto& c : checks) ok = ok && c.stable;
    }
    report["pass"] = ok;

    prepare_dir(o.out);
    std::vector<std::string> files;
    write_json(o.out, "reports.json", report);
    files.push_back("reports.json");
    write_file_atomic(path_in(o.out, "reports.txt"), render_table(outcome.reports));
    files.push_back("reports.txt");
    const SolutionView v = analyze(run.limit(), run.f, s.params);
    const std::size_t last = s.grid.levels() - 1;
    write_file_atomic(path_in(o.out, "excess.svg"), heatmap_svg(v.excess, last, "(|Du| - nu)_+ at t = T"));
    write_file_atomic(path_in(o.out, "dh_half.svg"), heatmap_svg(v.dh_half, last, "|D H_{p/2}(Du)| at t = T"));
    files.push_back("excess.svg");
    files.push_back("dh_half.svg");
    const json config = scenario_to_json(s);
    write_json(o.out, "config.json", config);
    files.push_back("config.json");
    update_manifest(o.out, "verify", manifest_entry(o, "verify", s.seed, config, files));

    for (const auto& [id, f] : outcome.fitted)
        std::cout << "  " << id << ": constant " << format_constant(f.constant)
                  << (f.violation ? "  VIOLATION" : f.vacuous ? "  vacuous" : "") << "\n";
    std::cout << "verify: " << (ok ? "pass" : "FAIL") << "\n";
    return ok ? kOk : kVerification;
}

int cmd_props(const Options& o) {
    SweepConfig cfg;
    cfg.samples = o.samples.value_or(1'000'000);
    cfg.seed = o.seed.value_or(1);
    cfg.p = o.p_grid;
    cfg.nu = o.nu_grid;
    cfg.n = o.n_grid;
    cfg.validate();
    const std::uint64_t jac_points = std::min<std::uint64_t>(cfg.samples, 10'000);
    const std::size_t fields = cfg.samples > 0 ? 20 : 0;
    const std::uint64_t trials = std::min<std::uint64_t>(cfg.samples, 1000);
    const json config{{"samples", cfg.samples},   {"seed", cfg.seed},
                      {"p", cfg.p},               {"nu", cfg.nu},
                      {"n", cfg.n},               {"tolerance", cfg.tolerance},
                      {"jacobian_points", jac_points}, {"calculus_fields", fields},
                      {"iteration_trials", trials}};

    json report{{"config", config}};
    bool ok = true;
    if (cfg.samples > 0) {
        const SweepReport h = flux_gap_sweep(cfg);
        const SweepReport vp = vp_gap_sweep(cfg);
        const JacobianSweep jac = jacobian_sweep(jac_points, cfg.seed);
        const CalculusLemmaSweep cal = calculus_lemma_sweep(fields, cfg.seed);
        std::uint64_t it_fail = 0;
        double it_ratio = 0.0;
        for (std::uint64_t i = 0; i < trials; ++i) {
            const IterationCheck c = iteration_trial(cfg.seed * 1000003u + i);
            if (!c.pass) ++it_fail;
            if (c.bound > 0.0) it_ratio = std::max(it_ratio, c.psi_r0 / c.bound);
        }
        json sanity = json::array();
        bool sanity_ok = true;
        for (const auto& e : exponent_sanity()) {
            sanity.push_back({{"p", e.p}, {"n", e.n}, {"lhs", e.lhs}, {"rhs", e.rhs}, {"pass", e.pass}});
            sanity_ok = sanity_ok && e.pass;
        }
        report["flux"] = to_json(h);
        report["vp"] = to_json(vp);
        report["jacobian"] = to_json(jac);
        report["jacobian"]["pass"] = jac.max_rel_error <= 1e-6;
        report["calculus"] = to_json(cal);
        report["iteration"] = {{"trials", trials}, {"violations", it_fail}, {"max_ratio", it_ratio}};
        report["exponents"] = sanity;
        ok = h.pass() && vp.pass() && jac.max_rel_error <= 1e-6 && cal.pass() && it_fail == 0 && sanity_ok;
    }
    report["pass"] = ok;

    prepare_dir(o.out);
    write_json(o.out, "props.json", report);
    write_json(o.out, "config.json", config);
    update_manifest(o.out, "props", manifest_entry(o, "props", cfg.seed, config, {"props.json", "config.json"}));
    std::cout << "props: " << (ok ? "pass" : "FAIL") << "\n";
    return ok ? kOk : kVerification;
}

int cmd_filtration(const Options& o) {
    const Scenario raw = load(o);
    if (!raw.filtration) throw ConfigError("scenario has no filtration block");
    const Scenario s = effective(raw);
    const PhysicalParams phys = PhysicalParams::from(*raw.filtration);
    prepare_dir(o.out);
    const double eps = s.epsilon_schedule.back();
    const SolveResult r = solve_cauchy_dirichlet(s, eps);
    const FiltrationState st = FiltrationState::from_solution(r.u, transform_of(s), phys);
    const FiltrationSummary sum = summarize(st, phys);

    std::vector<std::string> files{"pressure.llab1", "pressure_squared.llab1", "filtration.json", "config.json"};
    write_file_atomic(path_in(o.out, "pressure.llab1"), to_binary(st.P));
    write_file_atomic(path_in(o.out, "pressure_squared.llab1"), to_binary(st.u));
    json out{{"transform", transform_of(s).to_json()},
             {"epsilon", eps},
             {"summary", to_json(sum)},
             {"solve", solve_summary(r)}};
    write_json(o.out, "filtration.json", out);
    const json config = scenario_to_json(s);
    write_json(o.out, "config.json", config);
    if (o.csv) {
        write_file_atomic(path_in(o.out, "pressure.csv"), to_csv(st.P));
        files.push_back("pressure.csv");
    }
    if (o.plot) {
        const std::size_t last = st.P.grid().levels() - 1;
        write_file_atomic(path_in(o.out, "pressure.svg"), heatmap_svg(st.P, last, "pressure at t = T"));
        ScalarField mask(st.P.grid(), 0.0);
        for (std::size_t l = 0; l < st.stagnant.size(); ++l)
            for (std::size_t k = 0; k < st.stagnant[l].size(); ++k) mask.at(l, k) = st.stagnant[l][k];
        write_file_atomic(path_in(o.out, "stagnant.svg"), heatmap_svg(mask, last, "stagnant zone at t = T"));
        files.push_back("pressure.svg");
        files.push_back("stagnant.svg");
    }
    update_manifest(o.out, "filtration", manifest_entry(o, "filtration", s.seed, config, files));
    std::cout << "filtration: stagnant fraction at T = " << sum.stagnant_fraction.back() << ", pressure in ["
              << sum.p_min << ", " << sum.p_max << "]\n";
    return r.weak_form.pass ? kOk : kVerification;
}

int cmd_plot(const Options& o) {
    if (o.field.empty()) throw ConfigError("--field is required");
    const ScalarField f = read_binary_file(o.field);
    const long levels = static_cast<long>(f.grid().levels());
    const long level = o.level < 0 ? levels - 1 : o.level;
    if (level >= levels) throw ConfigError("level " + std::to_string(level) + " out of range");
    prepare_dir(o.out);
    const std::string name = fs::path(o.field).stem().string() + "_level" + std::to_string(level) + ".svg";
    const std::string title = o.title.empty() ? fs::path(o.field).filename().string() : o.title;
    write_file_atomic(path_in(o.out, name), heatmap_svg(f, static_cast<std::size_t>(level), title));
    update_manifest(o.out, "plot",
                    {{"command", "plot"}, {"field", o.field}, {"output_directory", o.out}, {"level", level},
                     {"config", {{"field", o.field}, {"level", level}, {"title", title}}}, {"files", {name}}});
    std::cout << "plot: wrote " << path_in(o.out, name) << "\n";
    return kOk;
}

int guarded(int (*cmd)(const Options&), const Options& o) {
    try {
        return cmd(o);
    } catch (const StepFailure& e) {
        std::cerr << "llab: solver failure: " << e.what() << "\n";
        return kSolver;
    } catch (const Error& e) {
        std::cerr << "llab: " << e.what() << "\n";
        return kConfig;
    } catch (const json::exception& e) {
        std::cerr << "llab: malformed artifact: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "llab: internal error: " << e.what() << "\n";
        return kInternal;
    }
}

}  // namespace llab::cli

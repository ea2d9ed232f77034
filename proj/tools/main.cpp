// llab: solve, verify and inspect the regularized degenerate parabolic problem.
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "llab/verify.hpp"

using llab::cli::Options;

int main(int argc, char** argv) {
    CLI::App app{"llab: implicit solver, estimate verification and property sweeps"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* c, bool needs_config) {
        auto* cfg = c->add_option("--config", o.config, "scenario file (JSON)");
        if (needs_config) cfg->required()->check(CLI::ExistingFile);
        c->add_option("--out", o.out, "output directory")->capture_default_str();
        c->add_option("--seed", o.seed, "seed; overrides the scenario seed");
    };

    auto* solve = app.add_subcommand("solve", "march the scenario for every schedule entry");
    common(solve, true);
    solve->add_flag("--plot", o.plot, "write an SVG heatmap of u at the final time");
    solve->add_flag("--csv,!--no-csv", o.csv, "write the finest solution as CSV");

    auto* verify = app.add_subcommand("verify", "estimate reports on the artifacts of a prior solve");
    common(verify, true);
    verify->add_option("--estimates", o.estimates, "comma-separated estimate ids")
        ->delimiter(',')
        ->check(CLI::IsMember(llab::known_estimates()));
    verify->add_option("--samples", o.samples, "iteration-lemma trials (default 100)");
    verify->add_option("--solution", o.solution_dir, "directory with the solve artifacts (default: --out)");
    verify->add_flag("--refine", o.refine, "also solve at doubled resolution and compare fitted constants");
    verify->add_flag("--plot", o.plot, "accepted for symmetry; heatmaps are always written");

    auto* props = app.add_subcommand("props", "randomized sweeps of the pointwise and grid inequalities");
    common(props, false);
    props->add_option("--samples", o.samples, "pairs per parameter point (default 1000000)");
    props->add_option("--p", o.p_grid, "exponents p")->delimiter(',');
    props->add_option("--nu", o.nu_grid, "degeneracy radii nu")->delimiter(',');
    props->add_option("--n", o.n_grid, "dimensions n")->delimiter(',');

    auto* filt = app.add_subcommand("filtration", "gas filtration scenario with a limiting gradient");
    common(filt, true);
    filt->add_flag("--plot", o.plot, "write pressure and stagnant-zone heatmaps");
    filt->add_flag("--csv,!--no-csv", o.csv, "write the pressure as CSV");

    auto* plot = app.add_subcommand("plot", "SVG heatmap of one level of an LLAB1 dump");
    plot->add_option("--field", o.field, "LLAB1 field dump")->required()->check(CLI::ExistingFile);
    plot->add_option("--out", o.out, "output directory")->capture_default_str();
    plot->add_option("--level", o.level, "time level (default: last)");
    plot->add_option("--title", o.title, "plot title");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return llab::cli::kConfig;
    }

    if (*solve) return llab::cli::guarded(llab::cli::cmd_solve, o);
    if (*verify) return llab::cli::guarded(llab::cli::cmd_verify, o);
    if (*props) return llab::cli::guarded(llab::cli::cmd_props, o);
    if (*filt) return llab::cli::guarded(llab::cli::cmd_filtration, o);
    return llab::cli::guarded(llab::cli::cmd_plot, o);
}

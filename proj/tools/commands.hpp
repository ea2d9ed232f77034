// Subcommands of the llab command-line tool.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace llab::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kConfig = 2, kSolver = 3, kVerification = 4 };

struct Options {
    std::string config;
    std::string out = "llab-out";
    std::optional<std::uint64_t> seed;
    std::vector<std::string> estimates;
    std::optional<std::uint64_t> samples;
    bool plot = false;
    bool csv = true;

    std::string solution_dir;  ///< verify: where the solve artifacts live (default: out)
    bool refine = false;       ///< verify: also solve at doubled resolution and compare constants

    std::vector<double> p_grid{2.0, 3.0, 4.0, 5.0};
    std::vector<double> nu_grid{0.0, 0.5, 1.0};
    std::vector<int> n_grid{2, 3};

    std::string field;  ///< plot: LLAB1 dump
    long level = -1;    ///< plot: -1 for the last level
    std::string title;
};

int cmd_solve(const Options& o);
int cmd_verify(const Options& o);
int cmd_props(const Options& o);
int cmd_filtration(const Options& o);
int cmd_plot(const Options& o);

/// Runs a command, mapping library exceptions to exit codes.
int guarded(int (*cmd)(const Options&), const Options& o);

}  // namespace llab::cli

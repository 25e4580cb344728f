#pragma once

// Config-driven front end: INI-style problem files, static validation,
// run / timestep drivers and the model file format.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pinnsolve/errors.hpp"
#include "pinnsolve/solvers.hpp"

namespace pinnsolve::cli {

enum ExitCode : int {
    kOk = 0,
    kOther = 1,
    kConfig = 2,        // config or argument error
    kParse = 3,         // expression syntax
    kAdmissibility = 4,
    kDivergence = 5,
};

int exit_code(ErrorCategory category);

struct RunConfig {
    ProblemSpec spec;
    std::filesystem::path out_dir = "out";
    std::vector<int> resolution;            // evaluation grid; empty = 101 per axis
    std::vector<std::string> analytic;      // per variable, over the domain axes
    int steps = 10;                         // timestep default
    std::vector<int> timestep_resolution;   // per window; empty = resolution
    std::string source;                     // raw config text, echoed in report.txt
    bool sensor_seed_explicit = false;      // otherwise sensors follow the training seed

    std::vector<int> grid_resolution() const;
    std::vector<int> window_resolution() const;
};

struct Loaded {
    RunConfig config;
    std::vector<Issue> issues;  // everything wrong with the file, in reading order
};

/// Reads and converts a config. Never throws for bad content; problems are
/// returned as issues (unknown keys, bad numbers, unparsable expressions,
/// structural and admissibility problems).
Loaded parse_config(std::string_view text);
Loaded load_config(const std::filesystem::path& path);

/// Static checks on an already converted config (expression parsing and spec
/// consistency). parse_config already includes these.
std::vector<Issue> check(const RunConfig& config);

/// Flat parameter file: text header terminated by "end\n", then the
/// parameters as little-endian float64.
void save_model(const std::filesystem::path& path, const SolutionHandle& handle);
/// Loads parameters into a prepared handle; throws Error(Config) when the
/// header does not match the handle's architecture.
void load_model(const std::filesystem::path& path, SolutionHandle& handle);

struct Overrides {
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> steps;
    std::optional<std::filesystem::path> model;  // timestep: reuse a saved model
};

void apply(RunConfig& config, const Overrides& overrides);

/// Writes solution.csv, loss.csv, report.txt and model.bin. Throws Error.
void run(const RunConfig& config, std::ostream& log);
/// Writes timestep_solution.csv and timestep_report.txt. Throws Error.
void timestep(const RunConfig& config, const std::optional<std::filesystem::path>& model, std::ostream& log);

/// Full command line (argv[0] excluded). Returns the process exit code.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pinnsolve::cli

// cli.hpp
// Run configuration and dispatch for the weakval command-line tool.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <weakval/counting.hpp>
#include <weakval/imperfection.hpp>

namespace weakval::cli {

enum exit_code : int {
    ok = 0,
    usage = 2,
    malformed_config = 3,
    conflicting_values = 4,
    out_of_range = 5,
    degenerate = 6,
    library_failure = 7,
    io_failure = 8,
    gate_check_failed = 9,
};

struct cli_error : std::runtime_error {
    cli_error(int code, const std::string& msg) : std::runtime_error(msg), code(code) {}
    int code;
};

struct RunConfig {
    std::string subcommand;
    double angle_deg = 42.0;
    std::optional<double> K;
    std::vector<double> K_grid;
    ImperfectionParams params;
    RunPlan plan;
    unsigned workers = 1;
    std::filesystem::path out; // empty: default name in the output directory
};

/// Default strength grid of fig2 when none is given.
std::vector<double> default_k_grid();

/// args excludes the program name. A YAML file given by --config is read
/// first; flags on the command line override its values.
RunConfig parse_config(const std::vector<std::string>& args);

/// Runs a validated configuration, printing results to `out`.
int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// parse_config + execute with error reporting; what main() calls.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace weakval::cli

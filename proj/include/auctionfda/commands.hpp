#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "auctionfda/curve_prep.hpp"

namespace auctionfda::cli {

enum ExitCode : int { kSuccess = 0, kPartialFailure = 1, kInvalidInput = 2 };

struct RunConfig {
    std::string subcommand;
    std::filesystem::path lots;
    std::filesystem::path bids;
    std::filesystem::path curves;  // regress: optional pre-smoothed curves
    std::filesystem::path spec;    // simulate: optional spec.json
    std::filesystem::path out = ".";
    std::size_t grid = 100;
    int degree = 4;
    int knots = 10;
    int penalty_order = 2;
    double lambda = 0.1;
    ResponseScale response = ResponseScale::fraction_of_final;
    InterpolationSpace interp = InterpolationSpace::log;
    bool monotone = false;
    double alpha = 0.05;
    std::optional<double> outlier_sd;
    std::optional<std::uint64_t> seed;
    bool acceleration = false;   // regress: also regress f''
    bool log1p_history = false;
    std::vector<int> p_values;        // sensitivity; empty means 4,5,6
    std::vector<double> lambda_values;  // sensitivity; empty means 14 log-spaced
};

/// Throws ValidationError for out-of-range numeric settings.
void validate(const RunConfig& config);

/// Canonical "--flag value" echo of every setting, used in output headers.
std::string flag_echo(const RunConfig& config);

int run_simulate(const RunConfig& config, std::ostream& log);
int run_smooth(const RunConfig& config, std::ostream& log);
int run_regress(const RunConfig& config, std::ostream& log);
int run_sensitivity(const RunConfig& config, std::ostream& log);

/// Dispatches on config.subcommand and maps exceptions to exit codes.
int run(const RunConfig& config, std::ostream& log);

}  // namespace auctionfda::cli

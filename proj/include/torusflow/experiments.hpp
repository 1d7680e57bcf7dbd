#pragma once

#include <json.hpp>

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace torusflow {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string experiment;
    std::map<std::string, std::string> parameters;
    std::uint64_t seed = 0;
    std::string output_dir = ".";
};

/// Known experiment names in CLI order.
const std::vector<std::string>& experiment_names();

/// Parses a flat key=value config file ('#' comments, blank lines ok).
std::map<std::string, std::string> load_config_file(const std::string& path);

/// Merges file values and command-line overrides, validates required and
/// unknown keys against the experiment's schema, fills defaults. Throws
/// ConfigError on any violation.
ExperimentConfig build_config(const std::string& experiment,
                              const std::map<std::string, std::string>& file_values,
                              const std::map<std::string, std::string>& overrides);

struct RunReport {
    nlohmann::json json;  // config echo, wall_time, payload, flags
    bool all_passed = true;
    int exit_code = 0;
};

/// Executes the named experiment, writes report.json and the per-series
/// CSV files under config.output_dir. Exit code 0 iff all exercised
/// invariant flags pass; invalid configs throw ConfigError (exit 2).
RunReport run(const ExperimentConfig& config);

/// Writes one CSV per tabular series in the report payload (stable
/// column order, LF line endings). Returns the file names written.
std::vector<std::string> emit_plot_data(const RunReport& report, const std::string& output_dir);

}  // namespace torusflow

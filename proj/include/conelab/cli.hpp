#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace conelab {

/// Invalid configuration (exit status 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

struct RunConfig {
    std::string command;
    std::vector<std::string> cones;          // empty → command default
    std::vector<double> lambdas{0.5};
    std::vector<double> eps{0.0};
    int grid_n = 4096;
    double r_in = 1e-4;
    double r_out = 1e4;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::string catalog_path;                // optional external catalog JSON
    std::vector<double> strip_a{2.0, 4.0, 8.0};
    std::vector<double> taus{10.0, 100.0, 1000.0};
    std::map<std::string, double> tolerances{{"eigen", 1e-10}, {"cw", 1e-6}, {"decompose", 1e-6}};

    nlohmann::json to_json() const;
};

const std::vector<std::string>& known_commands();

/// Applies a JSON document on top of `base`. Throws ConfigError.
RunConfig config_from_json(const nlohmann::json& doc, RunConfig base = {});
/// Reads and parses a config file; parse errors carry line and column.
RunConfig load_config_file(const std::string& path, RunConfig base = {});
/// Throws ConfigError on schema or range violations.
void validate_config(const RunConfig& config);

/// Executes the command; returns the exit status. Diagnostics go to stderr.
int run(const RunConfig& config);

} // namespace conelab

// cli.hpp: configuration parsing and experiment dispatch for the `qrabi` tool.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qrabi::cli {

enum class Experiment { dynamics, bounce, adiabatic, spectrum, fit, eigs };

/// Exit statuses of the tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

/// Validation failure; always names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Fully resolved run configuration. Frequencies in kHz, times in μs.
struct RunConfig {
    Experiment experiment = Experiment::dynamics;

    std::vector<double> ratios;
    double g_khz = 12.5;
    double omega_m_khz = 0.0;  // eigs only; 0 → derived from g and ratio
    double omega0_khz = 0.0;   // eigs only; 0 → equal to omega_m
    bool omega_m_set = false;
    bool omega0_set = false;

    double t_max_us = 2000.0;
    std::size_t samples = 0;
    int n_max = 0;
    int steps_per_period = 64;

    bool noise = false;
    double heating_rate = 60.0;
    double cooling_rate = 60.0;
    double dephasing_rate = 500.0;

    std::string bounce_case = "degenerate";
    int periods = 5;
    int snapshots = 7;

    double delta_max_khz = 200.0;
    double t_tar_us = 300.0;
    double tau_us = 30.0;
    bool reverse = true;
    double bsb_duration_us = 400.0;
    std::size_t bsb_samples = 201;

    double g_p_ratio = 0.0;     // 0 → per-ratio default
    double duration_us = 0.0;   // 0 → per-ratio default
    double f_lo = 0.25;
    double f_hi = 3.5;
    std::size_t points = 201;
    std::string prep = "exact";
    int reference_k = 3;

    std::string input;
    double eta_omega_khz = 25.0;
    int n_fit_max = 15;

    int k = 10;
    int shots = 0;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string output;

    /// Effective key=value pairs in canonical key order (the CSV metadata header).
    std::vector<std::pair<std::string, std::string>> effective;
};

/// Thrown by parse_config for `--help`; carries the usage text.
class HelpRequested : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string to_string(Experiment e);

/// Builds a config from defaults, then `file_values`, then `flag_values` (later wins).
RunConfig resolve_config(Experiment experiment, const std::map<std::string, std::string>& file_values,
                         const std::map<std::string, std::string>& flag_values);

/// Flat `key = value` text; `#` starts a comment. Throws ConfigError on malformed lines.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Parses `qrabi <experiment> [--config FILE] [--key value ...]`.
/// Throws ConfigError on any malformed, unknown or missing key (underscores count as dashes).
RunConfig parse_config(int argc, const char* const* argv);

/// "# key=value key=value ..." line written at the top of every CSV.
std::string metadata_line(const RunConfig& config);

/// Runs the configured experiment and writes its CSV files; returns the exit status.
int run_and_emit(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Entry point used by the executable.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qrabi::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lrfhss/channel.hpp"
#include "lrfhss/scenario.hpp"

namespace lrfhss::config {

enum class Mode { Analytic, Simulate, Compare };

std::string_view to_string(Mode m);
Mode parse_mode(std::string_view text);

/// Variables a sweep may step through.
inline constexpr std::string_view kSweepVariables[] = {"n_users", "density", "tx_power_dbm", "distance_km",
                                                       "snr_threshold_db", "sir_threshold_db"};

struct Sweep {
    std::string variable = "n_users";
    std::vector<double> values;

    friend bool operator==(const Sweep&, const Sweep&) = default;
};

struct ExperimentConfig {
    Scenario scenario;  ///< n_users is the full-scale population
    channel::Environment environment = channel::Environment::Average;
    Mode mode = Mode::Analytic;
    Sweep sweep;
    std::size_t realizations = 1000;
    std::size_t interferer_draws = 8;
    std::size_t trials = 100;
    long long min_tracked_packets = 0;
    double area_scale = 0.01;
    std::string output_path = "out";
    bool paper_mode = false;
    double max_wall_time_s = 0.0;  ///< 0 disables the cap

    void validate() const;
    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses INI text; omitted keys keep their defaults. Throws ConfigError
/// naming the section.key at fault.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

/// Applies `section.key=value` overrides on top of an existing config.
void apply_override(ExperimentConfig& cfg, std::string_view assignment);

/// Full INI rendering; parse_config_text(emit_config(c)) == c.
std::string emit_config(const ExperimentConfig& cfg);

}  // namespace lrfhss::config

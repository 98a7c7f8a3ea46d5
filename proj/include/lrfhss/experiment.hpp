#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lrfhss/config.hpp"
#include "lrfhss/outage.hpp"
#include "lrfhss/scenario.hpp"

namespace lrfhss::experiment {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Raised when a run hits ExperimentConfig::max_wall_time_s.
class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Header plus string cells. All numbers are written in shortest round-trip
/// form, so reruns with the same inputs produce identical bytes.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of the named column; throws std::out_of_range if absent.
    [[nodiscard]] std::size_t column(std::string_view name) const;
    [[nodiscard]] double number(std::size_t row, std::string_view name) const;
    void add_row(std::vector<std::string> cells);
};

std::string format_number(double v);
/// RFC 4180: quote when the field holds a comma, quote, CR or LF.
std::string csv_field(std::string_view text);
void write_csv(std::ostream& out, const CsvTable& table);
CsvTable parse_csv(std::string_view text);
void write_csv_file(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv_file(const std::filesystem::path& path);

/// One sweep point after the sweep value and the area scale are applied.
struct PointSpec {
    double value = 0.0;
    Scenario scenario;  ///< n_users is the simulated (scaled) population
    long long n_users_equiv_fullscale = 0;
    std::optional<double> fixed_g0;
};

/// A config without sweep values expands to a single point at its base
/// scenario, labelled with the current value of the sweep variable.
std::vector<PointSpec> expand_sweep(const config::ExperimentConfig& cfg);

analytic::LocationAveraging averaging_for(const config::ExperimentConfig& cfg);

/// Columns: <variable>, n_users_simulated, n_users_equiv_fullscale, outage, std_error.
/// With d2d_enabled the outage column holds the cooperative outage.
CsvTable run_analytic(const config::ExperimentConfig& cfg);
CsvTable run_simulate(const config::ExperimentConfig& cfg);

/// Outage level where capacity is read; log-linear interpolation between
/// the first pair of points that brackets it.
std::optional<double> capacity_at(std::span<const double> x, std::span<const double> outage,
                                  double threshold = 1e-2);

struct CompareSummary {
    std::string variable;
    CsvTable table;
    std::size_t points_considered = 0;
    double max_rel_dev = 0.0;
    double mean_rel_dev = 0.0;
    std::optional<double> capacity_analytic;
    std::optional<double> capacity_sim;
    double tolerance = 0.1;
    bool pass = true;
};

/// Joins on the sweep column. Relative deviation is |sim - an| / an, taken
/// only where the analytic outage is at least `floor`.
CompareSummary compare(const CsvTable& analytic_table, const CsvTable& sim_table, double tolerance = 0.1,
                       double floor = 1e-2);
std::string format_report(const CompareSummary& summary);

inline constexpr std::string_view kFigureIds[] = {"fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10"};

/// The figure's preset sweep applied on top of `base` (seed, DR, trials,
/// realizations and area scale carry over).
config::ExperimentConfig figure_config(std::string_view id, const config::ExperimentConfig& base);
CsvTable run_figure(std::string_view id, const config::ExperimentConfig& base);

/// Writes <dir>/<stem>.csv and <dir>/<stem>.manifest.
void write_run(const std::filesystem::path& dir, std::string_view stem, const CsvTable& table,
               const config::ExperimentConfig& cfg, double wall_time_s);

/// Runs cfg.mode and writes its files under cfg.output_path; progress and the
/// compare report go to `log`.
void run(const config::ExperimentConfig& cfg, std::ostream& log);

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Fast internal consistency checks; all must pass on a healthy build.
std::vector<Check> selftest();

}  // namespace lrfhss::experiment

#include <chrono>
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lrfhss/config.hpp"
#include "lrfhss/experiment.hpp"

namespace {

using lrfhss::config::ExperimentConfig;

struct Flags {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> realizations;
    std::optional<double> area_scale;
    std::optional<std::string> out;
    std::optional<std::string> dr;
    std::optional<std::string> env;
    bool paper_mode = false;
};

void add_common(CLI::App& app, Flags& f) {
    app.add_option("--config", f.config_path, "INI config file")->check(CLI::ExistingFile);
    app.add_option("--set", f.overrides, "Override a config key, e.g. --set link.tx_power_dbm=20");
    app.add_option("--seed", f.seed, "Experiment seed");
    app.add_option("--trials", f.trials, "Simulation trials per batch");
    app.add_option("--realizations", f.realizations, "Location realizations for the analytic average");
    app.add_option("--area-scale", f.area_scale, "Fraction of the coverage region to populate, in (0, 1]");
    app.add_option("--out", f.out, "Output directory");
    app.add_option("--dr", f.dr, "Data rate")->check(CLI::IsMember({"DR5", "DR6"}));
    app.add_option("--env", f.env, "Shadowing environment")->check(CLI::IsMember({"light", "heavy", "average"}));
    app.add_flag("--paper-mode", f.paper_mode, "Fixed 10-term series and alpha factor 3.9999");
}

ExperimentConfig build_config(const Flags& f) {
    using lrfhss::config::apply_override;
    ExperimentConfig cfg = f.config_path.empty() ? ExperimentConfig{} : lrfhss::config::parse_config_file(f.config_path);
    for (const auto& o : f.overrides) apply_override(cfg, o);
    if (f.seed) apply_override(cfg, "run.seed=" + std::to_string(*f.seed));
    if (f.trials) apply_override(cfg, "run.trials=" + std::to_string(*f.trials));
    if (f.realizations) apply_override(cfg, "run.realizations=" + std::to_string(*f.realizations));
    if (f.area_scale) apply_override(cfg, "run.area_scale=" + lrfhss::experiment::format_number(*f.area_scale));
    if (f.out) apply_override(cfg, "run.output_path=" + *f.out);
    if (f.dr) apply_override(cfg, "scenario.data_rate=" + *f.dr);
    if (f.env) apply_override(cfg, "scenario.environment=" + *f.env);
    if (f.paper_mode) apply_override(cfg, "run.paper_mode=true");
    return cfg;
}

int run_selftest() {
    int failed = 0;
    for (const auto& c : lrfhss::experiment::selftest()) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        if (!c.passed) ++failed;
    }
    std::cout << (failed ? std::to_string(failed) + " check(s) failed\n" : std::string("all checks passed\n"));
    return failed ? 1 : 0;
}

int run_figure(const std::string& id, const ExperimentConfig& cfg) {
    namespace ex = lrfhss::experiment;
    const auto t0 = std::chrono::steady_clock::now();
    const auto table = ex::run_figure(id, cfg);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ex::write_run(cfg.output_path, id, table, ex::figure_config(id, cfg), wall);
    std::cout << "wrote " << cfg.output_path << '/' << id << ".csv (" << table.rows.size() << " rows)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LR-FHSS direct-to-satellite outage lab: analytic model, simulator and figure data"};
    app.require_subcommand(1);
    Flags flags;
    auto* analytic = app.add_subcommand("analytic", "Location-averaged analytic outage over the configured sweep");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo outage over the configured sweep");
    auto* compare = app.add_subcommand("compare", "Compare analytic.csv and simulate.csv in the output directory");
    auto* figure = app.add_subcommand("figure", "Write the data behind one figure");
    auto* selftest = app.add_subcommand("selftest", "Run internal consistency checks");
    std::string figure_id;
    figure->add_option("id", figure_id, "Figure id")
        ->required()
        ->check(CLI::IsMember({"fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10"}));
    for (auto* sub : {analytic, simulate, compare, figure}) add_common(*sub, flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (selftest->parsed()) return run_selftest();
        ExperimentConfig cfg = build_config(flags);
        if (figure->parsed()) return run_figure(figure_id, cfg);
        using lrfhss::config::Mode;
        cfg.mode = analytic->parsed() ? Mode::Analytic : simulate->parsed() ? Mode::Simulate : Mode::Compare;
        lrfhss::experiment::run(cfg, std::cout);
        return 0;
    } catch (const lrfhss::experiment::BudgetExceeded& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

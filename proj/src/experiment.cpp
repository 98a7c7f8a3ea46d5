#include "lrfhss/experiment.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "lrfhss/capture.hpp"
#include "lrfhss/channel.hpp"
#include "lrfhss/geometry.hpp"
#include "lrfhss/mcsim.hpp"
#include "lrfhss/netcode.hpp"
#include "lrfhss/parallel.hpp"
#include "lrfhss/random.hpp"

namespace lrfhss::experiment {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using config::ExperimentConfig;

std::size_t CsvTable::column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::out_of_range("CSV has no column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header.begin());
}

double CsvTable::number(std::size_t row, std::string_view name) const {
    const std::string& cell = rows.at(row).at(column(name));
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw std::invalid_argument("CSV column '" + std::string(name) + "': '" + cell + "' is not a number");
    }
    return v;
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header.size()) throw std::invalid_argument("CSV row width does not match header");
    rows.push_back(std::move(cells));
}

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_csv(std::ostream& out, const CsvTable& table) {
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << csv_field(cells[i]);
        }
        out << "\r\n";
    };
    line(table.header);
    for (const auto& r : table.rows) line(r);
}

CsvTable parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                record.push_back(std::move(field));
                records.push_back(std::move(record));
            }
            field.clear();
            record.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted) throw std::invalid_argument("CSV: unterminated quoted field");
    if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    if (records.empty()) throw std::invalid_argument("CSV: missing header row");
    CsvTable t;
    t.header = std::move(records.front());
    for (std::size_t i = 1; i < records.size(); ++i) t.add_row(std::move(records[i]));
    return t;
}

void write_csv_file(const fs::path& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    write_csv(out, table);
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

CsvTable read_csv_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_csv(ss.str());
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

namespace {

class Deadline {
public:
    explicit Deadline(double seconds) : start_(Clock::now()), limit_(seconds) {}

    void check(std::string_view what) const {
        if (limit_ > 0.0 && elapsed() > limit_) {
            throw BudgetExceeded("wall-time cap of " + format_number(limit_) + " s exceeded during " +
                                 std::string(what));
        }
    }
    [[nodiscard]] double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

private:
    Clock::time_point start_;
    double limit_;
};

double zenith_gain(const Scenario& s) {
    return geometry::path_gain_linear(90.0, s.link.frequency_mhz, s.geometry);
}

double slant_range_km(const geometry::SatelliteGeometry& geo) {
    return geometry::slant_distance_km(geometry::elevation_from_ground_distance(geo.footprint_radius_km, geo), geo);
}

double full_area_km2(const Scenario& s) {
    return geometry::footprint_area_km2(s.geometry, s.slot_s);
}

double current_value(const ExperimentConfig& cfg) {
    const Scenario& s = cfg.scenario;
    const std::string& v = cfg.sweep.variable;
    if (v == "n_users") return static_cast<double>(s.n_users);
    if (v == "density") return static_cast<double>(s.n_users) / full_area_km2(s);
    if (v == "tx_power_dbm") return s.link.tx_power_dbm;
    if (v == "distance_km") return s.geometry.orbital_height_km;
    if (v == "snr_threshold_db") return s.link.snr_threshold_db;
    if (v == "sir_threshold_db") return s.link.sir_threshold_db;
    throw std::invalid_argument("unknown sweep variable '" + v + "'");
}

bool population_sweep(const ExperimentConfig& cfg) {
    return cfg.sweep.variable == "n_users" || cfg.sweep.variable == "density";
}

/// O_D with its standard error carried through dO_D/dO_L.
std::pair<double, double> cooperative(double o_l, double se, const Scenario& s) {
    const double p = analytic::p_d2d(s.p_lora_success, analytic::p_neighbor(s.density_per_km2(), s.d_max_km));
    const double slope = p * (9.0 * o_l * o_l - 8.0 * o_l * o_l * o_l) + 2.0 * (1.0 - p) * o_l;
    return {analytic::outage_d2d(o_l, p), std::abs(slope) * se};
}

CsvTable sweep_table(const ExperimentConfig& cfg) {
    CsvTable t;
    t.header = {cfg.sweep.variable, "n_users_simulated", "n_users_equiv_fullscale", "outage", "std_error"};
    return t;
}

std::vector<analytic::AnalyticPoint> analytic_points(const ExperimentConfig& cfg, const std::vector<PointSpec>& pts,
                                                     const Deadline& deadline) {
    auto avg = averaging_for(cfg);
    avg.checkpoint = [&deadline] { deadline.check("analytic sweep"); };
    if (population_sweep(cfg)) {
        std::vector<long long> ns;
        for (const auto& p : pts) ns.push_back(p.scenario.n_users);
        auto out = analytic::outage_lrfhss_sweep(pts.front().scenario, ns, avg);
        deadline.check("analytic sweep");
        return out;
    }
    std::vector<analytic::AnalyticPoint> out;
    for (const auto& p : pts) {
        avg.fixed_g0 = p.fixed_g0;
        out.push_back(analytic::outage_lrfhss(p.scenario, avg));
        deadline.check("analytic sweep");
    }
    return out;
}

CsvTable analytic_table(const ExperimentConfig& cfg, const Deadline& deadline) {
    const auto pts = expand_sweep(cfg);
    const auto res = analytic_points(cfg, pts, deadline);
    CsvTable t = sweep_table(cfg);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double o = res[i].outage;
        double se = res[i].std_error;
        if (pts[i].scenario.d2d_enabled) std::tie(o, se) = cooperative(o, se, pts[i].scenario);
        t.add_row({format_number(pts[i].value), std::to_string(pts[i].scenario.n_users),
                   std::to_string(pts[i].n_users_equiv_fullscale), format_number(o), format_number(se)});
    }
    return t;
}

mcsim::OutageReport simulate_point(const ExperimentConfig& cfg, const PointSpec& p, const Deadline& deadline) {
    if (p.fixed_g0) {
        throw std::invalid_argument("simulate: sweep variable distance_km needs a fixed device distance, which the "
                                    "simulator does not model; use analytic mode");
    }
    std::vector<mcsim::OutageReport> batches;
    std::size_t done = 0;
    mcsim::OutageReport pooled;
    // Trial t is seeded from (seed, t) alone, so splitting a batch into
    // chunks between deadline checks leaves the result unchanged.
    const std::size_t chunk = std::max<std::size_t>(1, worker_count());
    do {
        for (std::size_t end = done + cfg.trials; done < end;) {
            const std::size_t n = std::min(chunk, end - done);
            batches.push_back(mcsim::simulate(p.scenario, n, cfg.scenario.seed, done));
            done += n;
            deadline.check("simulation");
        }
        pooled = mcsim::estimate(batches);
        if (pooled.trials == 0) throw std::runtime_error("simulate: no tracked packets in the slot window");
        deadline.check("simulation");
    } while (pooled.trials < cfg.min_tracked_packets);
    return pooled;
}

CsvTable simulate_table(const ExperimentConfig& cfg, const Deadline& deadline) {
    CsvTable t = sweep_table(cfg);
    for (const auto& p : expand_sweep(cfg)) {
        const auto r = simulate_point(cfg, p, deadline);
        t.add_row({format_number(p.value), std::to_string(p.scenario.n_users),
                   std::to_string(p.n_users_equiv_fullscale), format_number(r.outage_estimate),
                   format_number(r.std_error)});
    }
    return t;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
    return v;
}

const std::vector<double>& population_grid() {
    static const std::vector<double> g = {1e4, 2e4, 5e4, 1e5, 2e5, 5e5, 1e6, 2e6, 5e6, 1e7};
    return g;
}

std::string_view dr_name(const Scenario& s) {
    return analytic::to_string(s.dr.name);
}

CsvTable figure4(const ExperimentConfig& cfg) {
    CsvTable t;
    t.header = {"tx_power_dbm", "environment", "p_disc_analytic", "p_disc_numint"};
    const auto ctl = cfg.paper_mode ? specfun::SeriesControl::paper_mode() : specfun::SeriesControl::defaults();
    for (double tx : cfg.sweep.values) {
        Scenario s = cfg.scenario;
        s.link.tx_power_dbm = tx;
        const auto link = s.linear_link();
        const double g0 = zenith_gain(s);
        for (auto env : {channel::Environment::InfrequentLight, channel::Environment::Average, channel::Environment::FrequentHeavy}) {
            const auto p = channel::preset(env);
            t.add_row({format_number(tx), std::string(channel::to_string(env)),
                       format_number(analytic::p_disc(p, link, g0, ctl)),
                       format_number(channel::power_cdf_quadrature(link.normalized_snr_threshold() / g0, p))});
        }
    }
    return t;
}

CsvTable figure5(const ExperimentConfig& cfg) {
    constexpr std::size_t kMaxK = 8;
    constexpr std::size_t kDraws = 1'000'000;
    CsvTable t;
    t.header = {"k", "p_cap_analytic", "p_cap_mc", "mc_stderr"};
    const Scenario& s = cfg.scenario;
    const auto link = s.linear_link();
    const double g = zenith_gain(s);
    const auto series = averaging_for(cfg).capture;
    std::vector<double> mc(kMaxK + 1);
    parallel_for(kMaxK, [&](std::size_t i) {
        const std::size_t k = i + 1;
        Rng rng = make_stream(s.seed, {5, k});
        channel::PowerSampler draw(s.fading);
        std::size_t fails = 0;
        for (std::size_t d = 0; d < kDraws; ++d) {
            const double wanted = g * draw(rng);
            double interference = 0.0;
            for (std::size_t j = 0; j < k; ++j) interference += g * draw(rng);
            if (wanted <= link.sir_threshold * interference) ++fails;
        }
        mc[k] = static_cast<double>(fails) / kDraws;
    });
    for (std::size_t k = 1; k <= kMaxK; ++k) {
        const std::vector<double> gains(k, g);
        auto r = analytic::p_cap_detailed(g, gains, s.fading, link, series);
        if (!r.converged) r = analytic::p_cap_mixture(g, gains, s.fading, link, series.n_series_ctl);
        t.add_row({std::to_string(k), format_number(r.value), format_number(mc[k]),
                   format_number(std::sqrt(mc[k] * (1.0 - mc[k]) / kDraws))});
    }
    return t;
}

CsvTable figure6(const ExperimentConfig& cfg) {
    CsvTable t;
    t.header = {"n_users", "data_rate", "interferer_fraction", "header_fraction", "payload_fraction"};
    for (auto dr : {analytic::DataRate::DR6, analytic::DataRate::DR5}) {
        const auto profile = analytic::DataRateProfile::of(dr);
        for (double n : cfg.sweep.values) {
            const auto users = std::llround(n);
            const auto c = analytic::interference_counts(users, cfg.scenario.n_tx_per_slot, cfg.scenario.slot_s,
                                                         profile);
            const double nu = static_cast<double>(users);
            const double hdr = c.i_total > 0 ? c.i_hdr(c.i_total) : 0.0;
            const double pl = c.i_total > 0 ? c.i_pl(c.i_total) : 0.0;
            t.add_row({std::to_string(users), std::string(analytic::to_string(dr)),
                       format_number(static_cast<double>(c.i_total) / nu), format_number(hdr / nu),
                       format_number(pl / nu)});
        }
    }
    return t;
}

CsvTable figure7(const ExperimentConfig& cfg, const Deadline& deadline) {
    const auto an = analytic_table(cfg, deadline);
    const auto sim = simulate_table(cfg, deadline);
    CsvTable t;
    t.header = {"n_users_equiv_fullscale", "outage_analytic", "outage_sim", "sim_stderr"};
    for (std::size_t i = 0; i < an.rows.size(); ++i) {
        t.add_row({an.rows[i][an.column("n_users_equiv_fullscale")], an.rows[i][an.column("outage")],
                   sim.rows[i][sim.column("outage")], sim.rows[i][sim.column("std_error")]});
    }
    return t;
}

CsvTable figure8(const ExperimentConfig& cfg) {
    CsvTable t;
    t.header = {"density_per_km2", "p_neighbor", "p_d2d"};
    for (double rho : cfg.sweep.values) {
        const double pne = analytic::p_neighbor(rho, cfg.scenario.d_max_km);
        t.add_row({format_number(rho), format_number(pne),
                   format_number(analytic::p_d2d(cfg.scenario.p_lora_success, pne))});
    }
    return t;
}

/// Full-scale O_L and O_D for both data rates over the figure's sweep.
CsvTable figure9_10(const ExperimentConfig& base, bool by_distance, const Deadline& deadline) {
    CsvTable t;
    if (by_distance) {
        t.header = {"distance_km", "elevation_deg", "data_rate", "outage_lrfhss", "outage_d2d"};
    } else {
        t.header = {"n_users", "data_rate", "outage_lrfhss", "outage_d2d"};
    }
    for (auto dr : {analytic::DataRate::DR6, analytic::DataRate::DR5}) {
        ExperimentConfig cfg = base;
        cfg.scenario.dr = analytic::DataRateProfile::of(dr);
        cfg.scenario.d2d_enabled = false;
        const auto pts = expand_sweep(cfg);
        const auto res = analytic_points(cfg, pts, deadline);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double o_d = cooperative(res[i].outage, res[i].std_error, pts[i].scenario).first;
            std::vector<std::string> row;
            if (by_distance) {
                row = {format_number(pts[i].value),
                       format_number(geometry::elevation_from_slant_distance(pts[i].value, cfg.scenario.geometry))};
            } else {
                row = {std::to_string(pts[i].scenario.n_users)};
            }
            row.emplace_back(dr_name(pts[i].scenario));
            row.push_back(format_number(res[i].outage));
            row.push_back(format_number(o_d));
            t.add_row(std::move(row));
        }
    }
    return t;
}

std::string manifest_text(std::string_view stem, const CsvTable& table, const ExperimentConfig& cfg,
                          double wall_time_s) {
    std::ostringstream out;
    out << "[manifest]\n"
        << "tool = lrfhss_lab\n"
        << "tool_version = " << kToolVersion << '\n'
        << "output = " << stem << ".csv\n"
        << "rows = " << table.rows.size() << '\n'
        << "seed = " << cfg.scenario.seed << '\n'
        << "threads = " << worker_count() << '\n'
        << "wall_time_s = " << format_number(wall_time_s) << "\n\n"
        << config::emit_config(cfg);
    return out.str();
}

std::string_view mode_stem(config::Mode m) {
    return m == config::Mode::Analytic ? "analytic" : "simulate";
}

}  // namespace

std::vector<PointSpec> expand_sweep(const ExperimentConfig& cfg) {
    const std::string& var = cfg.sweep.variable;
    std::vector<double> values = cfg.sweep.values;
    if (values.empty()) values.push_back(current_value(cfg));
    const double area = full_area_km2(cfg.scenario);
    std::vector<PointSpec> out;
    for (double v : values) {
        PointSpec p;
        p.value = v;
        Scenario& s = p.scenario;
        s = cfg.scenario;
        s.area_scale = cfg.area_scale;
        double full = static_cast<double>(cfg.scenario.n_users);
        if (var == "n_users") {
            full = v;
        } else if (var == "density") {
            full = v * area;
        } else if (var == "tx_power_dbm") {
            s.link.tx_power_dbm = v;
        } else if (var == "distance_km") {
            const double elevation = geometry::elevation_from_slant_distance(v, s.geometry);
            p.fixed_g0 = geometry::path_gain_linear(elevation, s.link.frequency_mhz, s.geometry);
        } else if (var == "snr_threshold_db") {
            s.link.snr_threshold_db = v;
        } else if (var == "sir_threshold_db") {
            s.link.sir_threshold_db = v;
        } else {
            throw std::invalid_argument("unknown sweep variable '" + var + "'");
        }
        s.n_users = std::max(1LL, std::llround(full * cfg.area_scale));
        p.n_users_equiv_fullscale = std::llround(static_cast<double>(s.n_users) / cfg.area_scale);
        try {
            s.validate();
        } catch (const std::invalid_argument& e) {
            throw config::ConfigError("sweep point " + format_number(v) + ": " + e.what());
        }
        out.push_back(std::move(p));
    }
    return out;
}

analytic::LocationAveraging averaging_for(const ExperimentConfig& cfg) {
    auto avg = cfg.paper_mode ? analytic::LocationAveraging::paper_mode() : analytic::LocationAveraging{};
    avg.realizations = cfg.realizations;
    avg.interferer_draws = cfg.interferer_draws;
    avg.seed = cfg.scenario.seed;
    return avg;
}

CsvTable run_analytic(const ExperimentConfig& cfg) {
    cfg.validate();
    return analytic_table(cfg, Deadline(cfg.max_wall_time_s));
}

CsvTable run_simulate(const ExperimentConfig& cfg) {
    cfg.validate();
    return simulate_table(cfg, Deadline(cfg.max_wall_time_s));
}

std::optional<double> capacity_at(std::span<const double> x, std::span<const double> outage, double threshold) {
    if (x.size() != outage.size()) throw std::invalid_argument("capacity_at: size mismatch");
    if (!(threshold > 0.0)) throw std::invalid_argument("capacity_at: threshold must be > 0");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (outage[i] < threshold) continue;
        if (i == 0) return std::nullopt;  // already above at the first point
        const double lo = outage[i - 1];
        const double hi = outage[i];
        if (lo <= 0.0) return x[i];
        const double f = (std::log(threshold) - std::log(lo)) / (std::log(hi) - std::log(lo));
        return x[i - 1] + f * (x[i] - x[i - 1]);
    }
    return std::nullopt;
}

CompareSummary compare(const CsvTable& analytic_table, const CsvTable& sim_table, double tolerance, double floor) {
    if (analytic_table.header.empty() || sim_table.header.empty()) throw std::runtime_error("nothing to compare");
    CompareSummary s;
    s.variable = analytic_table.header.front();
    s.tolerance = tolerance;
    if (sim_table.header.front() != s.variable) {
        throw std::runtime_error("cannot compare: analytic sweeps '" + s.variable + "' but simulation sweeps '" +
                                 sim_table.header.front() + "'");
    }
    s.table.header = {s.variable, "n_users_equiv_fullscale", "outage_analytic", "outage_sim", "sim_stderr",
                      "rel_dev"};
    std::vector<double> xs;
    std::vector<double> oa;
    std::vector<double> os;
    const bool population = s.variable == "n_users" || s.variable == "density";
    double dev_sum = 0.0;
    for (std::size_t i = 0; i < analytic_table.rows.size(); ++i) {
        const auto& key = analytic_table.rows[i].front();
        std::size_t j = 0;
        while (j < sim_table.rows.size() && sim_table.rows[j].front() != key) ++j;
        if (j == sim_table.rows.size()) continue;
        const double an = analytic_table.number(i, "outage");
        const double sim = sim_table.number(j, "outage");
        const double rel = an > 0.0 ? std::abs(sim - an) / an : (sim == 0.0 ? 0.0 : INFINITY);
        if (an >= floor) {
            ++s.points_considered;
            s.max_rel_dev = std::max(s.max_rel_dev, rel);
            dev_sum += rel;
        }
        xs.push_back(population ? analytic_table.number(i, "n_users_equiv_fullscale") : analytic_table.number(i, s.variable));
        oa.push_back(an);
        os.push_back(sim);
        s.table.add_row({key, analytic_table.rows[i][analytic_table.column("n_users_equiv_fullscale")],
                         format_number(an), format_number(sim),
                         sim_table.rows[j][sim_table.column("std_error")], format_number(rel)});
    }
    if (s.table.rows.empty()) throw std::runtime_error("nothing to compare: no sweep values in common");
    s.mean_rel_dev = s.points_considered ? dev_sum / static_cast<double>(s.points_considered) : 0.0;
    s.capacity_analytic = capacity_at(xs, oa, floor);
    s.capacity_sim = capacity_at(xs, os, floor);
    s.pass = s.max_rel_dev <= tolerance;
    return s;
}

std::string format_report(const CompareSummary& s) {
    std::ostringstream out;
    auto pct = [](double v) {
        std::ostringstream o;
        o.precision(3);
        o << v * 100.0 << '%';
        return o.str();
    };
    auto cap = [](const std::optional<double>& c) {
        return c ? format_number(std::round(*c)) : std::string("not reached");
    };
    const std::string axis =
        s.variable == "n_users" || s.variable == "density" ? "n_users_equiv_fullscale" : s.variable;
    out << "compare over " << s.variable << ": " << s.table.rows.size() << " joined points, "
        << s.points_considered << " with analytic outage >= 1e-2\n"
        << "max relative deviation:  " << pct(s.max_rel_dev) << '\n'
        << "mean relative deviation: " << pct(s.mean_rel_dev) << '\n'
        << "capacity at outage 1e-2 (" << axis << "), analytic:   " << cap(s.capacity_analytic) << '\n'
        << "capacity at outage 1e-2 (" << axis << "), simulation: " << cap(s.capacity_sim) << '\n'
        << "result: " << (s.pass ? "PASS" : "FAIL") << " (tolerance " << pct(s.tolerance) << ")\n";
    return out.str();
}

ExperimentConfig figure_config(std::string_view id, const ExperimentConfig& base) {
    ExperimentConfig cfg = base;
    auto& sw = cfg.sweep;
    if (id == "fig4") {
        sw = {"tx_power_dbm", linspace(0.0, 30.0, 16)};
    } else if (id == "fig5") {
        sw = {"n_users", {}};
    } else if (id == "fig6") {
        sw = {"n_users", linspace(1e5, 1e6, 10)};
        cfg.area_scale = 1.0;
    } else if (id == "fig7") {
        sw = {"n_users", population_grid()};
        if (cfg.min_tracked_packets == 0) cfg.min_tracked_packets = 10000;
    } else if (id == "fig8") {
        sw = {"density", {0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0}};
    } else if (id == "fig9") {
        sw = {"n_users", population_grid()};
        cfg.area_scale = 1.0;
    } else if (id == "fig10") {
        const double top = std::floor(slant_range_km(cfg.scenario.geometry));
        sw = {"distance_km", linspace(cfg.scenario.geometry.orbital_height_km, top, 10)};
        cfg.area_scale = 1.0;
    } else {
        throw std::invalid_argument("unknown figure '" + std::string(id) + "' (expected fig4..fig10)");
    }
    cfg.validate();
    return cfg;
}

CsvTable run_figure(std::string_view id, const ExperimentConfig& base) {
    const ExperimentConfig cfg = figure_config(id, base);
    const Deadline deadline(cfg.max_wall_time_s);
    if (id == "fig4") return figure4(cfg);
    if (id == "fig5") return figure5(cfg);
    if (id == "fig6") return figure6(cfg);
    if (id == "fig7") return figure7(cfg, deadline);
    if (id == "fig8") return figure8(cfg);
    if (id == "fig9") return figure9_10(cfg, false, deadline);
    return figure9_10(cfg, true, deadline);
}

void write_run(const fs::path& dir, std::string_view stem, const CsvTable& table, const ExperimentConfig& cfg,
               double wall_time_s) {
    fs::create_directories(dir);
    write_csv_file(dir / (std::string(stem) + ".csv"), table);
    const fs::path manifest = dir / (std::string(stem) + ".manifest");
    std::ofstream out(manifest, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + manifest.string() + "'");
    out << manifest_text(stem, table, cfg, wall_time_s);
}

void run(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    const fs::path dir(cfg.output_path);
    if (cfg.mode == config::Mode::Compare) {
        const fs::path a = dir / "analytic.csv";
        const fs::path s = dir / "simulate.csv";
        if (!fs::exists(a) || !fs::exists(s)) {
            throw std::runtime_error("nothing to compare: need both " + a.string() + " and " + s.string());
        }
        const Clock::time_point t0 = Clock::now();
        const auto summary = compare(read_csv_file(a), read_csv_file(s));
        const std::string report = format_report(summary);
        write_run(dir, "compare", summary.table, cfg, std::chrono::duration<double>(Clock::now() - t0).count());
        std::ofstream(dir / "compare_report.txt", std::ios::binary) << report;
        log << report;
        return;
    }
    const Deadline deadline(cfg.max_wall_time_s);
    const auto table = cfg.mode == config::Mode::Analytic ? analytic_table(cfg, deadline)
                                                           : simulate_table(cfg, deadline);
    const std::string_view stem = mode_stem(cfg.mode);
    write_run(dir, stem, table, cfg, deadline.elapsed());
    log << "wrote " << (dir / (std::string(stem) + ".csv")).string() << " (" << table.rows.size() << " rows, "
        << format_number(std::round(deadline.elapsed() * 100.0) / 100.0) << " s)\n";
}

std::vector<Check> selftest() {
    std::vector<Check> out;
    auto add = [&out](std::string name, bool ok, std::string detail) {
        out.push_back({std::move(name), ok, std::move(detail)});
    };

    add("gf4 code is MDS", netcode::mds_check(), "all 2x2 minors of the generator are nonzero");

    {
        std::size_t failures = 0;
        for (netcode::Gf4 a = 0; a < 4; ++a) {
            for (netcode::Gf4 b = 0; b < 4; ++b) {
                for (unsigned mask = 0; mask < 16; ++mask) {
                    if (std::popcount(mask) < 2) continue;
                    auto cw = netcode::encode_cluster({a}, {b}, netcode::EncodeMode::Cooperative);
                    for (int i = 0; i < 4; ++i) cw.received[i] = (mask >> i) & 1u;
                    const auto dec = netcode::decode_cluster(cw);
                    if (!dec || dec->first != netcode::Symbols{a} || dec->second != netcode::Symbols{b}) ++failures;
                }
            }
        }
        add("any 2 of 4 packets decode", failures == 0, std::to_string(failures) + " failures over 176 cases");
    }

    for (auto env : {channel::Environment::InfrequentLight, channel::Environment::Average, channel::Environment::FrequentHeavy}) {
        const double mass = analytic::density_mass(channel::preset(env), specfun::SeriesControl::defaults());
        add("power density integrates to 1 (" + std::string(channel::to_string(env)) + ")",
            std::abs(mass - 1.0) <= 1e-8, "mass " + format_number(mass));
    }

    {
        Scenario s;
        const auto link = s.linear_link();
        const double g0 = zenith_gain(s);
        const double series = analytic::p_disc(s.fading, link, g0);
        const double quad = channel::power_cdf_quadrature(link.normalized_snr_threshold() / g0, s.fading);
        add("disconnection series vs quadrature", std::abs(series - quad) <= 1e-6 * std::max(quad, 1e-300) + 1e-15,
            format_number(series) + " vs " + format_number(quad));
    }

    {
        Scenario s;
        const auto link = s.linear_link();
        double worst = 0.0;
        const std::vector<std::pair<double, std::vector<double>>> cases = {
            {1.0, {1.0}}, {10.0, {1.0, 3.0}}, {100.0, {1.0, 0.3, 5.0}}, {1.0, {30.0, 1.0, 0.1}}};
        for (const auto& [g0, gains] : cases) {
            analytic::CaptureSeriesConfig series;
            series.i_series_ctl.max_terms = 5000;
            const double a = analytic::p_cap(g0, gains, s.fading, link, series);
            const double b = analytic::p_cap_mixture(g0, gains, s.fading, link).value;
            worst = std::max(worst, std::abs(a - b));
        }
        add("capture series vs Poisson mixture", worst <= 1e-7, "max abs difference " + format_number(worst));
    }

    {
        const auto c = analytic::interference_counts(1'000'000, 1, 291.1, analytic::DataRateProfile::dr6());
        const double frac = static_cast<double>(c.i_total) / 1e6;
        add("DR6 interferer fraction", std::abs(frac - 0.0067) < 1e-4, format_number(frac));
    }

    {
        const ExperimentConfig def;
        bool ok = false;
        try {
            ok = config::parse_config_text(config::emit_config(def)) == def;
        } catch (const std::exception&) {
        }
        add("config round trip", ok, "parse(emit(defaults)) == defaults");
    }

    {
        Scenario s;
        s.n_users = 300;
        s.area_scale = 0.01;
        const auto a = mcsim::simulate(s, 2, 11);
        const auto b = mcsim::simulate(s, 2, 11);
        add("simulation is deterministic under a seed", a == b,
            std::to_string(a.trials) + " tracked packets, outage " + format_number(a.outage_estimate));
    }
    return out;
}

}  // namespace lrfhss::experiment

#include "lrfhss/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace lrfhss::config {

namespace pt = boost::property_tree;

std::string_view to_string(Mode m) {
    switch (m) {
        case Mode::Analytic:
            return "analytic";
        case Mode::Simulate:
            return "simulate";
        case Mode::Compare:
            return "compare";
    }
    return "?";
}

Mode parse_mode(std::string_view text) {
    if (text == "analytic") return Mode::Analytic;
    if (text == "simulate") return Mode::Simulate;
    if (text == "compare") return Mode::Compare;
    throw std::invalid_argument("expected analytic|simulate|compare");
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n\"");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n\"");
    return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw std::invalid_argument("'" + s + "' is not a number");
    return v;
}

long long to_integer(const std::string& s) {
    const double v = to_double(s);
    if (std::floor(v) != v || std::abs(v) > 9.0e18) throw std::invalid_argument("'" + s + "' is not an integer");
    return static_cast<long long>(v);
}

std::size_t to_count(const std::string& s) {
    const long long v = to_integer(s);
    if (v < 0) throw std::invalid_argument("'" + s + "' must be >= 0");
    return static_cast<std::size_t>(v);
}

bool to_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw std::invalid_argument("'" + s + "' is not a boolean");
}

std::vector<double> to_list(const std::string& s) {
    std::vector<double> out;
    std::string item;
    std::string body = s;
    std::replace(body.begin(), body.end(), '[', ' ');
    std::replace(body.begin(), body.end(), ']', ' ');
    std::stringstream ss(body);
    while (std::getline(ss, item, ',')) {
        const auto t = trim(item);
        if (!t.empty()) out.push_back(to_double(t));
    }
    return out;
}

std::string fmt(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string fmt_bool(bool b) {
    return b ? "true" : "false";
}

/// Key table: name -> (setter, getter). Scenario fading values are applied
/// after `scenario.environment` so explicit b0/m/omega override the preset.
struct Field {
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
Field real(T ExperimentConfig::*member) {
    return {[member](ExperimentConfig& c, const std::string& v) { c.*member = to_double(v); },
            [member](const ExperimentConfig& c) { return fmt(c.*member); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
    static const std::vector<std::pair<std::string, Field>> table = [] {
        std::vector<std::pair<std::string, Field>> t;
        auto add = [&t](std::string key, Field f) { t.emplace_back(std::move(key), std::move(f)); };
        auto scen_real = [](double Scenario::*m) {
            return Field{[m](ExperimentConfig& c, const std::string& v) { c.scenario.*m = to_double(v); },
                         [m](const ExperimentConfig& c) { return fmt(c.scenario.*m); }};
        };
        auto link_real = [](double analytic::LinkBudget::*m) {
            return Field{[m](ExperimentConfig& c, const std::string& v) { c.scenario.link.*m = to_double(v); },
                         [m](const ExperimentConfig& c) { return fmt(c.scenario.link.*m); }};
        };
        auto geo_real = [](double geometry::SatelliteGeometry::*m) {
            return Field{[m](ExperimentConfig& c, const std::string& v) { c.scenario.geometry.*m = to_double(v); },
                         [m](const ExperimentConfig& c) { return fmt(c.scenario.geometry.*m); }};
        };
        auto fading_real = [](double channel::ShadowedRiceParams::*m) {
            return Field{[m](ExperimentConfig& c, const std::string& v) { c.scenario.fading.*m = to_double(v); },
                         [m](const ExperimentConfig& c) { return fmt(c.scenario.fading.*m); }};
        };
        auto lora_int = [](int analytic::LoraFrame::*m) {
            return Field{[m](ExperimentConfig& c, const std::string& v) {
                             c.scenario.d2d_frame.*m = static_cast<int>(to_integer(v));
                         },
                         [m](const ExperimentConfig& c) { return std::to_string(c.scenario.d2d_frame.*m); }};
        };
        auto lora_bool = [](bool analytic::LoraFrame::*m) {
            return Field{[m](ExperimentConfig& c, const std::string& v) { c.scenario.d2d_frame.*m = to_bool(v); },
                         [m](const ExperimentConfig& c) { return fmt_bool(c.scenario.d2d_frame.*m); }};
        };

        add("run.mode", {[](ExperimentConfig& c, const std::string& v) { c.mode = parse_mode(v); },
                         [](const ExperimentConfig& c) { return std::string(to_string(c.mode)); }});
        add("run.seed", {[](ExperimentConfig& c, const std::string& v) {
                             c.scenario.seed = static_cast<std::uint64_t>(to_count(v));
                         },
                         [](const ExperimentConfig& c) { return std::to_string(c.scenario.seed); }});
        add("run.realizations", {[](ExperimentConfig& c, const std::string& v) { c.realizations = to_count(v); },
                                 [](const ExperimentConfig& c) { return std::to_string(c.realizations); }});
        add("run.interferer_draws",
            {[](ExperimentConfig& c, const std::string& v) { c.interferer_draws = to_count(v); },
             [](const ExperimentConfig& c) { return std::to_string(c.interferer_draws); }});
        add("run.trials", {[](ExperimentConfig& c, const std::string& v) { c.trials = to_count(v); },
                           [](const ExperimentConfig& c) { return std::to_string(c.trials); }});
        add("run.min_tracked_packets",
            {[](ExperimentConfig& c, const std::string& v) { c.min_tracked_packets = to_integer(v); },
             [](const ExperimentConfig& c) { return std::to_string(c.min_tracked_packets); }});
        add("run.area_scale", real(&ExperimentConfig::area_scale));
        add("run.output_path", {[](ExperimentConfig& c, const std::string& v) { c.output_path = v; },
                                [](const ExperimentConfig& c) { return c.output_path; }});
        add("run.paper_mode", {[](ExperimentConfig& c, const std::string& v) { c.paper_mode = to_bool(v); },
                               [](const ExperimentConfig& c) { return fmt_bool(c.paper_mode); }});
        add("run.max_wall_time_s", real(&ExperimentConfig::max_wall_time_s));

        add("sweep.variable", {[](ExperimentConfig& c, const std::string& v) { c.sweep.variable = v; },
                               [](const ExperimentConfig& c) { return c.sweep.variable; }});
        add("sweep.values", {[](ExperimentConfig& c, const std::string& v) { c.sweep.values = to_list(v); },
                             [](const ExperimentConfig& c) {
                                 std::string s;
                                 for (std::size_t i = 0; i < c.sweep.values.size(); ++i) {
                                     if (i) s += ", ";
                                     s += fmt(c.sweep.values[i]);
                                 }
                                 return s;
                             }});

        add("scenario.data_rate", {[](ExperimentConfig& c, const std::string& v) {
                                       c.scenario.dr = analytic::DataRateProfile::of(analytic::parse_data_rate(v));
                                   },
                                   [](const ExperimentConfig& c) {
                                       return std::string(analytic::to_string(c.scenario.dr.name));
                                   }});
        add("scenario.environment", {[](ExperimentConfig& c, const std::string& v) {
                                         c.environment = channel::parse_environment(v);
                                         c.scenario.fading = channel::preset(c.environment);
                                     },
                                     [](const ExperimentConfig& c) {
                                         return std::string(channel::to_string(c.environment));
                                     }});
        add("scenario.b0", fading_real(&channel::ShadowedRiceParams::b0));
        add("scenario.m", fading_real(&channel::ShadowedRiceParams::m));
        add("scenario.omega", fading_real(&channel::ShadowedRiceParams::omega));
        add("scenario.n_users", {[](ExperimentConfig& c, const std::string& v) { c.scenario.n_users = to_integer(v); },
                                 [](const ExperimentConfig& c) { return std::to_string(c.scenario.n_users); }});
        add("scenario.slot_s", scen_real(&Scenario::slot_s));
        add("scenario.n_tx_per_slot", {[](ExperimentConfig& c, const std::string& v) {
                                           c.scenario.n_tx_per_slot = static_cast<int>(to_integer(v));
                                       },
                                       [](const ExperimentConfig& c) { return std::to_string(c.scenario.n_tx_per_slot); }});
        add("scenario.d2d_enabled", {[](ExperimentConfig& c, const std::string& v) { c.scenario.d2d_enabled = to_bool(v); },
                                     [](const ExperimentConfig& c) { return fmt_bool(c.scenario.d2d_enabled); }});
        add("scenario.d_max_km", scen_real(&Scenario::d_max_km));
        add("scenario.p_lora_success", scen_real(&Scenario::p_lora_success));

        add("link.tx_power_dbm", link_real(&analytic::LinkBudget::tx_power_dbm));
        add("link.tx_gain_dbi", link_real(&analytic::LinkBudget::tx_gain_dbi));
        add("link.rx_gain_dbi", link_real(&analytic::LinkBudget::rx_gain_dbi));
        add("link.noise_figure_db", link_real(&analytic::LinkBudget::noise_figure_db));
        add("link.snr_threshold_db", link_real(&analytic::LinkBudget::snr_threshold_db));
        add("link.sir_threshold_db", link_real(&analytic::LinkBudget::sir_threshold_db));
        add("link.frequency_mhz", link_real(&analytic::LinkBudget::frequency_mhz));

        add("geometry.orbital_height_km", geo_real(&geometry::SatelliteGeometry::orbital_height_km));
        add("geometry.footprint_radius_km", geo_real(&geometry::SatelliteGeometry::footprint_radius_km));
        add("geometry.ground_speed_km_s", geo_real(&geometry::SatelliteGeometry::ground_speed_km_s));
        add("geometry.earth_radius_km", geo_real(&geometry::SatelliteGeometry::earth_radius_km));

        add("lora.payload_bytes", lora_int(&analytic::LoraFrame::payload_bytes));
        add("lora.spreading_factor", lora_int(&analytic::LoraFrame::spreading_factor));
        add("lora.bandwidth_hz", {[](ExperimentConfig& c, const std::string& v) {
                                      c.scenario.d2d_frame.bandwidth_hz = to_double(v);
                                  },
                                  [](const ExperimentConfig& c) { return fmt(c.scenario.d2d_frame.bandwidth_hz); }});
        add("lora.coding_rate", lora_int(&analytic::LoraFrame::coding_rate));
        add("lora.preamble_symbols", lora_int(&analytic::LoraFrame::preamble_symbols));
        add("lora.explicit_header", lora_bool(&analytic::LoraFrame::explicit_header));
        add("lora.crc", lora_bool(&analytic::LoraFrame::crc));
        add("lora.low_data_rate_optimize", lora_bool(&analytic::LoraFrame::low_data_rate_optimize));
        return t;
    }();
    return table;
}

const Field& find_field(const std::string& key) {
    for (const auto& [k, f] : fields()) {
        if (k == key) return f;
    }
    throw ConfigError("unknown key '" + key + "'");
}

void set_field(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    const Field& f = find_field(key);
    try {
        f.set(cfg, trim(value));
    } catch (const std::exception& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

/// Applies keys in table order so the environment preset lands before any
/// explicit fading values.
ExperimentConfig from_map(const std::map<std::string, std::string>& values) {
    ExperimentConfig cfg;
    for (const auto& [k, v] : values) find_field(k);
    for (const auto& [key, field] : fields()) {
        const auto it = values.find(key);
        if (it != values.end()) set_field(cfg, key, it->second);
    }
    cfg.validate();
    return cfg;
}

}  // namespace

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    try {
        scenario.validate();
    } catch (const std::invalid_argument& e) {
        fail(std::string("scenario.") + e.what());
    }
    if (realizations < 1) fail("run.realizations: must be >= 1");
    if (interferer_draws < 1) fail("run.interferer_draws: must be >= 1");
    if (trials < 1) fail("run.trials: must be >= 1");
    if (min_tracked_packets < 0) fail("run.min_tracked_packets: must be >= 0");
    if (!(area_scale > 0.0 && area_scale <= 1.0)) fail("run.area_scale: must lie in (0, 1]");
    if (!(max_wall_time_s >= 0.0)) fail("run.max_wall_time_s: must be >= 0");
    if (output_path.empty()) fail("run.output_path: must not be empty");
    if (std::find(std::begin(kSweepVariables), std::end(kSweepVariables), sweep.variable) ==
        std::end(kSweepVariables)) {
        fail("sweep.variable: unknown variable '" + sweep.variable + "'");
    }
    for (std::size_t i = 1; i < sweep.values.size(); ++i) {
        if (!(sweep.values[i] > sweep.values[i - 1])) fail("sweep.values: must be strictly increasing");
    }
}

ExperimentConfig parse_config_text(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.message() + " (line " + std::to_string(e.line()) +
                          ")");
    }
    std::map<std::string, std::string> values;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError("key '" + section + "' must be inside a [section]");
        for (const auto& [key, value] : body) values[section + "." + key] = value.get_value<std::string>();
    }
    return from_map(values);
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void apply_override(ExperimentConfig& cfg, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError("override must look like section.key=value");
    const auto key = trim(assignment.substr(0, eq));
    const auto value = std::string(assignment.substr(eq + 1));
    set_field(cfg, key, value);
    cfg.validate();
}

std::string emit_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    std::string current;
    for (const auto& [key, field] : fields()) {
        const auto dot = key.find('.');
        const auto section = key.substr(0, dot);
        if (section != current) {
            if (!current.empty()) out << '\n';
            out << '[' << section << "]\n";
            current = section;
        }
        out << key.substr(dot + 1) << " = " << field.get(cfg) << '\n';
    }
    return out.str();
}

}  // namespace lrfhss::config

// Acceptance checks, one per criterion: `acceptance N` prints a single
// "criterion N: PASS|FAIL ..." line and exits nonzero on failure.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lrfhss/capture.hpp"
#include "lrfhss/channel.hpp"
#include "lrfhss/config.hpp"
#include "lrfhss/experiment.hpp"
#include "lrfhss/mcsim.hpp"
#include "lrfhss/netcode.hpp"
#include "lrfhss/outage.hpp"

using namespace lrfhss;
using experiment::CsvTable;

namespace {

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

std::string num(double v, int digits = 4) {
    std::ostringstream o;
    o.precision(digits);
    o << v;
    return o.str();
}

config::ExperimentConfig base_config(analytic::DataRate dr = analytic::DataRate::DR6) {
    config::ExperimentConfig cfg;
    cfg.scenario.dr = analytic::DataRateProfile::of(dr);
    return cfg;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::vector<double> column(const CsvTable& t, std::string_view name, std::string_view dr = {}) {
    std::vector<double> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (!dr.empty() && t.rows[r][t.column("data_rate")] != dr) continue;
        out.push_back(t.number(r, name));
    }
    return out;
}

void disconnection(Verdict& v) {
    auto cfg = base_config();
    cfg.paper_mode = true;
    const auto t = experiment::run_figure("fig4", cfg);
    double worst = 0.0;
    std::string where;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double d = rel(t.number(r, "p_disc_analytic"), t.number(r, "p_disc_numint"));
        if (d > worst) {
            worst = d;
            where = t.rows[r][1] + " at " + t.rows[r][0] + " dBm";
        }
    }
    v.require(t.rows.size() == 48, "48 points");
    v.require(worst <= 0.05, "series within 5% of quadrature");
    v.detail << t.rows.size() << " points, worst relative error " << num(100 * worst, 3) << "% (" << where << ")";
}

void capture(Verdict& v) {
    const auto t = experiment::run_figure("fig5", base_config());
    double worst = 0.0;
    std::size_t considered = 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double an = t.number(r, "p_cap_analytic");
        const double mc = t.number(r, "p_cap_mc");
        if (std::max(an, mc) < 0.05) continue;
        ++considered;
        worst = std::max(worst, rel(an, mc));
    }
    const double an8 = t.number(7, "p_cap_analytic");
    const double mc8 = t.number(7, "p_cap_mc");
    v.require(worst <= 0.05, "analytic within 5% of Monte Carlo");
    v.require(an8 > 0.9 && mc8 > 0.9, "p_cap(8) > 0.9");
    v.detail << considered << " of 8 values >= 0.05, worst relative error " << num(100 * worst, 3)
             << "%, p_cap(8) analytic " << num(an8) << " MC " << num(mc8);
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double cov = sxy - sx * sy / n;
    return cov * cov / ((sxx - sx * sx / n) * (syy - sy * sy / n));
}

void interference(Verdict& v) {
    const auto t = experiment::run_figure("fig6", base_config());
    const std::map<std::string, std::array<double, 3>> target = {{"DR6", {0.007, 0.0096, 0.006}},
                                                                  {"DR5", {0.0088, 0.011, 0.0075}}};
    const char* cols[] = {"interferer_fraction", "header_fraction", "payload_fraction"};
    for (const auto& [dr, want] : target) {
        const auto n = column(t, "n_users", dr);
        v.detail << dr << ":";
        for (int c = 0; c < 3; ++c) {
            const auto frac = column(t, cols[c], dr);
            std::vector<double> count(frac.size());
            double worst = 0.0;
            for (std::size_t i = 0; i < frac.size(); ++i) {
                count[i] = frac[i] * n[i];
                worst = std::max(worst, rel(frac[i], want[static_cast<std::size_t>(c)]));
            }
            const double r2 = r_squared(n, count);
            v.require(r2 > 1.0 - 1e-6, dr + " " + cols[c] + " linear");
            v.require(worst <= 0.15, dr + " " + cols[c] + " within 15%");
            v.detail << " " << num(100 * frac.back(), 3) << "% (R2 " << num(r2, 9) << ")";
        }
        v.detail << "  ";
    }
}

/// Full-scale LR-FHSS and cooperative outage curves for both data rates.
CsvTable full_scale_curves() {
    auto cfg = base_config();
    cfg.realizations = 1000;
    return experiment::run_figure("fig9", cfg);
}

std::optional<double> capacity(const CsvTable& t, std::string_view col, std::string_view dr) {
    const auto n = column(t, "n_users", dr);
    const auto o = column(t, col, dr);
    return experiment::capacity_at(n, o);
}

std::string show(const std::optional<double>& c) { return c ? num(*c, 4) : std::string("not reached"); }

void lrfhss_capacity(Verdict& v) {
    const auto t = full_scale_curves();
    for (auto [dr, want] : {std::pair{"DR6", 497e3}, std::pair{"DR5", 1.49e6}}) {
        const auto c = capacity(t, "outage_lrfhss", dr);
        v.require(c && rel(*c, want) <= 0.1, std::string(dr) + " capacity within 10%");
        v.detail << dr << " capacity " << show(c) << " (target " << num(want) << ", O_L at 1e4 = "
                 << num(column(t, "outage_lrfhss", dr).front(), 3) << ")  ";
    }
}

void cross_validation(Verdict& v) {
    for (auto dr : {analytic::DataRate::DR6, analytic::DataRate::DR5}) {
        auto cfg = base_config(dr);
        cfg.area_scale = 0.01;
        cfg.realizations = 500;
        cfg.min_tracked_packets = 10000;
        const auto t = experiment::run_figure("fig7", cfg);
        CsvTable an;
        CsvTable sim;
        an.header = sim.header = {"n_users", "n_users_equiv_fullscale", "outage", "std_error"};
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const auto& row = t.rows[r];
            an.add_row({row[0], row[0], row[1], "0"});
            sim.add_row({row[0], row[0], row[2], row[3]});
        }
        const auto s = experiment::compare(an, sim);
        const std::string name(analytic::to_string(dr));
        v.require(s.pass, name + " within 10%");
        v.detail << name << ": " << s.points_considered << " points, max dev " << num(100 * s.max_rel_dev, 3)
                 << "% mean " << num(100 * s.mean_rel_dev, 3) << "%  ";
    }
}

void d2d_capacity(Verdict& v) {
    const auto t = full_scale_curves();
    struct Target {
        const char* dr;
        double capacity;
        double ratio;
    };
    for (const auto& [dr, want, ratio_want] : {Target{"DR6", 1.242e6, 2.499}, Target{"DR5", 2.236e6, 1.501}}) {
        const auto cd = capacity(t, "outage_d2d", dr);
        const auto cl = capacity(t, "outage_lrfhss", dr);
        v.require(cd && rel(*cd, want) <= 0.1, std::string(dr) + " D2D capacity within 10%");
        const bool have_ratio = cd && cl;
        const double ratio = have_ratio ? *cd / *cl : 0.0;
        v.require(have_ratio && rel(ratio, ratio_want) <= 0.1, std::string(dr) + " capacity ratio within 10%");
        v.detail << dr << " D2D capacity " << show(cd) << " (target " << num(want) << "), ratio "
                 << (have_ratio ? num(ratio, 4) : std::string("n/a")) << " (target " << ratio_want << ")  ";
    }
    const Scenario s;
    const double pd = analytic::p_d2d(s.p_lora_success, analytic::p_neighbor(0.3, s.d_max_km));
    v.require(std::abs(pd - 0.80) <= 0.03, "P_D2D(0.3) = 0.80 +- 0.03");
    v.detail << "P_D2D(0.3) " << num(pd, 4);
}

void distance(Verdict& v) {
    auto cfg = base_config();
    cfg.realizations = 150;
    const auto t = experiment::run_figure("fig10", cfg);
    for (const char* dr : {"DR6", "DR5"}) {
        const auto o = column(t, "outage_d2d", dr);
        bool monotone = true;
        for (std::size_t i = 1; i < o.size(); ++i) monotone = monotone && o[i] >= o[i - 1];
        const double span = o.back() / o.front();
        v.require(monotone, std::string(dr) + " monotone");
        v.require(span >= 10.0, std::string(dr) + " endpoints a decade apart");
        v.detail << dr << " O_D " << num(o.front(), 3) << " -> " << num(o.back(), 3) << "  ";
    }
}

void network_coding(Verdict& v) {
    std::size_t cases = 0;
    std::size_t failures = 0;
    for (netcode::Gf4 a = 0; a < 4; ++a) {
        for (netcode::Gf4 b = 0; b < 4; ++b) {
            for (unsigned mask = 0; mask < 16; ++mask) {
                if (std::popcount(mask) < 2) continue;
                auto cw = netcode::encode_cluster({a}, {b});
                for (std::size_t i = 0; i < 4; ++i) cw.received[i] = (mask >> i) & 1u;
                ++cases;
                const auto d = netcode::decode_cluster(cw);
                if (!d || d->first != netcode::Symbols{a} || d->second != netcode::Symbols{b}) ++failures;
            }
        }
    }
    v.require(cases == 176 && failures == 0, "all decodes succeed");
    v.require(netcode::mds_check(), "MDS");
    v.detail << cases << " cases, " << failures << " failures, MDS " << (netcode::mds_check() ? "ok" : "broken");
}

void properties(Verdict& v) {
    const Scenario s;
    const auto link = s.linear_link();

    for (const auto& c : experiment::selftest()) v.require(c.passed, c.name);

    for (auto env : {channel::Environment::InfrequentLight, channel::Environment::Average,
                     channel::Environment::FrequentHeavy}) {
        const double mass = analytic::density_mass(channel::preset(env), specfun::SeriesControl::defaults());
        v.require(std::abs(mass - 1.0) <= 1e-8, "normalization " + std::string(channel::to_string(env)));
    }

    // Range clamps and monotonicity of the link-level probabilities.
    bool in_range = true;
    bool disc_monotone = true;
    double prev = 2.0;
    for (double tx = -20.0; tx <= 40.0; tx += 2.0) {
        Scenario t = s;
        t.link.tx_power_dbm = tx;
        const double g0 = geometry::path_gain_linear(30.0, t.link.frequency_mhz, t.geometry);
        const double p = analytic::p_disc(t.fading, t.linear_link(), g0);
        in_range = in_range && p >= 0.0 && p <= 1.0;
        disc_monotone = disc_monotone && p <= prev;
        prev = p;
    }
    const double g = geometry::path_gain_linear(60.0, s.link.frequency_mhz, s.geometry);
    bool cap_monotone = true;
    prev = -1.0;
    for (std::size_t k = 0; k <= 12; ++k) {
        const std::vector<double> gains(k, g);
        const double p = analytic::p_cap_mixture(g, gains, s.fading, link).value;
        in_range = in_range && p >= 0.0 && p <= 1.0;
        cap_monotone = cap_monotone && p >= prev - 1e-12;
        prev = p;
    }
    v.require(in_range, "probabilities in [0, 1]");
    v.require(disc_monotone, "p_disc nonincreasing in tx power");
    v.require(cap_monotone, "p_cap nondecreasing in interferers");

    analytic::LocationAveraging avg;
    avg.realizations = 100;
    const std::vector<long long> pops = {10000, 100000, 1000000, 5000000};
    const auto curve = analytic::outage_lrfhss_sweep(s, pops, avg);
    bool ol_monotone = true;
    for (std::size_t i = 1; i < curve.size(); ++i) ol_monotone = ol_monotone && curve[i].outage >= curve[i - 1].outage;
    v.require(ol_monotone, "O_L nondecreasing in population");
    v.require(analytic::outage_lrfhss_sweep(s, pops, avg)[2].outage == curve[2].outage, "analytic determinism");

    Scenario small = s;
    small.n_users = 5000;
    small.area_scale = 0.01;
    v.require(mcsim::simulate(small, 3, 11) == mcsim::simulate(small, 3, 11), "simulation determinism");

    // Kolmogorov-Smirnov test of the fading sampler against the quadrature CDF.
    constexpr std::size_t kDraws = 20000;
    bool ks_ok = true;
    std::string ks_detail;
    for (auto env : {channel::Environment::InfrequentLight, channel::Environment::Average,
                     channel::Environment::FrequentHeavy}) {
        const auto p = channel::preset(env);
        Rng rng = make_stream(12, {static_cast<std::uint64_t>(env)});
        channel::PowerSampler draw(p);
        std::vector<double> x(kDraws);
        for (auto& d : x) d = draw(rng);
        std::sort(x.begin(), x.end());
        // CDF at the sorted draws by accumulating the density between them.
        double dmax = 0.0;
        double f = 0.0;
        double prev = 0.0;
        for (std::size_t i = 0; i < kDraws; ++i) {
            f += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
                [&p](double r) { return channel::power_pdf(r, p); }, prev, x[i], 0, 1e-14);
            prev = x[i];
            dmax = std::max({dmax, std::abs(f - static_cast<double>(i) / kDraws),
                             std::abs(f - static_cast<double>(i + 1) / kDraws)});
        }
        const bool ok = dmax < 1.63 / std::sqrt(static_cast<double>(kDraws));  // alpha = 0.01
        ks_ok = ks_ok && ok;
        ks_detail += " " + std::string(channel::to_string(env)) + " D=" + num(dmax, 3);
    }
    v.require(ks_ok, "sampler KS");
    v.detail << "selftest, normalization, clamps, monotonicity, determinism; KS" << ks_detail;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: acceptance <criterion 1-9>\n";
        return 2;
    }
    const int id = std::atoi(argv[1]);
    // Wall-time limits in seconds.
    const std::map<int, std::pair<std::function<void(Verdict&)>, double>> criteria = {
        {1, {disconnection, 10}},  {2, {capture, 120}},       {3, {interference, 1}},
        {4, {lrfhss_capacity, 300}}, {5, {cross_validation, 900}}, {6, {d2d_capacity, 300}},
        {7, {distance, 60}},       {8, {network_coding, 1}},  {9, {properties, 300}},
    };
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
        std::cerr << "unknown criterion " << argv[1] << '\n';
        return 2;
    }
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        it->second.first(v);
    } catch (const std::exception& e) {
        v.pass = false;
        v.detail << "[error: " << e.what() << "] ";
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.require(elapsed < it->second.second, "runtime under " + num(it->second.second) + " s");
    std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail.str() << " ["
              << num(elapsed, 3) << " s]\n";
    return v.pass ? 0 : 1;
}

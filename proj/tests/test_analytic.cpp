#include <doctest.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "lrfhss/capture.hpp"
#include "lrfhss/channel.hpp"
#include "lrfhss/geometry.hpp"
#include "lrfhss/link.hpp"
#include "lrfhss/outage.hpp"
#include "lrfhss/scenario.hpp"

using namespace lrfhss;
using namespace lrfhss::analytic;

namespace {

/// Pr{g0 X0 <= delta * sum g_i X_i} from independent fading draws.
std::pair<double, double> capture_mc(double g0, const std::vector<double>& gains, const channel::ShadowedRiceParams& p,
                                     double delta, int draws, std::uint64_t seed) {
    Rng rng = make_stream(seed);
    channel::PowerSampler draw(p);
    int fails = 0;
    for (int d = 0; d < draws; ++d) {
        const double wanted = g0 * draw(rng);
        double interference = 0.0;
        for (double g : gains) interference += g * draw(rng);
        if (wanted <= delta * interference) ++fails;
    }
    const double est = static_cast<double>(fails) / draws;
    return {est, std::sqrt(est * (1.0 - est) / draws)};
}

double binomial_tail(int n, int from, double p) {
    double s = 0.0;
    for (int k = from; k <= n; ++k) s += std::tgamma(n + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0)) *
                                         std::pow(p, k) * std::pow(1.0 - p, n - k);
    return s;
}

}  // namespace

TEST_SUITE("analytic") {
    TEST_CASE("data rate profiles") {
        const auto dr5 = DataRateProfile::dr5();
        const auto dr6 = DataRateProfile::dr6();
        CHECK(dr5.toa_s() == doctest::Approx(1.209));
        CHECK(dr6.toa_s() == doctest::Approx(0.976));
        CHECK(dr5.omega() == 4);
        CHECK(dr6.omega() == 2);
        CHECK(dr5.fragments() == 8);
        CHECK(dr6.fragments() == 7);
        CHECK(dr5.groups * dr5.carriers_per_group == 3120);
        CHECK(parse_data_rate("DR6") == DataRate::DR6);
        CHECK_THROWS(parse_data_rate("DR7"));
    }

    TEST_CASE("noise power and link conversion") {
        CHECK(noise_power_dbm(6.0, 488.0) == doctest::Approx(-141.11).epsilon(1e-4));
        CHECK(noise_power_dbm(0.0, 1.0) == doctest::Approx(-174.0));
        CHECK(noise_power_dbm(6.0, 4880.0) == doctest::Approx(-131.11).epsilon(1e-4));
        const auto link = LinearLink::from(LinkBudget{}, 488.0);
        CHECK(link.effective_power_mw == doctest::Approx(std::pow(10.0, 5.51)).epsilon(1e-12));
        CHECK(link.snr_threshold == doctest::Approx(std::pow(10.0, 0.396)).epsilon(1e-12));
        CHECK(link.sir_threshold == doctest::Approx(std::pow(10.0, 0.6)).epsilon(1e-12));
    }

    TEST_CASE("LoRa airtime") {
        CHECK(lora_time_on_air_s(LoraFrame{}) == doctest::Approx(0.493568).epsilon(1e-9));
        LoraFrame sf7 = LoraFrame{};
        sf7.spreading_factor = 7;
        sf7.bandwidth_hz = 125e3;
        sf7.coding_rate = 1;
        // ceil((240 - 28 + 28 + 16) / 28) = 10 blocks of 5 symbols, 12.25 preamble symbols at 1.024 ms.
        CHECK(lora_time_on_air_s(sf7) == doctest::Approx((12.25 + 8 + 10 * 5) * 1.024e-3).epsilon(1e-9));
    }

    TEST_CASE("disconnection") {
        Scenario s;
        const auto link = s.linear_link();
        const double g0 = geometry::path_gain_linear(90.0, s.link.frequency_mhz, s.geometry);
        const double x = link.normalized_snr_threshold() / g0;
        for (auto env : {channel::Environment::InfrequentLight, channel::Environment::Average,
                         channel::Environment::FrequentHeavy}) {
            const auto p = channel::preset(env);
            const double quad = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                [&](double r) { return channel::power_pdf(r, p); }, 0.0, x, 15, 1e-13);
            CHECK(p_disc(p, link, g0) == doctest::Approx(quad).epsilon(1e-8));
        }
        auto quiet = LinkBudget{};
        quiet.snr_threshold_db = -400.0;
        CHECK(p_disc(s.fading, LinearLink::from(quiet, 488.0), g0) == doctest::Approx(0.0).epsilon(1e-30));
        auto deaf = LinkBudget{};
        deaf.tx_power_dbm = -300.0;
        CHECK(p_disc(s.fading, LinearLink::from(deaf, 488.0), g0) == doctest::Approx(1.0).epsilon(1e-9));
    }

    TEST_CASE("density mass identity holds for every preset") {
        for (auto env : {channel::Environment::InfrequentLight, channel::Environment::Average,
                         channel::Environment::FrequentHeavy}) {
            CHECK(std::abs(density_mass(channel::preset(env), specfun::SeriesControl::defaults()) - 1.0) <= 1e-8);
        }
    }

    TEST_CASE("capture coefficients reconstruct the interference transform") {
        const auto p = channel::preset(channel::Environment::Average);
        const std::vector<double> gains = {1.0, 0.6, 2.5};
        const CaptureSeriesConfig cfg;
        const auto c = capture_coefficients(gains, p, cfg, 3000);
        CHECK(c.c_seq.front() == doctest::Approx(1.0));
        const double s = 0.1 / c.alpha;
        const double eta = 1.0 / (1.0 + c.alpha * s);
        double series = 0.0;
        for (std::size_t i = 0; i < c.c_seq.size(); ++i) series += c.c_seq[i] * std::pow(eta, 3.0 + i);
        double direct = 1.0;
        for (double g : gains) direct *= channel::power_mgf(-g * s, p);
        CHECK(c.d_const() * series == doctest::Approx(direct).epsilon(1e-8));
    }

    TEST_CASE("capture failure: trivial limits") {
        Scenario s;
        const auto link = s.linear_link();
        CHECK(p_cap(1.0, std::vector<double>{}, s.fading, link) == 0.0);
        auto lb = LinkBudget{};
        lb.sir_threshold_db = -300.0;
        // Zero up to the series tolerance.
        CHECK(p_cap(1.0, std::vector<double>{1.0, 1.0}, s.fading, LinearLink::from(lb, 488.0)) < 1e-8);
        CHECK_THROWS(p_cap(1.0, std::vector<double>{1.0}, s.fading, link, CaptureSeriesConfig{4.5}));
    }

    TEST_CASE("capture failure against Monte Carlo, series and mixture forms") {
        Scenario s;
        const auto link = s.linear_link();
        struct Case {
            double g0;
            std::vector<double> gains;
        };
        const std::vector<Case> cases = {{1.0, {1.0}}, {10.0, {1.0, 3.0}}, {100.0, {1.0, 0.3, 5.0}},
                                         {1.0, {10.0, 0.1}}, {30.0, {1.0, 1.0, 1.0, 1.0}}};
        std::uint64_t seed = 100;
        for (const auto& c : cases) {
            CaptureSeriesConfig wide;
            wide.i_series_ctl.max_terms = 5000;
            const auto series = p_cap_detailed(c.g0, c.gains, s.fading, link, wide);
            const auto mixture = p_cap_mixture(c.g0, c.gains, s.fading, link);
            REQUIRE(series.converged);
            CHECK(series.value == doctest::Approx(mixture.value).epsilon(1e-7));
            const auto [mc, se] = capture_mc(c.g0, c.gains, s.fading, link.sir_threshold, 200000, ++seed);
            CHECK(std::abs(series.value - mc) <= 4.0 * se + 1e-6);
        }
    }

    TEST_CASE("capture failure with Rayleigh interferers has a closed form") {
        const channel::ShadowedRiceParams rayleigh{0.5, 0.0, 0.0};
        Scenario s;
        const auto link = s.linear_link();
        // X ~ Exp(1): Pr{X0 <= d (X1 g1)/g0} = 1 - 1/(1 + d g1/g0).
        const double d = link.sir_threshold;
        CHECK(p_cap_mixture(2.0, std::vector<double>{1.0}, rayleigh, link).value ==
              doctest::Approx(1.0 - 1.0 / (1.0 + d / 2.0)).epsilon(1e-10));
    }

    TEST_CASE("interference counts") {
        const auto dr6 = DataRateProfile::dr6();
        const auto c = interference_counts(100000, 1, 291.1, dr6);
        CHECK(c.i_total == 670);
        CHECK(c.i_hdr(10) == doctest::Approx(13.36).epsilon(1e-3));
        CHECK(c.i_pl(10) == doctest::Approx(8.66).epsilon(1e-3));
        CHECK(c.i_hdr(20) == doctest::Approx(2.0 * c.i_hdr(10)));
        CHECK_THROWS(c.i_hdr(0));
        CHECK(interference_counts(1, 1, 291.1, dr6).i_total == 0);
    }

    TEST_CASE("header, payload and noise-only losses") {
        const auto dr6 = DataRateProfile::dr6();
        const auto counts = interference_counts(100000, 1, 291.1, dr6);
        const CaptureFn always = [](std::size_t) { return 1.0; };
        const CaptureFn never = [](std::size_t) { return 0.0; };
        CHECK(p_hdr(10, dr6, 0.01, always, counts) ==
              doctest::Approx(std::pow(0.01 + 0.99 * (1.0 - std::pow(59.0 / 60.0, 14)), 2)).epsilon(1e-12));
        CHECK(p_hdr(10, dr6, 0.01, always, counts) == doctest::Approx(0.04716).epsilon(1e-3));
        CHECK(p_hdr(10, dr6, 0.2, never, counts) == doctest::Approx(0.04));
        CHECK(p_hdr(10, dr6, 1.0, always, counts) == doctest::Approx(1.0));
        CHECK(p_pl(dr6, 0.1) == doctest::Approx(0.08146).epsilon(1e-4));
        CHECK(p_pl(dr6, 0.0) == 0.0);
        CHECK(p_pl(dr6, 1.0) == doctest::Approx(1.0));
        const double hdr = 1e-4;
        const double expected = std::pow(51.0 / 52.0, 670) * (hdr + (1.0 - hdr) * binomial_tail(5, 2, 0.01));
        CHECK(std::pow(51.0 / 52.0, 670) == doctest::Approx(2.27e-6).epsilon(5e-3));
        CHECK(p_ni(dr6, 0.01, counts) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(p_ni(dr6, 0.0, counts) == 0.0);
    }

    TEST_CASE("collision loss and group weights") {
        const CaptureFn half = [](std::size_t) { return 0.5; };
        CHECK(collision_loss(14, 60, half) == doctest::Approx(0.5 * (1.0 - std::pow(59.0 / 60.0, 14))).epsilon(1e-12));
        CHECK(collision_loss(0, 60, half) == 0.0);
        for (long long i : {5LL, 670LL, 50000LL}) {
            const auto w = group_sharing_weights(i, 52);
            double total = 0.0;
            double mean = 0.0;
            for (std::size_t k = 0; k < w.weights.size(); ++k) {
                total += w.weights[k];
                mean += w.weights[k] * static_cast<double>(w.first + static_cast<long long>(k));
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(mean == doctest::Approx(static_cast<double>(i) / 52.0).epsilon(1e-9));
        }
    }

    TEST_CASE("outage for a fixed realization") {
        const auto dr6 = DataRateProfile::dr6();
        const auto counts = interference_counts(100000, 1, 291.1, dr6);
        const CaptureFn never = [](std::size_t) { return 0.0; };
        const CaptureFn always = [](std::size_t) { return 1.0; };
        CHECK(outage_given(dr6, 0.0, never, counts) == 0.0);
        auto many_groups = dr6;
        many_groups.groups = 1000000000;
        const double noise_only = 1e-4 + (1.0 - 1e-4) * binomial_tail(5, 2, 0.01);
        CHECK(outage_given(many_groups, 0.01, always, counts) == doctest::Approx(noise_only).epsilon(1e-5));
        double previous = 0.0;
        for (long long n : {1000LL, 10000LL, 100000LL, 1000000LL}) {
            const double o = outage_given(dr6, 0.01, always, interference_counts(n, 1, 291.1, dr6));
            CHECK(o >= previous);
            CHECK(o <= 1.0);
            previous = o;
        }
    }

    TEST_CASE("location averaging") {
        Scenario s;
        s.dr = DataRateProfile::dr6();
        LocationAveraging avg;
        avg.realizations = 40;
        const std::vector<long long> ns = {1000, 20000, 200000};
        const auto a = outage_lrfhss_sweep(s, ns, avg);
        const auto b = outage_lrfhss_sweep(s, ns, avg);
        REQUIRE(a.size() == 3);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].outage == b[i].outage);
            CHECK(a[i].outage >= 0.0);
            CHECK(a[i].outage <= 1.0);
            if (i > 0) CHECK(a[i].outage >= a[i - 1].outage);
        }
        auto mixture = avg;
        mixture.capture_method = CaptureMethod::Mixture;
        const auto m = outage_lrfhss_sweep(s, ns, mixture);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(m[i].outage == doctest::Approx(a[i].outage).epsilon(1e-6));

        auto no_capture = avg;
        no_capture.capture_enabled = false;
        // Without capture every collision is fatal.
        CHECK(outage_lrfhss_sweep(s, ns, no_capture).back().outage > a.back().outage);

        auto near = avg;
        near.fixed_g0 = geometry::path_gain_linear(90.0, s.link.frequency_mhz, s.geometry);
        auto far = avg;
        far.fixed_g0 = geometry::path_gain_linear(10.0, s.link.frequency_mhz, s.geometry);
        s.n_users = 100000;
        CHECK(outage_lrfhss(s, near).outage < outage_lrfhss(s, far).outage);
    }

    TEST_CASE("outage monotone in the thresholds") {
        Scenario s;
        s.n_users = 50000;
        LocationAveraging avg;
        avg.realizations = 30;
        double previous = 0.0;
        for (double psi : {0.0, 3.96, 8.0}) {
            s.link.snr_threshold_db = psi;
            const double o = outage_lrfhss(s, avg).outage;
            CHECK(o >= previous);
            previous = o;
        }
        s.link.snr_threshold_db = 3.96;
        previous = 0.0;
        for (double delta : {0.0, 6.0, 10.0}) {
            s.link.sir_threshold_db = delta;
            const double o = outage_lrfhss(s, avg).outage;
            CHECK(o >= previous);
            previous = o;
        }
    }

    TEST_CASE("D2D pieces") {
        CHECK(p_neighbor(0.0, 1.5) == 0.0);
        CHECK(p_neighbor(0.3, 1.5) == doctest::Approx(1.0 - std::exp(-0.3 * std::numbers::pi * 2.25)).epsilon(1e-14));
        CHECK(p_neighbor(0.3, 1.5) == doctest::Approx(0.8800).epsilon(1e-4));
        CHECK(p_neighbor(0.3, 2.0) > p_neighbor(0.3, 1.5));
        CHECK(p_neighbor(0.4, 1.5) > p_neighbor(0.3, 1.5));
        CHECK(p_d2d(0.9, 1.0) == doctest::Approx(0.9));
        CHECK(p_d2d(0.9, p_neighbor(0.3, 1.5)) == doctest::Approx(0.792).epsilon(1e-3));
        CHECK(p_d2d(0.0, 0.7) == 0.0);
        CHECK(outage_d2d(0.1, 0.0) == doctest::Approx(0.01));
        CHECK(outage_d2d(1.0, 0.4) == doctest::Approx(1.0));
        CHECK(outage_d2d(0.1, 0.8) == doctest::Approx(0.00424).epsilon(1e-9));
        // O * Pr{at least 2 of 3 Bernoulli(O) losses}.
        const double o = 0.1;
        const double two_of_three = 3.0 * o * o * (1.0 - o) + o * o * o;
        CHECK(outage_d2d(o, 1.0) == doctest::Approx(o * two_of_three).epsilon(1e-12));
        CHECK(outage_d2d_literal(0.2, 0.3, 0.4, 0.5, 0.0) == doctest::Approx(0.04));
        CHECK(outage_d2d_literal(0.1, 0.1, 0.1, 0.1, 1.0) == doctest::Approx(0.1 * 0.1 * (0.81 + 0.09 + 0.01)));
        for (double ol : {0.01, 0.1, 0.5}) CHECK(outage_d2d(ol, 0.79) <= ol);
    }
}

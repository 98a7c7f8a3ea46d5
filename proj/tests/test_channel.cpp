#include <doctest.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "lrfhss/channel.hpp"

using namespace lrfhss;
using namespace lrfhss::channel;

namespace {

double integrate(auto f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-12);
}

const Environment kEnvs[] = {Environment::InfrequentLight, Environment::FrequentHeavy, Environment::Average};

}  // namespace

TEST_SUITE("channel") {
    TEST_CASE("presets") {
        CHECK(preset(Environment::InfrequentLight) == ShadowedRiceParams{0.158, 19.4, 1.29});
        CHECK(preset(Environment::FrequentHeavy) == ShadowedRiceParams{0.063, 0.739, 8.97e-4});
        CHECK(preset(Environment::Average) == ShadowedRiceParams{0.126, 10.1, 0.835});
        CHECK(parse_environment("light") == Environment::InfrequentLight);
        CHECK(parse_environment("heavy") == Environment::FrequentHeavy);
        CHECK_THROWS(parse_environment("urban"));
    }

    TEST_CASE("power density normalisation and mean") {
        for (auto env : kEnvs) {
            const auto p = preset(env);
            const double inf = std::numeric_limits<double>::infinity();
            CHECK(integrate([&](double r) { return power_pdf(r, p); }, 0.0, inf) == doctest::Approx(1.0).epsilon(1e-6));
            CHECK(integrate([&](double r) { return r * power_pdf(r, p); }, 0.0, inf) ==
                  doctest::Approx(p.mean_power()).epsilon(1e-4));
        }
        const auto avg = preset(Environment::Average);
        CHECK(power_pdf(0.0, avg) == doctest::Approx(0.2262).epsilon(2e-4));
        CHECK(power_pdf(0.0, avg) == doctest::Approx(series_constants(avg).a_const).epsilon(1e-14));
    }

    TEST_CASE("envelope density is the power density under r = h^2") {
        const auto p = preset(Environment::Average);
        for (double h : {0.1, 1.0, 2.0}) {
            CHECK(envelope_pdf(h, p) == doctest::Approx(2.0 * h * power_pdf(h * h, p)).epsilon(1e-10));
        }
        CHECK(envelope_pdf(0.0, p) == 0.0);
        const ShadowedRiceParams rayleigh{0.4, 0.0, 0.7};
        for (double h : {0.2, 0.9, 1.7}) {
            CHECK(envelope_pdf(h, rayleigh) == doctest::Approx(h / 0.4 * std::exp(-h * h / 0.8)).epsilon(1e-12));
        }
    }

    TEST_CASE("moment generating function") {
        for (auto env : kEnvs) {
            const auto p = preset(env);
            CHECK(power_mgf(0.0, p) == doctest::Approx(1.0));
            const double h = 1e-6;
            const double slope = (power_mgf(h, p) - power_mgf(-h, p)) / (2.0 * h);
            CHECK(slope == doctest::Approx(p.mean_power()).epsilon(1e-6));
            // Direct oracle: E[e^{sX}] by quadrature.
            const double s = -0.7;
            const double quad = integrate([&](double r) { return std::exp(s * r) * power_pdf(r, p); }, 0.0,
                                          std::numeric_limits<double>::infinity());
            CHECK(power_mgf(s, p) == doctest::Approx(quad).epsilon(1e-8));
        }
        const ShadowedRiceParams exp_power{0.2, 1.0, 0.5};
        CHECK(power_mgf(0.3, exp_power) == doctest::Approx(1.0 / (1.0 - 0.9 * 0.3)).epsilon(1e-12));
    }

    TEST_CASE("sampler mean and KS distance against the quadrature CDF") {
        for (auto env : kEnvs) {
            const auto p = preset(env);
            Rng rng = make_stream(21, {static_cast<std::uint64_t>(env)});
            PowerSampler draw(p);
            const int n = 1000000;
            std::vector<double> xs(n);
            double sum = 0.0;
            for (auto& x : xs) {
                x = draw(rng);
                sum += x;
            }
            CHECK(sum / n == doctest::Approx(p.mean_power()).epsilon(0.01));
            std::sort(xs.begin(), xs.end());
            double ks = 0.0;
            for (int q = 1; q < 200; ++q) {
                const std::size_t i = static_cast<std::size_t>(q) * n / 200;
                const double f = power_cdf_quadrature(xs[i], p);
                ks = std::max(ks, std::abs(f - static_cast<double>(i + 1) / n));
            }
            CHECK(ks < 0.002);
        }
    }

    TEST_CASE("deterministic line-of-sight limit") {
        const ShadowedRiceParams los{1e-9, 1e6, 1.0};
        Rng rng = make_stream(5);
        for (int i = 0; i < 1000; ++i) CHECK(std::abs(sample_power(rng, los) - 1.0) < 5e-3);
    }

    TEST_CASE("validation") {
        CHECK_THROWS(ShadowedRiceParams{-1.0, 1.0, 1.0}.validate());
        CHECK_NOTHROW(preset(Environment::Average).validate());
    }
}

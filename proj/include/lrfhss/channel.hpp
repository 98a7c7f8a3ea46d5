#pragma once

#include <random>
#include <string>
#include <string_view>

#include "lrfhss/random.hpp"
#include "lrfhss/specfun.hpp"

namespace lrfhss::channel {

/// Shadowed-Rice fading triple: 2*b0 is the scattered power, m the
/// Nakagami shadowing parameter, omega the mean line-of-sight power.
struct ShadowedRiceParams {
    double b0 = 0.126;
    double m = 10.1;
    double omega = 0.835;

    void validate() const;
    [[nodiscard]] double mean_power() const { return 2.0 * b0 + omega; }
    friend bool operator==(const ShadowedRiceParams&, const ShadowedRiceParams&) = default;
};

enum class Environment { InfrequentLight, FrequentHeavy, Average };

ShadowedRiceParams preset(Environment env);
std::string_view to_string(Environment env);
/// Accepts "light", "heavy", "average" and the enum spellings.
Environment parse_environment(std::string_view text);

/// Constants of the power density A exp(-B r) 1F1(m; 1; C(1) r).
struct SeriesConstants {
    double a_const = 0.0;
    double b_const = 0.0;
    double c1 = 0.0;

    /// C(n) = C(1)^n.
    [[nodiscard]] double c(std::size_t n) const;
    /// C(1)/B, the geometric ratio of every n-series; lies in [0, 1).
    [[nodiscard]] double ratio() const { return c1 / b_const; }
};

SeriesConstants series_constants(const ShadowedRiceParams& p);

/// Density of |h|^2.
double power_pdf(double r, const ShadowedRiceParams& p);

/// Density of |h| evaluated directly from the envelope form.
double envelope_pdf(double h, const ShadowedRiceParams& p);

/// E[exp(s |h|^2)].
double power_mgf(double s, const ShadowedRiceParams& p);

/// Pr{|h|^2 <= x} by adaptive Gauss-Kronrod quadrature of power_pdf.
double power_cdf_quadrature(double x, const ShadowedRiceParams& p);

/// Draws |h|^2: a circular Gaussian scattered part of power 2*b0 plus a
/// line-of-sight phasor whose power is Gamma(m, omega/m) distributed.
class PowerSampler {
public:
    explicit PowerSampler(const ShadowedRiceParams& p);
    double operator()(Rng& rng);

private:
    ShadowedRiceParams params_;
    std::normal_distribution<double> scatter_;
    std::gamma_distribution<double> shadow_;
    std::uniform_real_distribution<double> phase_;
};

double sample_power(Rng& rng, const ShadowedRiceParams& p);

}  // namespace lrfhss::channel

#include "lrfhss/channel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lrfhss::channel {

void ShadowedRiceParams::validate() const {
    if (!(b0 > 0.0)) throw std::invalid_argument("ShadowedRiceParams: b0 must be > 0");
    if (!(m >= 0.0)) throw std::invalid_argument("ShadowedRiceParams: m must be >= 0");
    if (!(omega >= 0.0)) throw std::invalid_argument("ShadowedRiceParams: omega must be >= 0");
}

ShadowedRiceParams preset(Environment env) {
    switch (env) {
        case Environment::InfrequentLight:
            return {0.158, 19.4, 1.29};
        case Environment::FrequentHeavy:
            return {0.063, 0.739, 8.97e-4};
        case Environment::Average:
            return {0.126, 10.1, 0.835};
    }
    throw std::invalid_argument("unknown environment");
}

std::string_view to_string(Environment env) {
    switch (env) {
        case Environment::InfrequentLight:
            return "light";
        case Environment::FrequentHeavy:
            return "heavy";
        case Environment::Average:
            return "average";
    }
    return "?";
}

Environment parse_environment(std::string_view text) {
    if (text == "light" || text == "InfrequentLight") return Environment::InfrequentLight;
    if (text == "heavy" || text == "FrequentHeavy") return Environment::FrequentHeavy;
    if (text == "average" || text == "Average") return Environment::Average;
    throw std::invalid_argument("unknown environment '" + std::string(text) + "' (light|heavy|average)");
}

double SeriesConstants::c(std::size_t n) const {
    return std::pow(c1, static_cast<double>(n));
}

SeriesConstants series_constants(const ShadowedRiceParams& p) {
    p.validate();
    SeriesConstants k;
    k.b_const = 1.0 / (2.0 * p.b0);
    if (p.m == 0.0) {
        // 1F1(0; 1; x) = 1: pure Rayleigh, the hypergeometric factor drops out.
        k.a_const = k.b_const;
        k.c1 = 0.0;
        return k;
    }
    const double denom = 2.0 * p.b0 * p.m + p.omega;
    k.a_const = std::pow(2.0 * p.b0 * p.m / denom, p.m) / (2.0 * p.b0);
    k.c1 = p.omega / (2.0 * p.b0 * denom);
    return k;
}

double power_pdf(double r, const ShadowedRiceParams& p) {
    if (!(r >= 0.0)) throw std::domain_error("power_pdf: r must be >= 0");
    const auto k = series_constants(p);
    if (k.c1 == 0.0 || r == 0.0) {
        return k.a_const * std::exp(-k.b_const * r);
    }
    if (std::isinf(r)) return 0.0;
    const double log_f = specfun::log_kummer_1f1(p.m, 1.0, k.c1 * r);
    return std::exp(std::log(k.a_const) - k.b_const * r + log_f);
}

double envelope_pdf(double h, const ShadowedRiceParams& p) {
    if (!(h >= 0.0)) throw std::domain_error("envelope_pdf: h must be >= 0");
    p.validate();
    if (h == 0.0) return 0.0;
    const double h2 = h * h;
    const double rayleigh = h / p.b0 * std::exp(-h2 / (2.0 * p.b0));
    if (p.m == 0.0) return rayleigh;
    const double denom = 2.0 * p.b0 * p.m + p.omega;
    const double shadow = std::pow(2.0 * p.b0 * p.m / denom, p.m);
    const double x = p.omega * h2 / (2.0 * p.b0 * denom);
    return shadow * rayleigh * specfun::kummer_1f1(p.m, 1.0, x).value;
}

double power_mgf(double s, const ShadowedRiceParams& p) {
    p.validate();
    const double scatter = 1.0 - 2.0 * p.b0 * s;
    if (p.m == 0.0) {
        if (!(scatter > 0.0)) throw std::domain_error("power_mgf: s outside the convergence region");
        return 1.0 / scatter;
    }
    const double los = 1.0 - (2.0 * p.b0 + p.omega / p.m) * s;
    if (!(scatter > 0.0 && los > 0.0)) {
        throw std::domain_error("power_mgf: s outside the convergence region");
    }
    return std::pow(scatter, p.m - 1.0) / std::pow(los, p.m);
}

double power_cdf_quadrature(double x, const ShadowedRiceParams& p) {
    if (!(x >= 0.0)) throw std::domain_error("power_cdf_quadrature: x must be >= 0");
    using boost::math::quadrature::gauss_kronrod;
    const auto f = [&](double r) { return power_pdf(r, p); };
    // Panels of a quarter mean power keep the kernel resolved even when x is
    // far in the tail; stop once panels beyond the mean stop contributing.
    const double width = p.mean_power() / 4.0;
    double total = 0.0;
    for (double a = 0.0; a < x; a += width) {
        const double b = std::min(x, a + width);
        const double piece = gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-13);
        total += piece;
        if (a > 4.0 * p.mean_power() && piece < 1e-18 * total) break;
    }
    return std::min(total, 1.0);
}

PowerSampler::PowerSampler(const ShadowedRiceParams& p)
    : params_(p),
      scatter_(0.0, std::sqrt(p.b0)),
      shadow_(p.m > 0.0 ? p.m : 1.0, 1.0),
      phase_(0.0, 2.0 * std::numbers::pi) {
    p.validate();
}

double PowerSampler::operator()(Rng& rng) {
    double re = scatter_(rng);
    double im = scatter_(rng);
    if (params_.m > 0.0 && params_.omega > 0.0) {
        const double los = std::sqrt(params_.omega * shadow_(rng) / params_.m);
        const double phi = phase_(rng);
        re += los * std::cos(phi);
        im += los * std::sin(phi);
    }
    return re * re + im * im;
}

double sample_power(Rng& rng, const ShadowedRiceParams& p) {
    PowerSampler s(p);
    return s(rng);
}

}  // namespace lrfhss::channel

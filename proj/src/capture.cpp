#include "lrfhss/capture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lrfhss::analytic {

using specfun::CompensatedSum;
using specfun::SeriesControl;

void CaptureSeriesConfig::validate() const {
    if (!(alpha_factor > 0.0 && alpha_factor < 4.0)) {
        throw std::domain_error("CaptureSeriesConfig: alpha_factor must lie in (0, 4)");
    }
    i_series_ctl.validate();
    n_series_ctl.validate();
}

CaptureSeriesConfig CaptureSeriesConfig::paper_mode() {
    CaptureSeriesConfig cfg;
    cfg.n_series_ctl = SeriesControl::paper_mode();
    return cfg;
}

namespace {

/// Iterates the n-series sum_n (m)_n/n! rho^n f(n), rho = C1/B < 1.
template <typename F>
double sum_n_series(double m, double rho, const SeriesControl& ctl, F f) {
    ctl.validate();
    CompensatedSum acc;
    double coeff = 1.0;
    const std::size_t limit = ctl.fixed_terms ? *ctl.fixed_terms : ctl.max_terms;
    for (std::size_t n = 0; n < limit; ++n) {
        if (n > 0) coeff *= (m + static_cast<double>(n) - 1.0) / static_cast<double>(n) * rho;
        const double term = coeff * f(n);
        acc += term;
        if (ctl.fixed_terms) continue;
        if (coeff == 0.0) return acc.value();
        const double next_ratio = (m + static_cast<double>(n)) / static_cast<double>(n + 1) * rho;
        if (next_ratio < 1.0 && std::abs(term) <= ctl.rel_tolerance * std::abs(acc.value())) {
            return acc.value();
        }
    }
    if (!ctl.fixed_terms) {
        throw specfun::SeriesError("n-series: tolerance not met within max_terms");
    }
    return acc.value();
}

}  // namespace

double density_mass(const channel::ShadowedRiceParams& p, const SeriesControl& ctl) {
    const auto k = channel::series_constants(p);
    return k.a_const / k.b_const * sum_n_series(p.m, k.ratio(), ctl, [](std::size_t) { return 1.0; });
}

double p_disc(const channel::ShadowedRiceParams& p, const LinearLink& link, double g0, const SeriesControl& ctl) {
    if (!(g0 > 0.0 && g0 <= 1.0)) throw std::domain_error("p_disc: g0 must lie in (0, 1]");
    const auto k = channel::series_constants(p);
    const double y = k.b_const * link.normalized_snr_threshold() / g0;
    if (y == 0.0) return 0.0;
    const double s = sum_n_series(p.m, k.ratio(), ctl, [y](std::size_t n) {
        return specfun::regularized_lower_gamma(static_cast<double>(n) + 1.0, y);
    });
    return std::clamp(k.a_const / k.b_const * s, 0.0, 1.0);
}

double CaptureCoefficients::d_const() const {
    return std::exp(log_d_const);
}

namespace {

/// Per-interferer ratios of a factorized generating function
///   exp(log_d) * prod_i (1 - zeta_i z)^(m-1) (1 - delta_i z)^(-m),
/// whose power-series coefficients follow from the power sums p_j.
struct Expansion {
    double alpha = 0.0;
    double log_d = 0.0;
    std::vector<double> zeta;
    std::vector<double> delta;
    double m = 0.0;
};

void check_gains(std::span<const double> gains) {
    if (gains.empty()) throw std::invalid_argument("capture expansion: no interferers");
    for (double g : gains) {
        if (!(g > 0.0)) throw std::domain_error("capture expansion: interferer gains must be > 0");
    }
}

/// The interference MGF expanded in eta = 1 - alpha/s.
Expansion alpha_expansion(std::span<const double> gains, const channel::ShadowedRiceParams& p,
                          double alpha_factor) {
    check_gains(gains);
    Expansion e;
    e.m = p.m;
    double min_b = std::numeric_limits<double>::infinity();
    for (double g : gains) min_b = std::min(min_b, p.b0 * g);
    e.alpha = alpha_factor * min_b;
    e.log_d = static_cast<double>(gains.size()) * std::log(e.alpha);
    for (double g : gains) {
        const double two_b = 2.0 * p.b0 * g;
        e.zeta.push_back(1.0 - e.alpha / two_b);
        e.log_d += (p.m - 1.0) * std::log(two_b);
        if (p.m > 0.0) {
            const double los = two_b + p.omega * g / p.m;
            e.delta.push_back(1.0 - e.alpha / los);
            e.log_d -= p.m * std::log(los);
        }
    }
    return e;
}

/// E[z^N] for N ~ Poisson(beta Y), i.e. the MGF evaluated at beta (1 - z).
/// Every ratio lies in (0, 1) and the coefficients are probabilities.
Expansion poisson_expansion(std::span<const double> gains, const channel::ShadowedRiceParams& p, double beta) {
    check_gains(gains);
    Expansion e;
    e.m = p.m;
    for (double g : gains) {
        const double two_b = 2.0 * p.b0 * g * beta;
        e.zeta.push_back(two_b / (1.0 + two_b));
        e.log_d += (p.m - 1.0) * std::log1p(two_b);
        if (p.m > 0.0) {
            const double los = two_b + p.omega * g * beta / p.m;
            e.delta.push_back(los / (1.0 + los));
            e.log_d -= p.m * std::log1p(los);
        }
    }
    return e;
}

/// Generates the coefficients c_i one at a time. Values are kept as
/// v_i = c_i * exp(-log_scale) so that long recursions neither overflow nor
/// underflow; the caller combines log_scale with log D.
class CoefficientStream {
public:
    explicit CoefficientStream(const Expansion& e)
        : e_(e), zeta_pow_(e.zeta.size(), 1.0), delta_pow_(e.delta.size(), 1.0) {
        v_.push_back(1.0);
    }

    /// Computes the next coefficient; returns its index.
    std::size_t advance() {
        const std::size_t i = v_.size();
        double pj = 0.0;
        for (std::size_t q = 0; q < zeta_pow_.size(); ++q) {
            zeta_pow_[q] *= e_.zeta[q];
            pj -= (e_.m - 1.0) * zeta_pow_[q];
        }
        for (std::size_t q = 0; q < delta_pow_.size(); ++q) {
            delta_pow_[q] *= e_.delta[q];
            pj += e_.m * delta_pow_[q];
        }
        p_.push_back(pj);  // p_[j-1] holds p_j
        double s = 0.0;
        for (std::size_t l = 0; l < i; ++l) s += p_[i - l - 1] * v_[l];
        double v = s / static_cast<double>(i);
        if (std::abs(v) > kRescale) {
            for (double& x : v_) x /= kRescale;
            v /= kRescale;
            log_scale_ += std::log(kRescale);
        }
        v_.push_back(v);
        return i;
    }

    [[nodiscard]] double scaled(std::size_t i) const { return v_[i]; }
    [[nodiscard]] double log_scale() const { return log_scale_; }

private:
    static constexpr double kRescale = 1e200;
    const Expansion& e_;
    std::vector<double> zeta_pow_;
    std::vector<double> delta_pow_;
    std::vector<double> p_;
    std::vector<double> v_;
    double log_scale_ = 0.0;
};

}  // namespace

CaptureCoefficients capture_coefficients(std::span<const double> interferer_gains,
                                         const channel::ShadowedRiceParams& p, const CaptureSeriesConfig& cfg,
                                         std::size_t terms) {
    cfg.validate();
    p.validate();
    const Expansion e = alpha_expansion(interferer_gains, p, cfg.alpha_factor);
    CoefficientStream stream(e);
    CaptureCoefficients out;
    out.alpha = e.alpha;
    out.log_d_const = e.log_d;
    if (terms == 0) return out;
    while (stream.advance() + 1 < terms) {
    }
    const double scale = std::exp(stream.log_scale());
    for (std::size_t i = 0; i < terms; ++i) out.c_seq.push_back(stream.scaled(i) * scale);
    return out;
}

CaptureResult p_cap_detailed(double g0, std::span<const double> interferer_gains,
                             const channel::ShadowedRiceParams& p, const LinearLink& link,
                             const CaptureSeriesConfig& cfg) {
    cfg.validate();
    if (!(g0 > 0.0)) throw std::domain_error("p_cap: g0 must be > 0");
    if (interferer_gains.empty()) return {0.0, 0, true};
    if (link.sir_threshold == 0.0) return {0.0, 0, true};
    if (!(link.sir_threshold > 0.0)) throw std::domain_error("p_cap: SIR threshold must be >= 0");

    const auto sc = channel::series_constants(p);
    const Expansion e = alpha_expansion(interferer_gains, p, cfg.alpha_factor);
    const std::size_t k = interferer_gains.size();

    // Q_j = Pr{ Gamma(j, 1) > alpha * delta^-1 * g0 |h0|^2 }, written as the
    // mass of integral (I) minus prefix sums of A * T_u.
    const double mass = density_mass(p, cfg.n_series_ctl);
    const double r = g0 / (e.alpha * link.sir_threshold);
    const double b_prime = sc.b_const + r;
    const double x = sc.c1 / b_prime;
    if (!(std::abs(x) < 1.0)) throw std::domain_error("p_cap: |C1/B'| must be < 1");
    // T_u = r^u B'^-(u+1) 2F1(m, u+1; 1; x) via the contiguous relation in
    // the second parameter; 2F1 is the dominant solution, so the forward
    // recurrence is stable.
    const double rho = r / b_prime;
    // With a fixed n-series length the T_u carry the same truncation as the
    // mass, so each Q_j stays a truncated probability rather than a
    // difference of two differently truncated sums.
    const bool truncated = cfg.n_series_ctl.fixed_terms.has_value();
    std::vector<double> t_vals;
    if (!truncated) {
        t_vals.push_back(std::pow(1.0 - x, -p.m) / b_prime);
        const double f2 = p.m > 0.0 ? std::exp(specfun::log_gauss_2f1(p.m, 2.0, 1.0, x)) : 1.0;
        t_vals.push_back(rho / b_prime * f2);
    }
    CompensatedSum t_prefix;
    std::size_t next_u = 0;
    auto q_at = [&](std::size_t j) {
        while (next_u < j) {
            while (truncated && t_vals.size() <= next_u) {
                const double u = static_cast<double>(t_vals.size());
                double coeff = 1.0;
                double sum = 0.0;
                for (std::size_t n = 0; n < *cfg.n_series_ctl.fixed_terms; ++n) {
                    const double nn = static_cast<double>(n);
                    if (n > 0) coeff *= (p.m + nn - 1.0) * (u + nn) / (nn * nn) * x;
                    sum += coeff;
                }
                t_vals.push_back(std::pow(rho, u) / b_prime * sum);
            }
            while (t_vals.size() <= next_u) {
                const double u = static_cast<double>(t_vals.size() - 1);
                const double t_next = rho * ((2.0 * u + 1.0 + (p.m - u - 1.0) * x) * t_vals.back() -
                                             u * rho * t_vals[t_vals.size() - 2]) /
                                      ((u + 1.0) * (1.0 - x));
                t_vals.push_back(std::max(t_next, 0.0));
            }
            t_prefix += sc.a_const * t_vals[next_u];
            ++next_u;
        }
        return mass - t_prefix.value();
    };

    const SeriesControl& ctl = cfg.i_series_ctl;
    const std::size_t limit = ctl.fixed_terms ? *ctl.fixed_terms : ctl.max_terms;
    CoefficientStream stream(e);
    CompensatedSum acc;
    CompensatedSum weight_sum;
    for (std::size_t i = 0; i < limit; ++i) {
        if (i > 0) stream.advance();
        const double w = std::exp(e.log_d + stream.log_scale()) * stream.scaled(i);
        const double q = q_at(k + i);
        const double term = w * q;
        acc += term;
        weight_sum += w;
        if (ctl.fixed_terms || i == 0) continue;
        // The weights sum to one in the limit, so 1 - sum(w) estimates the
        // weight not yet seen; each unseen term is at most the current Q.
        const double tail = std::abs(1.0 - weight_sum.value()) * std::abs(q);
        const double err = std::abs(term) + tail;
        if (err <= ctl.rel_tolerance * std::abs(acc.value()) || err <= 1e-15) {
            return {std::clamp(1.0 - acc.value(), 0.0, 1.0), i + 1, true};
        }
    }
    return {std::clamp(1.0 - acc.value(), 0.0, 1.0), limit, ctl.fixed_terms.has_value()};
}

CaptureResult p_cap_mixture(double g0, std::span<const double> interferer_gains,
                            const channel::ShadowedRiceParams& p, const LinearLink& link, const SeriesControl& n_ctl) {
    n_ctl.validate();
    if (!(g0 > 0.0)) throw std::domain_error("p_cap_mixture: g0 must be > 0");
    if (interferer_gains.empty()) return {0.0, 0, true};
    if (link.sir_threshold == 0.0) return {0.0, 0, true};
    if (!(link.sir_threshold > 0.0)) throw std::domain_error("p_cap_mixture: SIR threshold must be >= 0");

    const auto sc = channel::series_constants(p);
    const double rho = sc.ratio();
    std::vector<double> a{sc.a_const / sc.b_const};
    const std::size_t limit = n_ctl.fixed_terms ? *n_ctl.fixed_terms : n_ctl.max_terms;
    double total = a.front();
    while (a.size() < limit) {
        const double n = static_cast<double>(a.size());
        const double next = a.back() * (p.m + n - 1.0) / n * rho;
        if (!n_ctl.fixed_terms && (next == 0.0 || ((p.m + n) / (n + 1.0) * rho < 1.0 && next <= 1e-18 * total))) {
            break;
        }
        a.push_back(next);
        total += next;
    }
    std::vector<double> tail(a.size() + 1, 0.0);
    for (std::size_t n = a.size(); n-- > 0;) tail[n] = tail[n + 1] + a[n];

    const Expansion e = poisson_expansion(interferer_gains, p, sc.b_const * link.sir_threshold / g0);
    CoefficientStream stream(e);
    CompensatedSum survive;
    for (std::size_t u = 0; u < a.size(); ++u) {
        if (u > 0) stream.advance();
        survive += std::exp(e.log_d + stream.log_scale()) * stream.scaled(u) * tail[u];
    }
    return {std::clamp(1.0 - survive.value(), 0.0, 1.0), a.size(), true};
}

double p_cap(double g0, std::span<const double> interferer_gains, const channel::ShadowedRiceParams& p,
             const LinearLink& link, const CaptureSeriesConfig& cfg) {
    const auto r = p_cap_detailed(g0, interferer_gains, p, link, cfg);
    if (!r.converged) {
        throw specfun::SeriesError("p_cap: i-series did not converge within " + std::to_string(r.terms) +
                                   " terms");
    }
    return r.value;
}

}  // namespace lrfhss::analytic

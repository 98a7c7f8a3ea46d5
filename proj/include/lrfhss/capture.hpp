#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lrfhss/channel.hpp"
#include "lrfhss/link.hpp"
#include "lrfhss/specfun.hpp"

namespace lrfhss::analytic {

/// Truncation of the capture-failure series.
///
/// alpha_factor scales min_i(b0 g_i) into the free parameter of the series
/// expansion of the interference MGF; it must stay inside (0, 4).
struct CaptureSeriesConfig {
    double alpha_factor = 3.9999;
    specfun::SeriesControl i_series_ctl{1e-8, 500, std::nullopt};
    specfun::SeriesControl n_series_ctl = specfun::SeriesControl::defaults();

    void validate() const;
    static CaptureSeriesConfig paper_mode();
    friend bool operator==(const CaptureSeriesConfig&, const CaptureSeriesConfig&) = default;
};

/// Probability that one fragment from a device with path gain g0 is received
/// below the SNR threshold.
double p_disc(const channel::ShadowedRiceParams& p, const LinearLink& link, double g0,
              const specfun::SeriesControl& ctl = specfun::SeriesControl::defaults());

/// A * sum_n (m)_n/n! (C1/B)^n / B: the total probability mass of the power
/// density seen through the truncated n-series. Equals 1 in the limit.
double density_mass(const channel::ShadowedRiceParams& p, const specfun::SeriesControl& ctl);

struct CaptureCoefficients {
    double alpha = 0.0;
    double log_d_const = 0.0;
    std::vector<double> c_seq;

    [[nodiscard]] double d_const() const;
};

/// D and the first `terms` coefficients of the expansion of the k-fold
/// interference MGF in powers of eta = 1 - alpha/s'.
CaptureCoefficients capture_coefficients(std::span<const double> interferer_gains,
                                         const channel::ShadowedRiceParams& p,
                                         const CaptureSeriesConfig& cfg, std::size_t terms);

struct CaptureResult {
    double value = 0.0;
    std::size_t terms = 0;
    bool converged = true;
};

/// Pr{ g0 |h0|^2 <= delta * sum_i g_i |h_i|^2 } for k = interferer_gains.size().
/// Never throws on slow convergence; `converged` reports whether the stop
/// rule was met within i_series_ctl.max_terms.
CaptureResult p_cap_detailed(double g0, std::span<const double> interferer_gains,
                             const channel::ShadowedRiceParams& p, const LinearLink& link,
                             const CaptureSeriesConfig& cfg = {});

/// The same probability written as sum_u Pr{N = u} * abar(u), where
/// N ~ Poisson(B delta Y / g0) and abar(u) is the tail mass of the n-series
/// weights (m)_n/n! (C1/B)^n A/B. All terms are nonnegative and the sum stops
/// with the n-series, so it stays cheap when interferer gains span decades.
CaptureResult p_cap_mixture(double g0, std::span<const double> interferer_gains,
                            const channel::ShadowedRiceParams& p, const LinearLink& link,
                            const specfun::SeriesControl& n_ctl = specfun::SeriesControl::defaults());

/// As p_cap_detailed, throwing SeriesError when the series does not converge.
double p_cap(double g0, std::span<const double> interferer_gains, const channel::ShadowedRiceParams& p,
             const LinearLink& link, const CaptureSeriesConfig& cfg = {});

}  // namespace lrfhss::analytic

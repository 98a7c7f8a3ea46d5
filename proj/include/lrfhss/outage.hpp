#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "lrfhss/capture.hpp"
#include "lrfhss/link.hpp"
#include "lrfhss/scenario.hpp"

namespace lrfhss::analytic {

/// Expected interference seen by a tagged packet.
struct InterferenceCounts {
    long long i_total = 0;          ///< devices starting within +-ToA of the tagged packet
    double hdr_per_interferer = 0;  ///< i_hdr(I') / I'
    double pl_per_interferer = 0;   ///< i_pl(I') / I'

    /// Interfering fragments hitting one header replica when I' devices share the group.
    [[nodiscard]] double i_hdr(long long i_prime) const;
    /// Same for one payload fragment.
    [[nodiscard]] double i_pl(long long i_prime) const;
};

InterferenceCounts interference_counts(long long n_users, int n_tx_per_slot, double slot_s,
                                       const DataRateProfile& dr);

/// k -> P_cap(k), k >= 1.
using CaptureFn = std::function<double(std::size_t)>;

/// sum_{k=1}^{K} C(K,k) (1/S)^k ((S-1)/S)^(K-k) P_cap(k). Terms are dropped
/// once the untouched binomial mass falls below 1e-15.
double collision_loss(long long n_fragments, int carriers, const CaptureFn& capture_fn);

double p_hdr(long long i_prime, const DataRateProfile& dr, double p_disc_val, const CaptureFn& capture_fn,
             const InterferenceCounts& counts);
double p_spf(long long i_prime, const DataRateProfile& dr, double p_disc_val, const CaptureFn& capture_fn,
             const InterferenceCounts& counts);
/// Probability that at least omega of the N_PL payload fragments are lost.
double p_pl(const DataRateProfile& dr, double p_spf_val);
double p_ni(const DataRateProfile& dr, double p_disc_val, const InterferenceCounts& counts);

/// Binomial(I, 1/G) probabilities for I' = first, first+1, ...; the full
/// range when I <= 1e4, otherwise only I' within 8 standard deviations of I/G.
struct BinomialWindow {
    long long first = 0;
    std::vector<double> weights;
};
BinomialWindow group_sharing_weights(long long i_total, int groups);

/// O_L for one fixed realization of the desired device's disconnection
/// probability and capture curve.
double outage_given(const DataRateProfile& dr, double p_disc_val, const CaptureFn& capture_fn,
                    const InterferenceCounts& counts);

/// How the averaging engine evaluates capture failure. Auto uses the series
/// expansion and switches to the Poisson-mixture form when the series misses
/// its term budget.
enum class CaptureMethod { Series, Mixture, Auto };

struct LocationAveraging {
    std::size_t realizations = 1000;
    /// Independent interferer-gain draws averaged inside each realization.
    std::size_t interferer_draws = 8;
    bool capture_enabled = true;
    CaptureMethod capture_method = CaptureMethod::Auto;
    /// Evaluate at this desired-device path gain instead of sampling it.
    std::optional<double> fixed_g0;
    CaptureSeriesConfig capture;
    specfun::SeriesControl n_series_ctl = specfun::SeriesControl::defaults();
    std::uint64_t seed = 1;
    /// Called before each realization; may throw to abandon the run.
    std::function<void()> checkpoint;

    static LocationAveraging paper_mode();
};

struct AnalyticPoint {
    long long n_users = 0;
    long long i_total = 0;
    double outage = 0.0;
    double std_error = 0.0;
    std::size_t realizations = 0;
    std::size_t capture_evaluations = 0;
    /// Series evaluations that missed the term budget (answered by the
    /// mixture form under Auto, truncated under Series).
    std::size_t nonconverged_captures = 0;
};

/// Location-averaged O_L for each population in `n_users`, with common
/// random numbers: realization r uses the same device and interferer gains
/// at every sweep point.
std::vector<AnalyticPoint> outage_lrfhss_sweep(const Scenario& scenario, std::span<const long long> n_users,
                                               const LocationAveraging& avg);

AnalyticPoint outage_lrfhss(const Scenario& scenario, const LocationAveraging& avg);

/// 1 - exp(-rho pi d^2).
double p_neighbor(double density_per_km2, double d_max_km);

/// The configured LoRa figure is the D2D exchange success probability.
double p_d2d(double p_lora_success, double p_ne);

/// P_D2D O (3O^2 - 2O^3) + (1 - P_D2D) O^2: the tagged packet is lost when
/// its own copy and at least two of the other three cluster packets fail, or,
/// without a partner, when both retransmissions fail.
double outage_d2d(double o_l, double p_d2d_val);

/// Long form with distinct outages for the tagged original,
/// the partner's original and the two parities. Its bracket lists only three
/// of the loss patterns, so it does not reduce to outage_d2d when all four
/// outages are equal. Kept for comparison only.
double outage_d2d_literal(double o_own, double o_partner, double o_parity_own, double o_parity_partner,
                          double p_d2d_val);

}  // namespace lrfhss::analytic

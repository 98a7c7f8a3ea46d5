#include "lrfhss/outage.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lrfhss/geometry.hpp"
#include "lrfhss/parallel.hpp"
#include "lrfhss/random.hpp"

namespace lrfhss::analytic {

namespace {

/// ceil() that ignores rounding noise just above an integer.
long long robust_ceil(double x) {
    return static_cast<long long>(std::ceil(x * (1.0 - 1e-12)));
}

double binomial_upper_tail(int n, int from, double p) {
    double tail = 0.0;
    for (int j = from; j <= n; ++j) {
        tail += std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0)) *
                std::pow(p, j) * std::pow(1.0 - p, n - j);
    }
    return std::clamp(tail, 0.0, 1.0);
}

double replica_loss(long long n_fragments, const DataRateProfile& dr, double p_disc_val,
                    const CaptureFn& capture_fn) {
    return p_disc_val + (1.0 - p_disc_val) * collision_loss(n_fragments, dr.carriers_per_group, capture_fn);
}

}  // namespace

double InterferenceCounts::i_hdr(long long i_prime) const {
    if (i_prime < 1) throw std::invalid_argument("i_hdr: I' must be >= 1");
    return hdr_per_interferer * static_cast<double>(i_prime);
}

double InterferenceCounts::i_pl(long long i_prime) const {
    if (i_prime < 1) throw std::invalid_argument("i_pl: I' must be >= 1");
    return pl_per_interferer * static_cast<double>(i_prime);
}

InterferenceCounts interference_counts(long long n_users, int n_tx_per_slot, double slot_s,
                                       const DataRateProfile& dr) {
    if (n_users < 1) throw std::invalid_argument("interference_counts: n_users must be >= 1");
    if (n_tx_per_slot < 1) throw std::invalid_argument("interference_counts: n_tx_per_slot must be >= 1");
    if (!(slot_s > 0.0)) throw std::invalid_argument("interference_counts: slot_s must be > 0");
    const double toa = dr.toa_s();
    const double t_ave = slot_s / (static_cast<double>(n_tx_per_slot) * static_cast<double>(n_users));
    InterferenceCounts c;
    c.i_total = std::max(0LL, robust_ceil(2.0 * toa / t_ave) - 1);
    // t_HDR(I') = 2 ToA / (I' N_HDR), t_PL(I') = 2 ToA / (I' N_PL)
    c.hdr_per_interferer = (2.0 * dr.t_hdr_s * dr.n_hdr + (dr.t_hdr_s + dr.t_pl_s) * dr.n_pl) / (2.0 * toa);
    c.pl_per_interferer = (2.0 * dr.t_pl_s * dr.n_pl + (dr.t_hdr_s + dr.t_pl_s) * dr.n_hdr) / (2.0 * toa);
    return c;
}

double collision_loss(long long n_fragments, int carriers, const CaptureFn& capture_fn) {
    if (n_fragments <= 0) return 0.0;
    if (carriers < 1) throw std::invalid_argument("collision_loss: carriers must be >= 1");
    if (carriers == 1) return std::clamp(capture_fn(static_cast<std::size_t>(n_fragments)), 0.0, 1.0);
    const double K = static_cast<double>(n_fragments);
    const double log_hit = -std::log(static_cast<double>(carriers - 1));
    double log_pmf = K * std::log1p(-1.0 / carriers);
    double seen = std::exp(log_pmf);
    double loss = 0.0;
    for (long long k = 1; k <= n_fragments; ++k) {
        log_pmf += std::log((K - static_cast<double>(k) + 1.0) / static_cast<double>(k)) + log_hit;
        const double pmf = std::exp(log_pmf);
        if (pmf > 0.0) loss += pmf * capture_fn(static_cast<std::size_t>(k));
        seen += pmf;
        if (1.0 - seen < 1e-15 && static_cast<double>(k) > K / carriers) break;
    }
    return std::clamp(loss, 0.0, 1.0);
}

double p_hdr(long long i_prime, const DataRateProfile& dr, double p_disc_val, const CaptureFn& capture_fn,
             const InterferenceCounts& counts) {
    const long long k = robust_ceil(counts.i_hdr(i_prime));
    return std::pow(replica_loss(k, dr, p_disc_val, capture_fn), dr.n_hdr);
}

double p_spf(long long i_prime, const DataRateProfile& dr, double p_disc_val, const CaptureFn& capture_fn,
             const InterferenceCounts& counts) {
    return replica_loss(robust_ceil(counts.i_pl(i_prime)), dr, p_disc_val, capture_fn);
}

double p_pl(const DataRateProfile& dr, double p_spf_val) {
    return binomial_upper_tail(dr.n_pl, dr.omega(), p_spf_val);
}

double p_ni(const DataRateProfile& dr, double p_disc_val, const InterferenceCounts& counts) {
    const double alone =
        std::pow(1.0 - 1.0 / dr.groups, static_cast<double>(counts.i_total));
    const double hdr = std::pow(p_disc_val, dr.n_hdr);
    return alone * (hdr + (1.0 - hdr) * binomial_upper_tail(dr.n_pl, dr.omega(), p_disc_val));
}

BinomialWindow group_sharing_weights(long long i_total, int groups) {
    if (i_total < 0) throw std::invalid_argument("group_sharing_weights: I must be >= 0");
    if (groups < 1) throw std::invalid_argument("group_sharing_weights: groups must be >= 1");
    BinomialWindow w;
    if (groups == 1) {
        w.first = i_total;
        w.weights = {1.0};
        return w;
    }
    const double n = static_cast<double>(i_total);
    const double p = 1.0 / groups;
    long long last = i_total;
    if (i_total > 10000) {
        const double mean = n * p;
        const double sd = std::sqrt(n * p * (1.0 - p));
        w.first = std::max(0LL, static_cast<long long>(std::floor(mean - 8.0 * sd)));
        last = std::min(i_total, static_cast<long long>(std::ceil(mean + 8.0 * sd)));
    }
    const double f = static_cast<double>(w.first);
    double log_pmf = std::lgamma(n + 1.0) - std::lgamma(f + 1.0) - std::lgamma(n - f + 1.0) + f * std::log(p) +
                     (n - f) * std::log1p(-p);
    const double log_ratio = std::log(p) - std::log1p(-p);
    w.weights.reserve(static_cast<std::size_t>(last - w.first + 1));
    for (long long i = w.first; i <= last; ++i) {
        if (i > w.first) {
            const double id = static_cast<double>(i);
            log_pmf += std::log((n - id + 1.0) / id) + log_ratio;
        }
        w.weights.push_back(std::exp(log_pmf));
    }
    // lgamma of a large I carries an absolute error near 1e-11 into every
    // weight; the mass outside the window is far smaller, so rescale.
    double total = 0.0;
    for (double x : w.weights) total += x;
    for (double& x : w.weights) x /= total;
    return w;
}

double outage_given(const DataRateProfile& dr, double p_disc_val, const CaptureFn& capture_fn,
                    const InterferenceCounts& counts) {
    const auto window = group_sharing_weights(counts.i_total, dr.groups);
    double total = p_ni(dr, p_disc_val, counts);
    for (std::size_t idx = 0; idx < window.weights.size(); ++idx) {
        const long long i_prime = window.first + static_cast<long long>(idx);
        const double w = window.weights[idx];
        if (i_prime == 0 || w < 1e-17) continue;
        const double ph = p_hdr(i_prime, dr, p_disc_val, capture_fn, counts);
        const double ppl = p_pl(dr, p_spf(i_prime, dr, p_disc_val, capture_fn, counts));
        total += w * (ph + (1.0 - ph) * ppl);
    }
    return std::clamp(total, 0.0, 1.0);
}

LocationAveraging LocationAveraging::paper_mode() {
    LocationAveraging avg;
    avg.capture = CaptureSeriesConfig::paper_mode();
    avg.n_series_ctl = specfun::SeriesControl::paper_mode();
    return avg;
}

namespace {

/// Capture-failure curve k -> P_cap(k | g0) for one realization, averaged over
/// independent interferer-gain sequences. Sequence j is extended lazily from
/// its own stream, and P_cap(k) uses its first k gains, so the curve does not
/// depend on how far it has been evaluated.
class CaptureCurve {
public:
    CaptureCurve(const Scenario& sc, const LinearLink& link, const LocationAveraging& avg, double g0,
                 std::uint64_t realization)
        : sc_(sc), link_(link), avg_(avg), g0_(g0) {
        for (std::size_t j = 0; j < avg.interferer_draws; ++j) {
            streams_.push_back(make_stream(avg.seed, {realization, j + 1}));
        }
        gains_.resize(avg.interferer_draws);
        values_.push_back(0.0);
    }

    double operator()(std::size_t k) {
        if (!avg_.capture_enabled) return k == 0 ? 0.0 : 1.0;
        while (values_.size() <= k) {
            const std::size_t next = values_.size();
            // Past saturation more interference cannot lower the failure rate.
            if (values_.back() > 1.0 - 1e-12) {
                values_.push_back(1.0);
                continue;
            }
            double sum = 0.0;
            for (std::size_t j = 0; j < gains_.size(); ++j) {
                while (gains_[j].size() < next) {
                    gains_[j].push_back(geometry::sample_visible_path_gain(streams_[j], sc_.geometry, sc_.slot_s,
                                                                           sc_.link.frequency_mhz));
                }
                const auto set = std::span<const double>(gains_[j]).first(next);
                ++evaluations_;
                if (avg_.capture_method == CaptureMethod::Mixture) {
                    sum += p_cap_mixture(g0_, set, sc_.fading, link_, avg_.capture.n_series_ctl).value;
                    continue;
                }
                auto r = p_cap_detailed(g0_, set, sc_.fading, link_, avg_.capture);
                if (!r.converged) {
                    ++nonconverged_;
                    if (avg_.capture_method == CaptureMethod::Auto) {
                        r = p_cap_mixture(g0_, set, sc_.fading, link_, avg_.capture.n_series_ctl);
                    }
                }
                sum += r.value;
            }
            values_.push_back(std::max(values_.back(), sum / static_cast<double>(gains_.size())));
        }
        return values_[k];
    }

    [[nodiscard]] std::size_t nonconverged() const { return nonconverged_; }
    [[nodiscard]] std::size_t evaluations() const { return evaluations_; }

private:
    const Scenario& sc_;
    const LinearLink& link_;
    const LocationAveraging& avg_;
    double g0_;
    std::vector<Rng> streams_;
    std::vector<std::vector<double>> gains_;
    std::vector<double> values_;
    std::size_t nonconverged_ = 0;
    std::size_t evaluations_ = 0;
};

}  // namespace

std::vector<AnalyticPoint> outage_lrfhss_sweep(const Scenario& scenario, std::span<const long long> n_users,
                                               const LocationAveraging& avg) {
    scenario.validate();
    avg.capture.validate();
    if (avg.realizations < 1) throw std::invalid_argument("realizations: must be >= 1");
    if (avg.interferer_draws < 1) throw std::invalid_argument("interferer_draws: must be >= 1");
    if (avg.fixed_g0 && !(*avg.fixed_g0 > 0.0 && *avg.fixed_g0 <= 1.0)) {
        throw std::invalid_argument("fixed_g0: must lie in (0, 1]");
    }
    const LinearLink link = scenario.linear_link();
    std::vector<InterferenceCounts> counts;
    for (long long n : n_users) counts.push_back(interference_counts(n, scenario.n_tx_per_slot, scenario.slot_s, scenario.dr));

    const std::size_t R = avg.realizations;
    const std::size_t P = counts.size();
    std::vector<double> outage(R * P);
    std::vector<std::size_t> nonconverged(R);
    std::vector<std::size_t> evaluations(R);
    parallel_for(R, [&](std::size_t r) {
        if (avg.checkpoint) avg.checkpoint();
        Rng rng = make_stream(avg.seed, {r, 0});
        const double g0 = avg.fixed_g0 ? *avg.fixed_g0
                                       : geometry::sample_visible_path_gain(rng, scenario.geometry, scenario.slot_s,
                                                                            scenario.link.frequency_mhz);
        const double pd = p_disc(scenario.fading, link, g0, avg.n_series_ctl);
        CaptureCurve curve(scenario, link, avg, g0, r);
        const CaptureFn fn = [&curve](std::size_t k) { return curve(k); };
        for (std::size_t i = 0; i < P; ++i) outage[r * P + i] = outage_given(scenario.dr, pd, fn, counts[i]);
        nonconverged[r] = curve.nonconverged();
        evaluations[r] = curve.evaluations();
    });

    std::vector<AnalyticPoint> out(P);
    std::size_t bad = 0;
    std::size_t evals = 0;
    for (std::size_t r = 0; r < R; ++r) {
        bad += nonconverged[r];
        evals += evaluations[r];
    }
    for (std::size_t i = 0; i < P; ++i) {
        specfun::CompensatedSum s;
        for (std::size_t r = 0; r < R; ++r) s += outage[r * P + i];
        const double mean = s.value() / static_cast<double>(R);
        double ss = 0.0;
        for (std::size_t r = 0; r < R; ++r) ss += (outage[r * P + i] - mean) * (outage[r * P + i] - mean);
        auto& pt = out[i];
        pt.n_users = n_users[i];
        pt.i_total = counts[i].i_total;
        pt.outage = mean;
        pt.std_error = R > 1 ? std::sqrt(ss / static_cast<double>(R - 1) / static_cast<double>(R)) : 0.0;
        pt.realizations = R;
        pt.nonconverged_captures = bad;
        pt.capture_evaluations = evals;
    }
    return out;
}

AnalyticPoint outage_lrfhss(const Scenario& scenario, const LocationAveraging& avg) {
    const long long n = scenario.n_users;
    return outage_lrfhss_sweep(scenario, std::span(&n, 1), avg).front();
}

double p_neighbor(double density_per_km2, double d_max_km) {
    if (!(density_per_km2 >= 0.0)) throw std::domain_error("p_neighbor: density must be >= 0");
    if (!(d_max_km >= 0.0)) throw std::domain_error("p_neighbor: d_max must be >= 0");
    return -std::expm1(-density_per_km2 * std::numbers::pi * d_max_km * d_max_km);
}

double p_d2d(double p_lora_success, double p_ne) {
    if (!(p_lora_success >= 0.0 && p_lora_success <= 1.0 && p_ne >= 0.0 && p_ne <= 1.0)) {
        throw std::domain_error("p_d2d: probabilities must lie in [0, 1]");
    }
    return p_lora_success * p_ne;
}

double outage_d2d(double o_l, double p_d2d_val) {
    if (!(o_l >= 0.0 && o_l <= 1.0 && p_d2d_val >= 0.0 && p_d2d_val <= 1.0)) {
        throw std::domain_error("outage_d2d: probabilities must lie in [0, 1]");
    }
    const double o2 = o_l * o_l;
    return std::clamp(p_d2d_val * o_l * (3.0 * o2 - 2.0 * o2 * o_l) + (1.0 - p_d2d_val) * o2, 0.0, 1.0);
}

double outage_d2d_literal(double o_own, double o_partner, double o_parity_own, double o_parity_partner,
                          double p_d2d_val) {
    const double bracket = o_partner * (1.0 - o_parity_own) * (1.0 - o_parity_partner) +
                           o_partner * o_parity_own * (1.0 - o_parity_partner) +
                           o_partner * o_parity_own * o_parity_partner;
    return p_d2d_val * o_own * bracket + (1.0 - p_d2d_val) * o_own * o_own;
}

}  // namespace lrfhss::analytic

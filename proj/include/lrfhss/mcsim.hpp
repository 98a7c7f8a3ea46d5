#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "lrfhss/geometry.hpp"
#include "lrfhss/link.hpp"
#include "lrfhss/random.hpp"
#include "lrfhss/scenario.hpp"

namespace lrfhss::mcsim {

enum class FragmentKind { Header, Payload };

struct FragmentEvent {
    std::uint32_t owner = 0;
    std::uint32_t packet = 0;
    FragmentKind kind = FragmentKind::Header;
    double start_s = 0.0;
    double duration_s = 0.0;
    int group = 0;
    int carrier = 0;
    double rx_power_mw = 0.0;
    double snr_linear = 0.0;

    [[nodiscard]] double end_s() const { return start_s + duration_s; }
};

struct LossBreakdown {
    long long noise = 0;
    long long header_loss = 0;
    long long payload_loss = 0;
    long long d2d_unavailable = 0;

    [[nodiscard]] long long total() const { return noise + header_loss + payload_loss + d2d_unavailable; }
    LossBreakdown& operator+=(const LossBreakdown& o);
    friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

struct OutageReport {
    double outage_estimate = 0.0;
    double std_error = 0.0;
    long long trials = 0;  ///< tracked packets (Bernoulli trials)
    long long losses = 0;
    LossBreakdown loss_breakdown;

    friend bool operator==(const OutageReport&, const OutageReport&) = default;
};

/// One start time per device, uniform in [0, T).
std::vector<double> generate_traffic(Rng& rng, const Scenario& scenario);

struct HopPattern {
    int group = 0;
    std::vector<int> carriers;  ///< headers first, then payload fragments
};

HopPattern generate_hops(Rng& rng, const analytic::DataRateProfile& dr);

/// Survives iff SNR > psi and, when anything overlaps on the same carrier,
/// rx power / total cochannel power > delta.
bool resolve_fragment(const FragmentEvent& frag, std::span<const FragmentEvent> cochannel,
                      const analytic::LinearLink& link);

/// outcomes[i] is true when fragment i survived; headers come first.
bool decode_packet(std::span<const bool> outcomes, const analytic::DataRateProfile& dr);

struct Clustering {
    std::vector<std::pair<std::size_t, std::size_t>> clusters;
    std::vector<std::size_t> singles;
};

/// Greedy pairing: each unpaired device, in index order, is paired with its
/// nearest unpaired neighbour closer than d_max.
Clustering cluster_devices(std::span<const geometry::DevicePosition> positions, double d_max_km);

OutageReport run_lrfhss_trial(Rng& rng, const Scenario& scenario);
OutageReport run_d2d_trial(Rng& rng, const Scenario& scenario);

/// Pools Bernoulli counts over trials.
OutageReport estimate(std::span<const OutageReport> trials);

/// Trials first_trial .. first_trial + trials - 1, trial t seeded from
/// (seed, t), run in parallel and pooled.
OutageReport simulate(const Scenario& scenario, std::size_t trials, std::uint64_t seed,
                      std::size_t first_trial = 0);

}  // namespace lrfhss::mcsim

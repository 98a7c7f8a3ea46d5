#pragma once

#include <cstdint>

#include "lrfhss/channel.hpp"
#include "lrfhss/geometry.hpp"
#include "lrfhss/link.hpp"

namespace lrfhss {

/// Everything needed to evaluate one network configuration, analytically or
/// by simulation.
struct Scenario {
    geometry::SatelliteGeometry geometry;
    channel::ShadowedRiceParams fading;
    analytic::LinkBudget link;
    analytic::DataRateProfile dr;
    double slot_s = 291.1;
    long long n_users = 100000;
    /// Fraction of the coverage region represented by n_users (1 = full scale).
    double area_scale = 1.0;
    int n_tx_per_slot = 1;
    bool d2d_enabled = false;
    double d_max_km = 1.5;
    double p_lora_success = 0.9;
    analytic::LoraFrame d2d_frame;
    std::uint64_t seed = 1;

    /// Devices per km^2 over the (scaled) coverage region.
    [[nodiscard]] double density_per_km2() const;
    void set_density(double per_km2);
    [[nodiscard]] analytic::LinearLink linear_link() const;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
    friend bool operator==(const Scenario&, const Scenario&) = default;
};

}  // namespace lrfhss

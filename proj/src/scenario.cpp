#include "lrfhss/scenario.hpp"

#include <cmath>
#include <stdexcept>

namespace lrfhss {

double Scenario::density_per_km2() const {
    return static_cast<double>(n_users) / (area_scale * geometry::footprint_area_km2(geometry, slot_s));
}

void Scenario::set_density(double per_km2) {
    if (!(per_km2 >= 0.0)) throw std::invalid_argument("density must be >= 0");
    n_users = std::llround(per_km2 * area_scale * geometry::footprint_area_km2(geometry, slot_s));
}

analytic::LinearLink Scenario::linear_link() const {
    return analytic::LinearLink::from(link, dr.obw_hz);
}

void Scenario::validate() const {
    geometry.validate();
    fading.validate();
    link.validate();
    dr.validate();
    if (!(slot_s > 0.0)) throw std::invalid_argument("slot_s: must be > 0");
    if (n_users < 1) throw std::invalid_argument("n_users: must be >= 1");
    if (!(area_scale > 0.0 && area_scale <= 1.0)) throw std::invalid_argument("area_scale: must lie in (0, 1]");
    if (n_tx_per_slot < 1) throw std::invalid_argument("n_tx_per_slot: must be >= 1");
    if (!(d_max_km >= 0.0)) throw std::invalid_argument("d_max_km: must be >= 0");
    if (!(p_lora_success >= 0.0 && p_lora_success <= 1.0)) {
        throw std::invalid_argument("p_lora_success: must lie in [0, 1]");
    }
    if (d2d_enabled) {
        // 1% duty cycle; the 0.1% slack absorbs the rounding of the published slot length.
        const double airtime = analytic::worst_case_d2d_airtime_s(d2d_frame);
        if (airtime > 0.01 * slot_s * 1.001) {
            throw std::invalid_argument("slot_s: worst-case D2D airtime exceeds the 1% duty cycle");
        }
    }
}

}  // namespace lrfhss

#include "lrfhss/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lrfhss::geometry {

namespace {

constexpr double kPi = std::numbers::pi;

double deg2rad(double deg) { return deg * kPi / 180.0; }
double rad2deg(double rad) { return rad * 180.0 / kPi; }

void check_elevation(double elevation_deg) {
    if (!(elevation_deg >= 0.0 && elevation_deg <= 90.0)) {
        throw std::domain_error("elevation must lie in [0, 90] degrees");
    }
}

}  // namespace

void SatelliteGeometry::validate() const {
    if (!(orbital_height_km > 0.0 && footprint_radius_km > 0.0 && ground_speed_km_s > 0.0 &&
          earth_radius_km > 0.0)) {
        throw std::invalid_argument("SatelliteGeometry: all lengths and the speed must be > 0");
    }
    if (!(footprint_radius_km < kPi * earth_radius_km / 2.0)) {
        throw std::invalid_argument("SatelliteGeometry: footprint radius exceeds a quarter great circle");
    }
}

double slant_distance_km(double elevation_deg, const SatelliteGeometry& geo) {
    check_elevation(elevation_deg);
    const double a = deg2rad(elevation_deg);
    const double re = geo.earth_radius_km;
    const double ratio = (geo.orbital_height_km + re) / re;
    const double c = std::cos(a);
    return re * (std::sqrt(ratio * ratio - c * c) - std::sin(a));
}

double elevation_from_ground_distance(double ground_arc_km, const SatelliteGeometry& geo) {
    if (!(ground_arc_km >= 0.0)) {
        throw std::domain_error("elevation_from_ground_distance: negative distance");
    }
    if (ground_arc_km > geo.footprint_radius_km * (1.0 + 1e-12)) {
        throw std::domain_error("elevation_from_ground_distance: point outside the footprint");
    }
    if (ground_arc_km == 0.0) {
        return 90.0;
    }
    const double re = geo.earth_radius_km;
    const double theta = ground_arc_km / re;
    const double num = std::cos(theta) - re / (re + geo.orbital_height_km);
    return rad2deg(std::atan2(num, std::sin(theta)));
}

double elevation_from_slant_distance(double distance_km, const SatelliteGeometry& geo) {
    const double re = geo.earth_radius_km;
    const double rs = re + geo.orbital_height_km;
    const double d_max = slant_distance_km(0.0, geo);
    if (!(distance_km >= geo.orbital_height_km * (1.0 - 1e-12) && distance_km <= d_max * (1.0 + 1e-12))) {
        throw std::domain_error("elevation_from_slant_distance: distance outside [H_s, horizon range]");
    }
    // (R_e + H_s)^2 = R_e^2 + d^2 + 2 R_e d sin(el)
    const double s = (rs * rs - re * re - distance_km * distance_km) / (2.0 * re * distance_km);
    return rad2deg(std::asin(std::clamp(s, 0.0, 1.0)));
}

double air_loss_db(double elevation_deg) {
    return 0.1 * (1.0 + std::cos(deg2rad(elevation_deg)));
}

double tree_loss_db(double elevation_deg, double frequency_mhz) {
    // Elevation is scaled so that 90 deg maps to 1.57 and 3.937 rad.
    const double foliage = 25.8 * std::exp(-1.1 * elevation_deg * 1.57 / 90.0) +
                           1.5 * std::cos(elevation_deg * 3.937 / 90.0);
    return foliage * std::sqrt(frequency_mhz / 900.0);
}

double path_loss_db(double elevation_deg, double frequency_mhz, const SatelliteGeometry& geo) {
    if (!(frequency_mhz > 0.0)) {
        throw std::domain_error("path_loss_db: frequency must be > 0");
    }
    constexpr double rain_db = 0.1;
    constexpr double fog_db = 0.0;
    constexpr double iono_polarization_db = 3.0;
    const double d = slant_distance_km(elevation_deg, geo);
    return 32.44 + 20.0 * std::log10(d) + 20.0 * std::log10(frequency_mhz) + air_loss_db(elevation_deg) +
           rain_db + tree_loss_db(elevation_deg, frequency_mhz) + fog_db + iono_polarization_db;
}

double path_gain_linear(double elevation_deg, double frequency_mhz, const SatelliteGeometry& geo) {
    return std::pow(10.0, -path_loss_db(elevation_deg, frequency_mhz, geo) / 10.0);
}

double footprint_area_km2(const SatelliteGeometry& geo, double slot_seconds) {
    if (!(slot_seconds >= 0.0)) {
        throw std::domain_error("footprint_area_km2: slot length must be >= 0");
    }
    const double r = geo.footprint_radius_km;
    return 2.0 * r * geo.ground_speed_km_s * slot_seconds + kPi * r * r;
}

bool in_coverage_region(const DevicePosition& pos, const SatelliteGeometry& geo, double slot_seconds) {
    const double r = geo.footprint_radius_km;
    const double len = geo.ground_speed_km_s * slot_seconds;
    const double x = pos.along_track_km;
    const double y = pos.cross_track_km;
    if (std::abs(y) > r) return false;
    if (x >= 0.0 && x <= len) return true;
    const double dx = x < 0.0 ? x : x - len;
    return dx * dx + y * y <= r * r;
}

std::vector<DevicePosition> sample_positions(Rng& rng, std::size_t count, const SatelliteGeometry& geo,
                                             double slot_seconds) {
    const double r = geo.footprint_radius_km;
    const double len = geo.ground_speed_km_s * slot_seconds;
    std::uniform_real_distribution<double> ux(-r, len + r);
    std::uniform_real_distribution<double> uy(-r, r);
    std::vector<DevicePosition> out;
    out.reserve(count);
    while (out.size() < count) {
        DevicePosition p{ux(rng), uy(rng)};
        if (in_coverage_region(p, geo, slot_seconds)) {
            out.push_back(p);
        }
    }
    return out;
}

double satellite_ground_distance_at(double t_seconds, const DevicePosition& pos, const SatelliteGeometry& geo) {
    return std::hypot(pos.along_track_km - geo.ground_speed_km_s * t_seconds, pos.cross_track_km);
}

double device_distance_km(const DevicePosition& a, const DevicePosition& b) {
    return std::hypot(a.along_track_km - b.along_track_km, a.cross_track_km - b.cross_track_km);
}

double sample_visible_ground_distance(Rng& rng, const SatelliteGeometry& geo, double slot_seconds,
                                      double t_seconds) {
    for (;;) {
        const auto p = sample_positions(rng, 1, geo, slot_seconds).front();
        const double d = satellite_ground_distance_at(t_seconds, p, geo);
        if (d <= geo.footprint_radius_km) {
            return d;
        }
    }
}

double sample_visible_path_gain(Rng& rng, const SatelliteGeometry& geo, double slot_seconds,
                                double frequency_mhz) {
    std::uniform_real_distribution<double> ut(0.0, slot_seconds);
    const double d = sample_visible_ground_distance(rng, geo, slot_seconds, ut(rng));
    return path_gain_linear(elevation_from_ground_distance(d, geo), frequency_mhz, geo);
}

}  // namespace lrfhss::geometry

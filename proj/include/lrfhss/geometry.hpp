#pragma once

#include <cstddef>
#include <vector>

#include "lrfhss/random.hpp"

namespace lrfhss::geometry {

/// LEO pass geometry. Lengths in km, speed in km/s.
struct SatelliteGeometry {
    double orbital_height_km = 780.0;
    double footprint_radius_km = 2209.0;
    double ground_speed_km_s = 7.4;
    double earth_radius_km = 6378.0;

    void validate() const;
    friend bool operator==(const SatelliteGeometry&, const SatelliteGeometry&) = default;
};

/// Ground coordinates inside the swept coverage region. The origin is the
/// sub-satellite point at the start of the slot; the satellite moves along +x.
struct DevicePosition {
    double along_track_km = 0.0;
    double cross_track_km = 0.0;
};

/// Slant range to the satellite at the given elevation (degrees).
double slant_distance_km(double elevation_deg, const SatelliteGeometry& geo);

/// Elevation (degrees) seen from a point `ground_arc_km` away from the
/// sub-satellite point, on a spherical Earth.
double elevation_from_ground_distance(double ground_arc_km, const SatelliteGeometry& geo);

/// Inverse of slant_distance_km on [H_s, slant range at 0 deg].
double elevation_from_slant_distance(double distance_km, const SatelliteGeometry& geo);

double air_loss_db(double elevation_deg);
double tree_loss_db(double elevation_deg, double frequency_mhz);

/// Rural-shadowed empirical path loss in dB.
double path_loss_db(double elevation_deg, double frequency_mhz, const SatelliteGeometry& geo);

/// 10^(-path_loss_db/10).
double path_gain_linear(double elevation_deg, double frequency_mhz, const SatelliteGeometry& geo);

/// |F| = 2 R_s v T + pi R_s^2.
double footprint_area_km2(const SatelliteGeometry& geo, double slot_seconds);

bool in_coverage_region(const DevicePosition& pos, const SatelliteGeometry& geo, double slot_seconds);

/// `count` positions i.i.d. uniform over the coverage region (PPP conditioned on N).
std::vector<DevicePosition> sample_positions(Rng& rng, std::size_t count, const SatelliteGeometry& geo,
                                             double slot_seconds);

/// Planar ground distance from `pos` to the sub-satellite point at time t.
double satellite_ground_distance_at(double t_seconds, const DevicePosition& pos, const SatelliteGeometry& geo);

/// Ground distance between two devices.
double device_distance_km(const DevicePosition& a, const DevicePosition& b);

/// Ground offset to the sub-satellite point of a transmission started at
/// `t_seconds` by a device uniformly placed in the coverage region and
/// visible at that instant. Uniform over the instantaneous footprint disk.
double sample_visible_ground_distance(Rng& rng, const SatelliteGeometry& geo, double slot_seconds,
                                      double t_seconds);

/// Path gain of one such transmission.
double sample_visible_path_gain(Rng& rng, const SatelliteGeometry& geo, double slot_seconds,
                                double frequency_mhz);

}  // namespace lrfhss::geometry

#pragma once

namespace affectsense {

inline constexpr double kEarthRadiusM = 6'371'008.8; // mean radius

struct LatLon {
    double lat{0};
    double lon{0};
    bool operator==(const LatLon&) const = default;
};

/// Great-circle distance in meters.
double haversine_m(LatLon a, LatLon b);

} // namespace affectsense

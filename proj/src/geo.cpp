#include "affectsense/geo.hpp"

#include <algorithm>
#include <cmath>

namespace affectsense {

double haversine_m(LatLon a, LatLon b) {
    constexpr double kRad = M_PI / 180.0;
    const double dlat = (b.lat - a.lat) * kRad;
    const double dlon = (b.lon - a.lon) * kRad;
    const double s1 = std::sin(dlat / 2);
    const double s2 = std::sin(dlon / 2);
    const double h = s1 * s1 + std::cos(a.lat * kRad) * std::cos(b.lat * kRad) * s2 * s2;
    return 2.0 * kEarthRadiusM * std::asin(std::sqrt(std::clamp(h, 0.0, 1.0)));
}

} // namespace affectsense

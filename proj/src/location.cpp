#include "affectsense/features.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>

namespace affectsense {

std::vector<Fix> to_fixes(std::span<const SensorEvent> location_events) {
    std::vector<Fix> out;
    out.reserve(location_events.size());
    for (const auto& ev : location_events) {
        const auto& l = ev.as<LocationPayload>();
        out.push_back({ev.timestamp, {l.latitude, l.longitude}, l.speed});
    }
    return out;
}

std::int64_t LocationClustering::moving_ms() const {
    std::int64_t total = 0;
    for (std::size_t i = 0; i < fixes.size(); ++i)
        if (assignment[i] == kMoving) total += gap_ms[i];
    return total;
}

std::int64_t LocationClustering::noise_ms() const {
    std::int64_t total = 0;
    for (std::size_t i = 0; i < fixes.size(); ++i)
        if (assignment[i] == kNoise) total += gap_ms[i];
    return total;
}

std::size_t LocationClustering::noise_count() const {
    return static_cast<std::size_t>(std::count(assignment.begin(), assignment.end(), kNoise));
}

namespace {

// Distinct coordinates among the stationary fixes. Fixes sharing a coordinate share a neighborhood,
// so DBSCAN over weighted groups labels every fix exactly as point-level DBSCAN would.
struct Site {
    LatLon pos;
    std::vector<std::size_t> members; // fix indices, ascending
};

class SiteIndex {
  public:
    SiteIndex(const std::vector<Site>& sites, double eps_m) : sites_(sites), eps_m_(eps_m) {
        by_lat_.resize(sites.size());
        std::iota(by_lat_.begin(), by_lat_.end(), std::size_t{0});
        std::sort(by_lat_.begin(), by_lat_.end(),
                  [&](std::size_t a, std::size_t b) { return sites_[a].pos.lat < sites_[b].pos.lat; });
        // Haversine distance is at least the meridian arc, so only this latitude band can match.
        band_deg_ = eps_m / kEarthRadiusM * 180.0 / M_PI * (1.0 + 1e-9);
    }

    template <typename Fn>
    void for_each_neighbor(std::size_t site, Fn&& fn) const {
        const LatLon p = sites_[site].pos;
        auto lo = std::lower_bound(by_lat_.begin(), by_lat_.end(), p.lat - band_deg_,
                                   [&](std::size_t i, double v) { return sites_[i].pos.lat < v; });
        for (auto it = lo; it != by_lat_.end() && sites_[*it].pos.lat <= p.lat + band_deg_; ++it)
            if (haversine_m(p, sites_[*it].pos) <= eps_m_) fn(*it);
    }

  private:
    const std::vector<Site>& sites_;
    double eps_m_;
    double band_deg_;
    std::vector<std::size_t> by_lat_;
};

} // namespace

LocationClustering cluster_locations(std::span<const Fix> fixes, const FeatureParams& params,
                                     std::optional<LatLon> home) {
    if (fixes.size() < 2) throw InsufficientData("at least two location fixes are required");
    LocationClustering out;
    out.fixes.assign(fixes.begin(), fixes.end());
    const std::size_t n = out.fixes.size();
    const auto& f = out.fixes;

    out.gap_ms.assign(n, 0);
    for (std::size_t i = 0; i + 1 < n; ++i) out.gap_ms[i] = f[i + 1].t - f[i].t;

    out.speed_kmh.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (f[i].speed_mps) {
            out.speed_kmh[i] = *f[i].speed_mps * 3.6;
            continue;
        }
        const std::size_t a = i + 1 < n ? i : i - 1;
        const std::int64_t dt = f[a + 1].t - f[a].t;
        if (dt > 0) out.speed_kmh[i] = haversine_m(f[a].pos, f[a + 1].pos) / (static_cast<double>(dt) / 1000.0) * 3.6;
    }

    out.assignment.assign(n, LocationClustering::kMoving);
    std::vector<Site> sites;
    {
        std::map<std::pair<double, double>, std::size_t> site_of;
        for (std::size_t i = 0; i < n; ++i) {
            if (out.speed_kmh[i] >= params.stationary_kmh) continue;
            out.assignment[i] = LocationClustering::kNoise;
            auto [it, inserted] = site_of.try_emplace({f[i].pos.lat, f[i].pos.lon}, sites.size());
            if (inserted) sites.push_back({f[i].pos, {}});
            sites[it->second].members.push_back(i);
        }
    }
    // sites are created in order of their first member, which is the DBSCAN visiting order

    const SiteIndex index(sites, params.eps_m);
    std::vector<bool> core(sites.size(), false);
    for (std::size_t s = 0; s < sites.size(); ++s) {
        std::size_t reach = 0;
        index.for_each_neighbor(s, [&](std::size_t o) { reach += sites[o].members.size(); });
        core[s] = reach >= static_cast<std::size_t>(std::max(params.min_samples, 1));
    }

    constexpr int kUnvisited = -3;
    std::vector<int> site_label(sites.size(), kUnvisited);
    int next_id = 0;
    for (std::size_t s = 0; s < sites.size(); ++s) {
        if (site_label[s] != kUnvisited) continue;
        if (!core[s]) {
            site_label[s] = LocationClustering::kNoise;
            continue;
        }
        const int id = next_id++;
        site_label[s] = id;
        std::deque<std::size_t> queue{s};
        while (!queue.empty()) {
            const std::size_t q = queue.front();
            queue.pop_front();
            index.for_each_neighbor(q, [&](std::size_t r) {
                if (site_label[r] == LocationClustering::kNoise) {
                    site_label[r] = id;
                } else if (site_label[r] == kUnvisited) {
                    site_label[r] = id;
                    if (core[r]) queue.push_back(r);
                }
            });
        }
    }

    out.clusters.resize(static_cast<std::size_t>(next_id));
    for (int id = 0; id < next_id; ++id) out.clusters[static_cast<std::size_t>(id)].id = id;
    for (std::size_t s = 0; s < sites.size(); ++s)
        for (std::size_t i : sites[s].members) out.assignment[i] = site_label[s];

    std::vector<double> lat_sum(out.clusters.size(), 0.0);
    std::vector<double> lon_sum(out.clusters.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const int id = out.assignment[i];
        if (id < 0) continue;
        auto& c = out.clusters[static_cast<std::size_t>(id)];
        lat_sum[static_cast<std::size_t>(id)] += f[i].pos.lat;
        lon_sum[static_cast<std::size_t>(id)] += f[i].pos.lon;
        c.dwell_ms += out.gap_ms[i];
        ++c.size;
    }
    for (auto& c : out.clusters) {
        const auto k = static_cast<std::size_t>(c.id);
        c.centroid = {lat_sum[k] / static_cast<double>(c.size), lon_sum[k] / static_cast<double>(c.size)};
    }

    if (home) {
        double best = params.eps_m;
        for (const auto& c : out.clusters) {
            const double d = haversine_m(c.centroid, *home);
            if (d <= best) {
                if (!out.home_cluster || d < best) out.home_cluster = c.id;
                best = d;
            }
        }
    }
    return out;
}

FamilyValues<20> location_features(const LocationClustering& lc, bool home_known) {
    FamilyValues<20> out;
    auto set = [&](int id, double v) { out[static_cast<std::size_t>(id - 45)] = v; };

    const auto& clusters = lc.clusters;
    const std::size_t k = clusters.size();
    std::vector<double> dwell;
    for (const auto& c : clusters) dwell.push_back(c.dwell_minutes());
    std::vector<double> ranked = dwell;
    std::sort(ranked.begin(), ranked.end(), std::greater<>());
    const double dwell_total = std::accumulate(dwell.begin(), dwell.end(), 0.0);

    set(50, k > 0 ? ranked[0] : 0.0);
    set(45, k > 1 ? ranked[1] : 0.0);
    set(55, k > 2 ? ranked[2] : 0.0);
    set(46, k > 0 ? ranked.front() : 0.0);
    set(57, k > 0 ? ranked.back() : 0.0);
    const double mean_dwell = k > 0 ? dwell_total / static_cast<double>(k) : 0.0;
    set(51, mean_dwell);
    double ss = 0;
    for (double d : dwell) ss += (d - mean_dwell) * (d - mean_dwell);
    set(49, k > 0 ? std::sqrt(ss / static_cast<double>(k)) : 0.0);

    const std::int64_t moving = lc.moving_ms();
    const std::int64_t stationary = lc.tracked_ms() - moving;
    if (stationary > 0) set(47, static_cast<double>(moving) / static_cast<double>(stationary));

    double path = 0;
    for (std::size_t i = 0; i + 1 < lc.fixes.size(); ++i) path += haversine_m(lc.fixes[i].pos, lc.fixes[i + 1].pos);
    set(48, path);

    // Dwell proportions; uniform when no dwell time was attributed.
    std::vector<double> p(k, k > 0 ? 1.0 / static_cast<double>(k) : 0.0);
    if (dwell_total > 0)
        for (std::size_t i = 0; i < k; ++i) p[i] = dwell[i] / dwell_total;
    double entropy = 0;
    for (double pi : p)
        if (pi > 0) entropy -= pi * std::log(pi);
    set(64, entropy);
    set(52, k >= 2 ? entropy / std::log(static_cast<double>(k)) : 0.0);

    std::vector<double> speeds;
    for (std::size_t i = 0; i < lc.fixes.size(); ++i)
        if (lc.assignment[i] == LocationClustering::kMoving) speeds.push_back(lc.speed_kmh[i]);
    if (!speeds.empty()) {
        const double mean = std::accumulate(speeds.begin(), speeds.end(), 0.0) / static_cast<double>(speeds.size());
        double var = 0;
        for (double s : speeds) var += (s - mean) * (s - mean);
        set(59, mean);
        set(53, var / static_cast<double>(speeds.size()));
    }

    if (home_known) set(54, lc.home_cluster ? dwell[static_cast<std::size_t>(*lc.home_cluster)] : 0.0);

    std::size_t transitions = 0;
    std::optional<int> last;
    for (int a : lc.assignment) {
        if (a < 0) continue;
        if (last && *last != a) ++transitions;
        last = a;
    }
    set(56, static_cast<double>(transitions));

    double rog = 0;
    if (k > 0) {
        LatLon center{0, 0};
        for (std::size_t i = 0; i < k; ++i) {
            center.lat += p[i] * clusters[i].centroid.lat;
            center.lon += p[i] * clusters[i].centroid.lon;
        }
        double acc = 0;
        for (std::size_t i = 0; i < k; ++i) {
            const double d = haversine_m(clusters[i].centroid, center);
            acc += p[i] * d * d;
        }
        rog = std::sqrt(acc);
    }
    set(58, rog);

    set(60, 100.0 * static_cast<double>(lc.noise_count()) / static_cast<double>(lc.fixes.size()));

    // Spread of all fixes around their time-weighted centroid.
    double w_total = 0;
    for (auto g : lc.gap_ms) w_total += static_cast<double>(g);
    auto weight = [&](std::size_t i) { return w_total > 0 ? static_cast<double>(lc.gap_ms[i]) : 1.0; };
    const double w_norm = w_total > 0 ? w_total : static_cast<double>(lc.fixes.size());
    // offsets from a weighted fix, so coincident fixes give exactly zero spread
    std::size_t ref = 0;
    while (ref + 1 < lc.fixes.size() && weight(ref) == 0) ++ref;
    const LatLon origin = lc.fixes[ref].pos;
    LatLon shift{0, 0};
    for (std::size_t i = 0; i < lc.fixes.size(); ++i) {
        shift.lat += weight(i) * (lc.fixes[i].pos.lat - origin.lat);
        shift.lon += weight(i) * (lc.fixes[i].pos.lon - origin.lon);
    }
    const LatLon centroid{origin.lat + shift.lat / w_norm, origin.lon + shift.lon / w_norm};
    double variance = 0;
    for (std::size_t i = 0; i < lc.fixes.size(); ++i) {
        const double d = haversine_m(lc.fixes[i].pos, centroid);
        variance += weight(i) * d * d;
    }
    variance /= w_norm;
    set(61, variance);
    if (variance > 0) set(62, std::log(variance));

    set(63, static_cast<double>(k));
    return out;
}

std::optional<LatLon> detect_home(std::span<const SensorEvent> window_locations, TzOffset tz,
                                  const FeatureParams& params) {
    const auto fixes = to_fixes(window_locations);
    if (fixes.size() < 2) return std::nullopt;
    const auto lc = cluster_locations(fixes, params);
    std::vector<std::int64_t> night(lc.clusters.size(), 0);
    for (std::size_t i = 0; i < lc.fixes.size(); ++i) {
        const int id = lc.assignment[i];
        if (id < 0) continue;
        if (local_time_of_day_ms(lc.fixes[i].t, tz) < 6 * kHourMs) night[static_cast<std::size_t>(id)] += lc.gap_ms[i];
    }
    std::optional<std::size_t> best;
    for (std::size_t c = 0; c < night.size(); ++c)
        if (night[c] > 0 && (!best || night[c] > night[*best])) best = c;
    if (!best) return std::nullopt;
    return lc.clusters[*best].centroid;
}

} // namespace affectsense

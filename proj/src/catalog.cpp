#include "affectsense/features.hpp"

#include "affectsense/csv.hpp"

#include <sstream>

namespace affectsense {

namespace {

using F = Family;
using U = Unit;

constexpr std::array<FeatureInfo, kFeatureCount> kCatalog = {{
    {1, "the count of episodes using Email applications", F::Applications, U::Count},
    {2, "the count of episodes using all applications", F::Applications, U::Count},
    {3, "the count of episodes using social media applications", F::Applications, U::Count},
    {4, "the count of episodes using dating applications", F::Applications, U::Count},
    {5, "the count of episodes using social applications", F::Applications, U::Count},
    {6, "the count of episodes using entertainment applications", F::Applications, U::Count},
    {7, "the count of episodes using Facebook Moments", F::Applications, U::Count},
    {8, "the count of usage episodes for the application with top usage", F::Applications, U::Count},
    {9, "the count of episodes using YouTube", F::Applications, U::Count},
    {10, "the count of episodes using Twitter", F::Applications, U::Count},
    {11, "the duration of using Email", F::Applications, U::Minutes},
    {12, "the duration of using all applications", F::Applications, U::Minutes},
    {13, "the duration using social media applications", F::Applications, U::Minutes},
    {14, "the duration of using dating applications", F::Applications, U::Minutes},
    {15, "the duration of using social applications", F::Applications, U::Minutes},
    {16, "the duration of using entertainment applications", F::Applications, U::Minutes},
    {17, "the duration of using Facebook Moments", F::Applications, U::Minutes},
    {18, "the duration of using the application with top usage", F::Applications, U::Minutes},
    {19, "the duration of using YouTube", F::Applications, U::Minutes},
    {20, "the duration of using Twitter", F::Applications, U::Minutes},

    {21, "the count of discharging episodes", F::Battery, U::Count},
    {22, "the count of charging episodes", F::Battery, U::Count},

    {23, "the number of missed calls", F::Calls, U::Count},
    {24, "the number of distinct contacts associated with missed calls", F::Calls, U::Count},
    {25, "the number of missed calls from the most frequent contact", F::Calls, U::Count},
    {26, "the number of incoming calls", F::Calls, U::Count},
    {27, "the number of distinct contacts associated with incoming calls", F::Calls, U::Count},
    {28, "the mean of incoming call duration", F::Calls, U::Seconds},
    {29, "the sum of incoming call duration", F::Calls, U::Seconds},
    {30, "the mode of incoming call duration", F::Calls, U::Seconds},
    {31, "the count of incoming calls from the most frequent contact", F::Calls, U::Count},
    {32, "the number of outgoing calls", F::Calls, U::Count},
    {33, "the number of distinct contacts associated with outgoing calls", F::Calls, U::Count},
    {34, "the mean of outgoing call duration", F::Calls, U::Seconds},
    {35, "the sum of outgoing call duration", F::Calls, U::Seconds},
    {36, "the mode of outgoing call duration", F::Calls, U::Seconds},
    {37, "the count of outgoing calls from the most frequent contact", F::Calls, U::Count},

    {38, "the count of typing events", F::Keyboard, U::Count},
    {39, "the count of keyboard typing or swiping event where the length changes exactly one more character",
     F::Keyboard, U::Count},
    {40, "the count of keyboard typing or swiping event where the length changes less than one fewer character",
     F::Keyboard, U::Count},
    {41, "the count of keyboard typing or swiping event where the length changes exactly one fewer character",
     F::Keyboard, U::Count},
    {42, "the number of characters in average in a session", F::Keyboard, U::Characters},
    {43, "the number of typing sessions", F::Keyboard, U::Count},
    {44, "the average time between keystrokes", F::Keyboard, U::Seconds},

    {45, "time spent at the second most visited location", F::Locations, U::Minutes},
    {46, "maximum time spent at any location cluster", F::Locations, U::Minutes},
    {47, "the ratio of time spent moving between locations to time spent stationary at a location", F::Locations,
     U::Dimensionless},
    {48, "total travelled distance", F::Locations, U::Meters},
    {49, "standard deviation of the time spent at location clusters", F::Locations, U::Minutes},
    {50, "time spent at the most visited location", F::Locations, U::Minutes},
    {51, "average time spent at location clusters", F::Locations, U::Minutes},
    {52, "normalized entropy of location visits", F::Locations, U::Dimensionless},
    {53, "variance of speed during movement between locations", F::Locations, U::SquaredKmh},
    {54, "time spent at home", F::Locations, U::Minutes},
    {55, "time spent at the third most visited location", F::Locations, U::Minutes},
    {56, "the number of transitions between distinct locations", F::Locations, U::Count},
    {57, "minimum time spent at any location cluster", F::Locations, U::Minutes},
    {58, "radius of Gyration (RoG) indicating the area covered", F::Locations, U::Meters},
    {59, "average speed during movement between locations", F::Locations, U::Kmh},
    {60, "percent of time considered outliers in location data", F::Locations, U::Percent},
    {61, "the variance of locations visited", F::Locations, U::SquareMeters},
    {62, "the logarithm of the variance of locations visited", F::Locations, U::Dimensionless},
    {63, "the number of significant places visited", F::Locations, U::Count},
    {64, "the entropy of location visits", F::Locations, U::Dimensionless},

    {65, "the number of received messages from the most frequent contact", F::Messages, U::Count},
    {66, "the number of received messages", F::Messages, U::Count},
    {67, "the number of distinct contacts associated with received messages", F::Messages, U::Count},
    {68, "the number of sent messages to the most frequent contact", F::Messages, U::Count},
    {69, "the number of sent messages", F::Messages, U::Count},
    {70, "the number of distinct contacts associated with sent messages", F::Messages, U::Count},

    {71, "the number of unlock episodes", F::Screen, U::Count},
    {72, "total duration of unlock episodes", F::Screen, U::Minutes},
    {73, "the length of longest unlock episode", F::Screen, U::Minutes},
    {74, "average time of unlock episodes", F::Screen, U::Minutes},
    {75, "the length of shortest unlock episode", F::Screen, U::Minutes},
    {76, "standard deviation of unlock episodes", F::Screen, U::Minutes},
    {77, "time between the first unlock episode and midnight", F::Screen, U::Minutes},
}};

constexpr bool catalog_is_contiguous() {
    for (std::size_t i = 0; i < kCatalog.size(); ++i)
        if (kCatalog[i].id != static_cast<int>(i) + 1) return false;
    return true;
}
static_assert(catalog_is_contiguous());

} // namespace

std::span<const FeatureInfo, kFeatureCount> feature_catalog() { return kCatalog; }

const FeatureInfo& feature_info(int id) {
    if (id < 1 || id > kFeatureCount) throw Error("feature id out of range: " + std::to_string(id));
    return kCatalog[static_cast<std::size_t>(id - 1)];
}

std::string_view to_string(Family f) {
    switch (f) {
    case Family::Applications: return "Applications";
    case Family::Battery: return "Battery";
    case Family::Calls: return "Calls";
    case Family::Keyboard: return "Keyboard";
    case Family::Locations: return "Locations";
    case Family::Messages: return "Messages";
    case Family::Screen: return "Screen";
    }
    return "?";
}

std::string_view family_noun(Family f) {
    switch (f) {
    case Family::Applications: return "application";
    case Family::Battery: return "battery";
    case Family::Calls: return "call";
    case Family::Keyboard: return "keyboard";
    case Family::Locations: return "location";
    case Family::Messages: return "message";
    case Family::Screen: return "screen";
    }
    return "?";
}

std::string_view to_string(Unit u) {
    switch (u) {
    case Unit::Count: return "count";
    case Unit::Minutes: return "minutes";
    case Unit::Meters: return "meters";
    case Unit::Kmh: return "km/h";
    case Unit::Seconds: return "seconds";
    case Unit::Characters: return "characters";
    case Unit::Dimensionless: return "dimensionless";
    case Unit::Percent: return "percent";
    case Unit::SquareMeters: return "square meters";
    case Unit::SquaredKmh: return "(km/h)^2";
    }
    return "?";
}

std::string_view unit_suffix(Unit u) {
    switch (u) {
    case Unit::Count:
    case Unit::Dimensionless: return "";
    default: return to_string(u);
    }
}

std::pair<int, int> family_range(Family f) {
    switch (f) {
    case Family::Applications: return {1, 20};
    case Family::Battery: return {21, 22};
    case Family::Calls: return {23, 37};
    case Family::Keyboard: return {38, 44};
    case Family::Locations: return {45, 64};
    case Family::Messages: return {65, 70};
    case Family::Screen: return {71, 77};
    }
    return {0, -1};
}

SensorKind family_sensor(Family f) {
    switch (f) {
    case Family::Applications: return SensorKind::Application;
    case Family::Battery: return SensorKind::Battery;
    case Family::Calls: return SensorKind::Call;
    case Family::Keyboard: return SensorKind::Keyboard;
    case Family::Locations: return SensorKind::Location;
    case Family::Messages: return SensorKind::Message;
    case Family::Screen: return SensorKind::Screen;
    }
    return SensorKind::Screen;
}

bool DailyFeatureVector::family_missing(Family f) const {
    const auto [lo, hi] = family_range(f);
    for (int id = lo; id <= hi; ++id)
        if (get(id)) return false;
    return true;
}

std::string catalog_csv() {
    std::ostringstream out;
    out << "id,name,family,unit\n";
    for (const auto& f : kCatalog)
        out << f.id << ',' << csv::escape(f.name) << ',' << to_string(f.family) << ',' << to_string(f.unit) << '\n';
    return out.str();
}

} // namespace affectsense

#include "affectsense/backend.hpp"
#include "affectsense/hashing.hpp"
#include "affectsense/prompt.hpp"
#include "affectsense/textualize.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <mutex>
#include <unordered_map>

namespace affectsense {

namespace {

using WeekVector = std::array<std::optional<double>, kFeatureCount>;

// Mean of each feature over the days on which it is present.
WeekVector week_vector(std::string_view description) {
    std::array<double, kFeatureCount> sum{};
    std::array<int, kFeatureCount> n{};
    for (const auto& day : parse_week(description)) {
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            if (!day.values[i]) continue;
            sum[i] += *day.values[i];
            ++n[i];
        }
    }
    WeekVector out;
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        if (n[i] > 0) out[i] = sum[i] / n[i];
    return out;
}

// Descriptions repeat across the prompts of a run, so parsed vectors are memoized.
WeekVector cached_week_vector(std::string_view description) {
    static std::mutex mutex;
    static std::unordered_map<std::string, WeekVector> cache;
    const std::string key = hex_digest(description);
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    WeekVector v;
    try {
        v = week_vector(description);
    } catch (const Error& e) {
        throw MalformedPrompt(std::string("unreadable week description: ") + e.what());
    }
    std::lock_guard lock(mutex);
    if (cache.size() > 4096) cache.clear();
    cache.emplace(key, v);
    return v;
}

struct Example {
    std::array<int, kItemCount> labels{};
    std::string_view description;
};

constexpr std::string_view kAnswerMarker = "\n\nProvide your choices in the following form";

int read_int(std::string_view& s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{}) throw MalformedPrompt("expected a score in example block");
    s.remove_prefix(static_cast<std::size_t>(p - s.data()));
    return v;
}

void expect(std::string_view& s, std::string_view token) {
    if (s.substr(0, token.size()) != token)
        throw MalformedPrompt("expected '" + std::string(token) + "' in example block");
    s.remove_prefix(token.size());
}

std::vector<Example> read_examples(std::string_view prompt, std::size_t query_section) {
    std::vector<Example> out;
    const std::string separator = "\n\n" + std::string(kExampleLead);
    std::size_t pos = prompt.find(kExampleLead);
    while (pos != std::string_view::npos && pos < query_section) {
        std::string_view s = prompt.substr(pos + kExampleLead.size());
        Example ex;
        for (std::size_t i = 0; i < kItemCount; ++i) {
            if (i) expect(s, ", ");
            expect(s, "how ");
            expect(s, item_key(kAllItems[i]));
            expect(s, " they felt is ");
            ex.labels[i] = read_int(s);
        }
        expect(s, ": ");
        const std::size_t begin = static_cast<std::size_t>(s.data() - prompt.data());
        std::size_t next = prompt.find(separator, begin);
        const std::size_t end = (next == std::string_view::npos || next > query_section) ? query_section : next;
        ex.description = prompt.substr(begin, end - begin);
        out.push_back(ex);
        pos = next == std::string_view::npos || next > query_section ? std::string_view::npos : next + 2;
    }
    return out;
}

} // namespace

OracleAnswer oracle_predict(std::string_view prompt) {
    OracleAnswer answer;
    const bool few_shot = prompt.substr(0, kFewShotOpening.size()) == kFewShotOpening;
    const bool zero_shot = prompt.substr(0, kZeroShotOpening.size()) == kZeroShotOpening;
    if (!few_shot && !zero_shot) throw MalformedPrompt("prompt has neither a zero-shot nor a few-shot opening");
    const auto lead = prompt.rfind(kDescriptionLead);
    if (lead == std::string_view::npos) throw MalformedPrompt("prompt has no query description");
    const auto query_begin = lead + kDescriptionLead.size();
    const auto query_end = prompt.find(kAnswerMarker, query_begin);
    if (query_end == std::string_view::npos) throw MalformedPrompt("prompt has no answer-format block");

    if (zero_shot) {
        answer.scores.fill(3);
        return answer;
    }

    const auto query_section = prompt.find(std::string("\n\n") + std::string(kQueryLead));
    if (query_section == std::string_view::npos) throw MalformedPrompt("few-shot prompt has no question section");
    const auto examples = read_examples(prompt, query_section);
    if (examples.empty()) throw MalformedPrompt("few-shot prompt has no example blocks");

    std::vector<WeekVector> pool;
    for (const auto& ex : examples) pool.push_back(cached_week_vector(ex.description));
    pool.push_back(cached_week_vector(prompt.substr(query_begin, query_end - query_begin)));

    // z-score each feature over the pool of examples plus the query.
    std::array<double, kFeatureCount> mean{};
    std::array<double, kFeatureCount> sd{};
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        double sum = 0;
        int n = 0;
        for (const auto& v : pool)
            if (v[f]) {
                sum += *v[f];
                ++n;
            }
        if (n < 2) continue;
        mean[f] = sum / n;
        double ss = 0;
        for (const auto& v : pool)
            if (v[f]) ss += (*v[f] - mean[f]) * (*v[f] - mean[f]);
        sd[f] = std::sqrt(ss / n);
    }

    const WeekVector& query = pool.back();
    double best = std::numeric_limits<double>::infinity();
    answer.nearest_example = 0;
    for (std::size_t e = 0; e < examples.size(); ++e) {
        double ss = 0;
        int shared = 0;
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            if (!(sd[f] > 0) || !pool[e][f] || !query[f]) continue;
            const double d = (*pool[e][f] - *query[f]) / sd[f];
            ss += d * d;
            ++shared;
        }
        const double dist = shared ? std::sqrt(ss / shared) : std::numeric_limits<double>::infinity();
        answer.distances.push_back(dist);
        if (dist < best) {
            best = dist;
            answer.nearest_example = static_cast<int>(e);
        }
    }
    answer.scores = examples[static_cast<std::size_t>(answer.nearest_example)].labels;
    return answer;
}

std::string OracleBackend::complete(const std::string& prompt, const GenParams&) {
    const OracleAnswer answer = oracle_predict(prompt);
    const bool cot = prompt.find(kWithReasoning) != std::string::npos;
    std::string out;
    for (std::size_t i = 0; i < kItemCount; ++i) {
        if (i) out += '\n';
        out += std::string(item_name(kAllItems[i])) + ": " + std::to_string(answer.scores[i]);
        if (!cot) continue;
        if (answer.nearest_example < 0) {
            out += " - no example weeks to compare against.";
        } else {
            char dist[32];
            std::snprintf(dist, sizeof dist, "%.3f", answer.distances[static_cast<std::size_t>(answer.nearest_example)]);
            out += " - closest to example week " + std::to_string(answer.nearest_example + 1) + " (distance " + dist +
                   ").";
        }
    }
    return out;
}

} // namespace affectsense

#include "affectsense/backend.hpp"
#include "affectsense/csv.hpp"
#include "affectsense/hashing.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <thread>

namespace affectsense {

using nlohmann::json;

// ---- mock --------------------------------------------------------------------

std::string MockBackend::complete(const std::string& prompt, const GenParams&) {
    std::lock_guard lock(mutex_);
    ++calls_;
    if (failures_ > 0) {
        --failures_;
        throw TransportError("mock: scripted failure", failure_retryable_);
    }
    if (auto it = fixtures_.find(hex_digest(prompt)); it != fixtures_.end()) return it->second;
    if (default_) return *default_;
    throw TransportError("mock: no fixture for prompt " + hex_digest(prompt), false);
}

void MockBackend::add(std::string_view prompt, std::string completion) {
    add_digest(hex_digest(prompt), std::move(completion));
}

void MockBackend::add_digest(std::string digest, std::string completion) {
    std::lock_guard lock(mutex_);
    fixtures_[std::move(digest)] = std::move(completion);
}

std::unique_ptr<MockBackend> MockBackend::from_fixture_file(const std::filesystem::path& path) {
    auto backend = std::make_unique<MockBackend>();
    if (path.empty()) return backend;
    json doc;
    try {
        doc = json::parse(csv::read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("mock fixtures " + path.string() + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("mock fixtures must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (!value.is_string()) throw ConfigError("mock fixture " + key + " is not a string");
        if (key == "default")
            backend->set_default(value.get<std::string>());
        else
            backend->add_digest(key, value.get<std::string>());
    }
    return backend;
}

// ---- clock and rate limiting -------------------------------------------------

ClientClock ClientClock::system() {
    return ClientClock{
        [] {
            using namespace std::chrono;
            return duration<double>(steady_clock::now().time_since_epoch()).count();
        },
        [](double s) {
            if (s > 0) std::this_thread::sleep_for(std::chrono::duration<double>(s));
        }};
}

RateLimiter::RateLimiter(double requests_per_minute, ClientClock clock)
    : interval_s_(60.0 / requests_per_minute), clock_(std::move(clock)) {}

void RateLimiter::acquire() {
    double wait = 0;
    {
        std::lock_guard lock(mutex_);
        const double now = clock_.now_s();
        const double slot = next_slot_ ? std::max(now, *next_slot_) : now;
        next_slot_ = slot + interval_s_;
        wait = slot - now;
    }
    if (wait > 0) clock_.sleep_s(wait);
}

// ---- client ------------------------------------------------------------------

LlmClient::LlmClient(Backend& backend, GenParams params, ClientOptions options, ClientClock clock)
    : backend_(backend), params_(std::move(params)), options_(options), clock_(std::move(clock)) {
    if (options_.requests_per_minute > 0) limiter_.emplace(options_.requests_per_minute, clock_);
    if (options_.max_in_flight < 1) options_.max_in_flight = 1;
}

Transcript LlmClient::call(const std::string& prompt, const CallContext& context) {
    Transcript t = call_inner(prompt, context);
    if (sink_) {
        std::lock_guard lock(sink_mutex_);
        sink_(t);
    }
    return t;
}

Transcript LlmClient::call_inner(const std::string& prompt, const CallContext& context) {
    Transcript t;
    t.run_id = context.run_id;
    t.participant_id = context.participant_id;
    t.week_id = context.week_id;
    t.repeat = context.repeat;
    t.shot_count = context.shot_count;
    t.sample = context.sample;
    t.prompt_text = prompt;
    t.prompt_digest = hex_digest(prompt);
    t.backend_name = backend_.name();

    if (options_.max_calls > 0) {
        const long started = backend_calls_.fetch_add(1);
        if (started >= options_.max_calls) {
            backend_calls_.fetch_sub(1);
            t.error = "call budget of " + std::to_string(options_.max_calls) + " reached";
            t.error_kind = "budget";
            return t;
        }
    } else {
        backend_calls_.fetch_add(1);
    }

    {
        std::unique_lock lock(slots_mutex_);
        slots_cv_.wait(lock, [&] { return in_flight_ < options_.max_in_flight; });
        ++in_flight_;
    }
    const double started_s = clock_.now_s();
    for (int attempt = 0;; ++attempt) {
        if (limiter_) limiter_->acquire();
        t.attempt_count = attempt + 1;
        try {
            t.completion_text = backend_.complete(prompt, params_);
            t.error.clear();
            t.error_kind.clear();
            break;
        } catch (const AuthError& e) {
            t.error = e.what();
            t.error_kind = "auth";
            break;
        } catch (const TransportError& e) {
            t.error = e.what();
            t.error_kind = "transport";
            if (!e.retryable() || attempt >= options_.max_retries) break;
            clock_.sleep_s(options_.retry_backoff_s * std::pow(2.0, attempt));
        }
    }
    if (!backend_.deterministic())
        t.wall_time_ms = static_cast<std::int64_t>(std::llround((clock_.now_s() - started_s) * 1000.0));
    {
        std::lock_guard lock(slots_mutex_);
        --in_flight_;
    }
    slots_cv_.notify_one();
    return t;
}

std::string LlmClient::complete(const std::string& prompt, const CallContext& context, Transcript* transcript) {
    Transcript t = call(prompt, context);
    if (transcript) *transcript = t;
    if (t.error_kind == "auth") throw AuthError(t.error);
    if (t.error_kind == "budget") throw BudgetExceeded(t.error);
    if (t.error_kind == "transport") throw TransportError(t.error, false);
    return t.completion_text;
}

// ---- transcripts -------------------------------------------------------------

std::string transcript_to_json(const Transcript& t) {
    json j;
    j["run_id"] = t.run_id;
    j["participant_id"] = t.participant_id;
    j["week_id"] = t.week_id;
    j["repeat"] = t.repeat;
    j["shot_count"] = t.shot_count;
    j["sample"] = t.sample;
    j["prompt_text"] = t.prompt_text;
    j["prompt_digest"] = t.prompt_digest;
    j["completion_text"] = t.completion_text;
    j["backend_name"] = t.backend_name;
    j["wall_time_ms"] = t.wall_time_ms;
    j["attempt_count"] = t.attempt_count;
    j["error"] = t.error;
    j["error_kind"] = t.error_kind;
    return j.dump();
}

Transcript transcript_from_json(std::string_view line) {
    const json j = json::parse(line);
    Transcript t;
    t.run_id = j.value("run_id", "");
    t.participant_id = j.value("participant_id", "");
    t.week_id = j.value("week_id", 0);
    t.repeat = j.value("repeat", 0);
    t.shot_count = j.value("shot_count", 0);
    t.sample = j.value("sample", 0);
    t.prompt_text = j.value("prompt_text", "");
    t.prompt_digest = j.value("prompt_digest", "");
    t.completion_text = j.value("completion_text", "");
    t.backend_name = j.value("backend_name", "");
    t.wall_time_ms = j.value("wall_time_ms", std::int64_t{0});
    t.attempt_count = j.value("attempt_count", 0);
    t.error = j.value("error", "");
    t.error_kind = j.value("error_kind", "");
    return t;
}

} // namespace affectsense

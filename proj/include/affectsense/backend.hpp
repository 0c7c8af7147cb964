#pragma once

#include "affectsense/errors.hpp"

#include <array>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace affectsense {

struct GenParams {
    double temperature{0.0};
    int max_output_tokens{1024};
    std::string model_name;
    double request_timeout_s{120.0};
    int max_retries{3};
    double retry_backoff_s{2.0};
};

/// Network or server failure. Retryable ones are worth another attempt.
class TransportError : public Error {
  public:
    TransportError(const std::string& what, bool retryable) : Error(what), retryable_(retryable) {}
    bool retryable() const { return retryable_; }

  private:
    bool retryable_;
};

class AuthError : public Error {
  public:
    using Error::Error;
};

class BudgetExceeded : public Error {
  public:
    using Error::Error;
};

class MalformedPrompt : public Error {
  public:
    using Error::Error;
};

class Backend {
  public:
    virtual ~Backend() = default;
    virtual std::string name() const = 0;
    /// Raw completion text for one prompt. Must be safe to call from several threads.
    virtual std::string complete(const std::string& prompt, const GenParams& params) = 0;
    /// Same prompt, same answer. Deterministic backends report zero wall time in transcripts.
    virtual bool deterministic() const { return true; }
};

/// Scripted responses keyed by the prompt digest (hex_digest of the prompt text).
class MockBackend : public Backend {
  public:
    std::string name() const override { return "mock"; }
    std::string complete(const std::string& prompt, const GenParams& params) override;

    void add(std::string_view prompt, std::string completion);
    void add_digest(std::string digest, std::string completion);
    void set_default(std::string completion) { default_ = std::move(completion); }
    /// The next `n` calls throw TransportError before consulting the fixtures.
    void fail_next(int n, bool retryable = true) {
        failures_ = n;
        failure_retryable_ = retryable;
    }
    long calls() const { return calls_.load(); }

    /// JSON object {"<digest>": "<completion>", ..., "default": "<completion>"}.
    static std::unique_ptr<MockBackend> from_fixture_file(const std::filesystem::path& path);

  private:
    std::mutex mutex_;
    std::map<std::string, std::string> fixtures_;
    std::optional<std::string> default_;
    int failures_{0};
    bool failure_retryable_{true};
    std::atomic<long> calls_{0};
};

/// Nearest-neighbor stand-in for a language model. Reads the example weeks and the query back
/// out of the prompt and answers with the labels of the closest example week.
class OracleBackend : public Backend {
  public:
    std::string name() const override { return "oracle"; }
    std::string complete(const std::string& prompt, const GenParams& params) override;
};

/// Answer of the oracle for a prompt, without the text rendering.
struct OracleAnswer {
    std::array<int, 10> scores{};
    int nearest_example{-1}; // -1 for zero-shot
    std::vector<double> distances;
};
OracleAnswer oracle_predict(std::string_view prompt);

struct HttpBackendConfig {
    std::string endpoint; // e.g. https://host/v1/chat/completions
    std::string model;
    std::string credential_env;
};

/// OpenAI-style chat completion over HTTP(S). The prompt is sent as one user message.
class HttpBackend : public Backend {
  public:
    explicit HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {}
    std::string name() const override { return "http"; }
    std::string complete(const std::string& prompt, const GenParams& params) override;
    bool deterministic() const override { return false; }

  private:
    HttpBackendConfig config_;
};

/// Request body as sent on the wire.
std::string build_request_body(const std::string& prompt, const GenParams& params, const std::string& model);
/// Extracts the completion text from a response body; throws TransportError when it has none.
std::string parse_response_body(std::string_view body);

// ---- client ------------------------------------------------------------------

struct CallContext {
    std::string run_id;
    std::string participant_id;
    int week_id{0};
    int repeat{0};
    int shot_count{0};
    int sample{0};
};

struct Transcript {
    std::string run_id;
    std::string participant_id;
    int week_id{0};
    int repeat{0};
    int shot_count{0};
    int sample{0};
    std::string prompt_text;
    std::string prompt_digest;
    std::string completion_text;
    std::string backend_name;
    std::int64_t wall_time_ms{0};
    int attempt_count{0};
    std::string error; // empty on success
    std::string error_kind; // transport, auth, budget

    bool ok() const { return error.empty(); }
};

struct ClientOptions {
    int max_retries{3};
    double retry_backoff_s{2.0};
    double requests_per_minute{0}; // 0 disables rate limiting
    int max_in_flight{4};
    long max_calls{0}; // 0 means no cap
};

struct ClientClock {
    std::function<double()> now_s;      // monotonic seconds
    std::function<void(double)> sleep_s; // blocking sleep
    static ClientClock system();
};

/// Token bucket holding a single token, refilled at rpm/60 per second.
class RateLimiter {
  public:
    RateLimiter(double requests_per_minute, ClientClock clock);
    void acquire();

  private:
    double interval_s_;
    ClientClock clock_;
    std::mutex mutex_;
    std::optional<double> next_slot_;
};

/// Wraps a backend with retries, rate limiting, an in-flight cap and a call budget.
class LlmClient {
  public:
    LlmClient(Backend& backend, GenParams params, ClientOptions options, ClientClock clock = ClientClock::system());

    /// Never throws for backend failures; they end up in the transcript's error fields.
    Transcript call(const std::string& prompt, const CallContext& context);

    /// Same as call, but rethrows the failure as TransportError, AuthError or BudgetExceeded.
    std::string complete(const std::string& prompt, const CallContext& context, Transcript* transcript = nullptr);

    /// Receives every transcript, including failed calls.
    void set_sink(std::function<void(const Transcript&)> sink) { sink_ = std::move(sink); }

    long backend_calls() const { return backend_calls_.load(); }
    const Backend& backend() const { return backend_; }
    const GenParams& params() const { return params_; }

  private:
    Transcript call_inner(const std::string& prompt, const CallContext& context);

    Backend& backend_;
    GenParams params_;
    ClientOptions options_;
    ClientClock clock_;
    std::optional<RateLimiter> limiter_;
    std::function<void(const Transcript&)> sink_;
    std::mutex sink_mutex_;

    std::mutex slots_mutex_;
    std::condition_variable slots_cv_;
    int in_flight_{0};

    std::atomic<long> backend_calls_{0};
};

std::string transcript_to_json(const Transcript& t);
Transcript transcript_from_json(std::string_view line);

} // namespace affectsense

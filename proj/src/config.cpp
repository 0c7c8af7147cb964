#include "affectsense/config.hpp"
#include "affectsense/csv.hpp"

#include "json.hpp"

#include <set>

namespace affectsense {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& section, const std::set<std::string>& known) {
    for (const auto& [key, value] : obj.items())
        if (!known.count(key)) throw ConfigError("unknown key " + (section.empty() ? key : section + "." + key));
}

const json& section(const json& root, const std::string& name) {
    static const json empty = json::object();
    if (!root.contains(name)) return empty;
    const json& s = root.at(name);
    if (!s.is_object()) throw ConfigError(name + " must be an object");
    return s;
}

template <typename T>
T get(const json& obj, const std::string& key, const std::string& where, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    if (p.empty()) return {};
    const fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

} // namespace

RunConfig parse_config(std::string_view json_text, const fs::path& base_dir) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(root, "",
                   {"participants", "paths", "study", "features", "backend", "gen", "experiment", "transcripts"});

    RunConfig c;
    if (!root.contains("participants") || !root.at("participants").is_array())
        throw ConfigError("participants must be a list of ids");
    std::set<std::string> seen;
    for (const auto& p : root.at("participants")) {
        if (!p.is_string() || p.get<std::string>().empty()) throw ConfigError("participant ids must be strings");
        const auto id = p.get<std::string>();
        if (!seen.insert(id).second) throw ConfigError("duplicate participant " + id);
        c.participants.push_back(id);
    }
    if (c.participants.empty()) throw ConfigError("participants is empty");

    const json& paths = section(root, "paths");
    reject_unknown(paths, "paths", {"data", "labels", "output", "app_categories", "features"});
    c.data_root = resolve(base_dir, get<std::string>(paths, "data", "paths", "data"));
    c.labels_root = resolve(base_dir, get<std::string>(paths, "labels", "paths", "labels"));
    c.output_root = resolve(base_dir, get<std::string>(paths, "output", "paths", "out"));
    c.app_categories = resolve(base_dir, get<std::string>(paths, "app_categories", "paths", ""));
    const auto features = get<std::string>(paths, "features", "paths", "");
    c.features_root = features.empty() ? c.output_root / "features" : resolve(base_dir, features);

    const json& study = section(root, "study");
    reject_unknown(study, "study", {"start_date", "timezone", "timezones"});
    try {
        if (!study.contains("start_date")) throw ConfigError("study.start_date is required");
        c.study.start_date = parse_date(get<std::string>(study, "start_date", "study", ""));
        c.study.timezone = parse_tz(get<std::string>(study, "timezone", "study", "Z"));
        if (study.contains("timezones")) {
            const json& tz = study.at("timezones");
            if (!tz.is_object()) throw ConfigError("study.timezones must map participant ids to offsets");
            for (const auto& [pid, value] : tz.items()) {
                if (!value.is_string()) throw ConfigError("study.timezones." + pid + " must be a string");
                c.study.timezone_overrides[pid] = parse_tz(value.get<std::string>());
            }
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("study: ") + e.what());
    }

    const json& feat = section(root, "features");
    reject_unknown(feat, "features", {"eps_m", "min_samples", "stationary_kmh", "keyboard_session_gap_s"});
    c.features.eps_m = get<double>(feat, "eps_m", "features", c.features.eps_m);
    c.features.min_samples = get<int>(feat, "min_samples", "features", c.features.min_samples);
    c.features.stationary_kmh = get<double>(feat, "stationary_kmh", "features", c.features.stationary_kmh);
    c.features.keyboard_session_gap_ms = static_cast<std::int64_t>(
        1000.0 * get<double>(feat, "keyboard_session_gap_s", "features",
                             static_cast<double>(c.features.keyboard_session_gap_ms) / 1000.0));
    if (!(c.features.eps_m > 0) || c.features.min_samples < 1 || !(c.features.stationary_kmh > 0) ||
        c.features.keyboard_session_gap_ms < 0)
        throw ConfigError("features: parameters must be positive");

    const json& be = section(root, "backend");
    reject_unknown(be, "backend",
                   {"kind", "endpoint", "model", "credential_env", "rpm", "max_in_flight", "max_calls", "timeout_s",
                    "max_retries", "retry_backoff_s", "fixtures"});
    c.backend.kind = get<std::string>(be, "kind", "backend", c.backend.kind);
    if (c.backend.kind != "http" && c.backend.kind != "mock" && c.backend.kind != "oracle")
        throw ConfigError("backend.kind must be http, mock or oracle, got " + c.backend.kind);
    c.backend.endpoint = get<std::string>(be, "endpoint", "backend", "");
    c.backend.model = get<std::string>(be, "model", "backend", "");
    c.backend.credential_env = get<std::string>(be, "credential_env", "backend", "");
    c.backend.rpm = get<double>(be, "rpm", "backend", c.backend.rpm);
    c.backend.max_in_flight = get<int>(be, "max_in_flight", "backend", c.backend.max_in_flight);
    c.backend.max_calls = get<long>(be, "max_calls", "backend", c.backend.max_calls);
    c.backend.fixtures = resolve(base_dir, get<std::string>(be, "fixtures", "backend", ""));
    c.gen.request_timeout_s = get<double>(be, "timeout_s", "backend", c.gen.request_timeout_s);
    c.gen.max_retries = get<int>(be, "max_retries", "backend", c.gen.max_retries);
    c.gen.retry_backoff_s = get<double>(be, "retry_backoff_s", "backend", c.gen.retry_backoff_s);
    if (c.backend.kind == "http" && (c.backend.endpoint.empty() || c.backend.credential_env.empty()))
        throw ConfigError("http backend needs backend.endpoint and backend.credential_env");
    if (c.backend.rpm < 0 || c.backend.max_in_flight < 1 || c.backend.max_calls < 0 || c.gen.max_retries < 0 ||
        c.gen.retry_backoff_s < 0 || !(c.gen.request_timeout_s > 0))
        throw ConfigError("backend: limits must be non-negative (max_in_flight >= 1, timeout_s > 0)");
    c.gen.model_name = c.backend.model;

    const json& gen = section(root, "gen");
    reject_unknown(gen, "gen", {"temperature", "max_output_tokens", "samples"});
    c.gen.temperature = get<double>(gen, "temperature", "gen", c.gen.temperature);
    c.gen.max_output_tokens = get<int>(gen, "max_output_tokens", "gen", c.gen.max_output_tokens);
    c.experiment.samples = get<int>(gen, "samples", "gen", c.experiment.samples);
    if (c.gen.temperature < 0 || c.gen.max_output_tokens < 1 || c.experiment.samples < 1)
        throw ConfigError("gen: temperature >= 0, max_output_tokens >= 1, samples >= 1");

    const json& ex = section(root, "experiment");
    reject_unknown(ex, "experiment",
                   {"run_id", "repeats", "seed", "shot_min", "shot_max", "cot", "allow_undecided"});
    c.experiment.run_id = get<std::string>(ex, "run_id", "experiment", c.experiment.run_id);
    c.experiment.repeats = get<int>(ex, "repeats", "experiment", c.experiment.repeats);
    c.experiment.seed = get<std::uint64_t>(ex, "seed", "experiment", c.experiment.seed);
    c.experiment.shot_min = get<int>(ex, "shot_min", "experiment", c.experiment.shot_min);
    c.experiment.shot_max = get<int>(ex, "shot_max", "experiment", c.experiment.shot_max);
    c.experiment.cot = get<bool>(ex, "cot", "experiment", c.experiment.cot);
    c.experiment.allow_undecided = get<bool>(ex, "allow_undecided", "experiment", c.experiment.allow_undecided);
    if (c.experiment.run_id.empty() || c.experiment.run_id.find('/') != std::string::npos ||
        c.experiment.run_id.find("..") != std::string::npos)
        throw ConfigError("experiment.run_id must be a plain directory name");
    if (c.experiment.repeats < 1) throw ConfigError("experiment.repeats must be at least 1");
    if (c.experiment.shot_min < 0 || c.experiment.shot_max > 10 || c.experiment.shot_min > c.experiment.shot_max)
        throw ConfigError("experiment shot range must lie within 0..10");

    const json& tr = section(root, "transcripts");
    reject_unknown(tr, "transcripts", {"prompt_text"});
    const auto mode = get<std::string>(tr, "prompt_text", "transcripts", "full");
    if (mode != "full" && mode != "digest") throw ConfigError("transcripts.prompt_text must be full or digest");
    c.transcript_full_prompt = mode == "full";
    return c;
}

RunConfig load_config(const fs::path& path) {
    if (!fs::is_regular_file(path)) throw ConfigError("config file not found: " + path.string());
    return parse_config(csv::read_file(path), fs::absolute(path).parent_path());
}

std::string config_to_json(const RunConfig& c, const fs::path& base_dir) {
    auto rel = [&](const fs::path& p) -> std::string {
        if (p.empty()) return "";
        const auto r = p.lexically_relative(base_dir);
        if (!r.empty() && *r.begin() != "..") return r.generic_string();
        return p.generic_string();
    };
    json j;
    j["participants"] = c.participants;
    j["paths"] = {{"data", rel(c.data_root)},
                  {"labels", rel(c.labels_root)},
                  {"output", rel(c.output_root)},
                  {"features", rel(c.features_root)}};
    if (!c.app_categories.empty()) j["paths"]["app_categories"] = rel(c.app_categories);
    j["study"] = {{"start_date", format_date(c.study.start_date)}, {"timezone", format_tz(c.study.timezone)}};
    if (!c.study.timezone_overrides.empty()) {
        json tz = json::object();
        for (const auto& [pid, off] : c.study.timezone_overrides) tz[pid] = format_tz(off);
        j["study"]["timezones"] = tz;
    }
    j["features"] = {{"eps_m", c.features.eps_m},
                     {"min_samples", c.features.min_samples},
                     {"stationary_kmh", c.features.stationary_kmh},
                     {"keyboard_session_gap_s", static_cast<double>(c.features.keyboard_session_gap_ms) / 1000.0}};
    j["backend"] = {{"kind", c.backend.kind},       {"rpm", c.backend.rpm},
                    {"max_in_flight", c.backend.max_in_flight}, {"max_calls", c.backend.max_calls},
                    {"timeout_s", c.gen.request_timeout_s},     {"max_retries", c.gen.max_retries},
                    {"retry_backoff_s", c.gen.retry_backoff_s}};
    if (!c.backend.endpoint.empty()) j["backend"]["endpoint"] = c.backend.endpoint;
    if (!c.backend.model.empty()) j["backend"]["model"] = c.backend.model;
    if (!c.backend.credential_env.empty()) j["backend"]["credential_env"] = c.backend.credential_env;
    if (!c.backend.fixtures.empty()) j["backend"]["fixtures"] = rel(c.backend.fixtures);
    j["gen"] = {{"temperature", c.gen.temperature},
                {"max_output_tokens", c.gen.max_output_tokens},
                {"samples", c.experiment.samples}};
    j["experiment"] = {{"run_id", c.experiment.run_id},
                       {"repeats", c.experiment.repeats},
                       {"seed", c.experiment.seed},
                       {"shot_min", c.experiment.shot_min},
                       {"shot_max", c.experiment.shot_max},
                       {"cot", c.experiment.cot},
                       {"allow_undecided", c.experiment.allow_undecided}};
    j["transcripts"] = {{"prompt_text", c.transcript_full_prompt ? "full" : "digest"}};
    return j.dump(2) + "\n";
}

std::unique_ptr<Backend> make_backend(const RunConfig& c) {
    if (c.backend.kind == "oracle") return std::make_unique<OracleBackend>();
    if (c.backend.kind == "mock") return MockBackend::from_fixture_file(c.backend.fixtures);
    return std::make_unique<HttpBackend>(
        HttpBackendConfig{c.backend.endpoint, c.backend.model, c.backend.credential_env});
}

ClientOptions client_options(const RunConfig& c) {
    ClientOptions o;
    o.max_retries = c.gen.max_retries;
    o.retry_backoff_s = c.gen.retry_backoff_s;
    // Local backends answer instantly; the rate limit only protects remote endpoints.
    o.requests_per_minute = c.backend.kind == "http" ? c.backend.rpm : 0;
    o.max_in_flight = c.backend.max_in_flight;
    o.max_calls = c.backend.max_calls;
    return o;
}

} // namespace affectsense

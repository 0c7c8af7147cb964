#include "affectsense/backend.hpp"

#include "httplib.h"
#include "json.hpp"

#include <cstdlib>

namespace affectsense {

using nlohmann::json;

std::string build_request_body(const std::string& prompt, const GenParams& params, const std::string& model) {
    json body;
    body["model"] = model;
    body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = params.temperature;
    body["max_tokens"] = params.max_output_tokens;
    return body.dump();
}

std::string parse_response_body(std::string_view body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw TransportError(std::string("response is not JSON: ") + e.what(), false);
    }
    try {
        const auto& choice = doc.at("choices").at(0);
        if (choice.contains("message")) return choice.at("message").at("content").get<std::string>();
        return choice.at("text").get<std::string>();
    } catch (const json::exception&) {
        throw TransportError("response carries no completion text", false);
    }
}

namespace {

struct Endpoint {
    std::string origin; // scheme://host[:port]
    std::string path;
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("backend.endpoint must be an http(s) URL: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace

std::string HttpBackend::complete(const std::string& prompt, const GenParams& params) {
    if (config_.credential_env.empty()) throw AuthError("backend.credential_env is not configured");
    const char* credential = std::getenv(config_.credential_env.c_str());
    if (!credential || !*credential) throw AuthError("environment variable " + config_.credential_env + " is not set");

    const Endpoint ep = split_endpoint(config_.endpoint);
    httplib::Client client(ep.origin);
    const auto timeout = std::chrono::duration<double>(params.request_timeout_s);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

    const httplib::Headers headers = {{"Authorization", std::string("Bearer ") + credential}};
    const std::string model = params.model_name.empty() ? config_.model : params.model_name;
    auto res = client.Post(ep.path, headers, build_request_body(prompt, params, model), "application/json");
    if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()), true);
    if (res->status == 401 || res->status == 403)
        throw AuthError("credential rejected (HTTP " + std::to_string(res->status) + ")");
    if (res->status == 429 || res->status >= 500)
        throw TransportError("HTTP " + std::to_string(res->status), true);
    if (res->status != 200) throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body, false);
    return parse_response_body(res->body);
}

} // namespace affectsense

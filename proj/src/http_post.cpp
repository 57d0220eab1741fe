#include "http_post.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>

namespace pwab::detail {

nlohmann::json post_json(const PostTarget& target, const nlohmann::json& body) {
    if (target.base_url.empty()) {
        throw TransportError("no endpoint configured", false);
    }
    const int attempts = std::max(1, target.max_attempts);
    std::string last_error;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        httplib::Client client(target.base_url);
        client.set_connection_timeout(target.timeout_seconds, 0);
        client.set_read_timeout(target.timeout_seconds, 0);
        httplib::Headers headers;
        if (!target.api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + target.api_key);
        }
        auto res = client.Post(target.path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
        } else if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
        } else if (res->status < 200 || res->status >= 300) {
            throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body, false);
        } else {
            try {
                return nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::parse_error& e) {
                throw TransportError(std::string("invalid JSON response: ") + e.what(), false);
            }
        }
        if (attempt < attempts) {
            std::this_thread::sleep_for(std::chrono::milliseconds(100 * attempt));
        }
    }
    throw TransportError(last_error + " after " + std::to_string(attempts) + " attempts", true);
}

}  // namespace pwab::detail

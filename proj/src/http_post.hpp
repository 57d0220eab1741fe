#pragma once
// JSON-over-HTTP POST with bounded retries, shared by the provider and
// embedding clients.

#include <pwab/error.hpp>

#include <string>

#include <json.hpp>

namespace pwab::detail {

class TransportError : public Error {
public:
    TransportError(const std::string& what, bool retryable) : Error(what), retryable_(retryable) {}
    bool retryable() const noexcept { return retryable_; }

private:
    bool retryable_;
};

struct PostTarget {
    std::string base_url;
    std::string path;
    std::string api_key;
    int timeout_seconds = 60;
    int max_attempts = 3;
};

// Retries connection failures, 429 and 5xx; other statuses fail at once.
nlohmann::json post_json(const PostTarget& target, const nlohmann::json& body);

}  // namespace pwab::detail

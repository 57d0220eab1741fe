#include <pwab/agent.hpp>

#include "http_post.hpp"

namespace pwab::agent {

HttpChatPolicy::HttpChatPolicy(PolicyConfig config) : config_(std::move(config)) {
    if (config_.sampling.temperature < 0) {
        throw InvalidArgument("policy temperature must be >= 0");
    }
    if (config_.endpoint.empty()) {
        throw InvalidArgument("policy endpoint is not configured");
    }
}

nlohmann::json HttpChatPolicy::request_body(const std::string& model,
                                            const std::vector<ChatMessage>& messages, int n,
                                            const Sampling& sampling) {
    return {{"model", model},
            {"messages", messages},
            {"temperature", sampling.temperature},
            {"n", n},
            {"max_tokens", sampling.max_tokens}};
}

std::vector<std::string> HttpChatPolicy::parse_response(const nlohmann::json& body) {
    std::vector<std::string> out;
    const auto& choices = body.at("choices");
    if (!choices.is_array()) throw ProviderError("response 'choices' is not an array", false);
    for (const auto& choice : choices) {
        const auto& content = choice.at("message").at("content");
        out.push_back(content.is_null() ? std::string() : content.get<std::string>());
    }
    return out;
}

std::vector<std::string> HttpChatPolicy::complete(const std::vector<ChatMessage>& messages, int n,
                                                  const Sampling& sampling) {
    if (n < 1) throw InvalidArgument("complete: n must be >= 1");
    detail::PostTarget target{config_.endpoint, config_.path, config_.api_key,
                              config_.timeout_seconds, config_.max_attempts};
    nlohmann::json response;
    try {
        response = detail::post_json(target, request_body(config_.model, messages, n, sampling));
    } catch (const detail::TransportError& e) {
        throw ProviderError(e.what(), e.retryable());
    }
    std::vector<std::string> out;
    try {
        out = parse_response(response);
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("malformed provider response: ") + e.what(), false);
    }
    if (out.empty()) throw ProviderError("provider returned no choices", true);
    // Some providers ignore n; top up with extra requests.
    while (out.size() < static_cast<std::size_t>(n)) {
        auto more = complete(messages, n - static_cast<int>(out.size()), sampling);
        out.insert(out.end(), more.begin(), more.end());
    }
    out.resize(static_cast<std::size_t>(n));
    return out;
}

InflightLimiter::InflightLimiter(std::shared_ptr<Policy> inner, std::ptrdiff_t max_in_flight)
    : inner_(std::move(inner)), slots_(std::clamp<std::ptrdiff_t>(max_in_flight, 1, 1024)) {
    if (!inner_) throw InvalidArgument("InflightLimiter: null policy");
}

std::vector<std::string> InflightLimiter::complete(const std::vector<ChatMessage>& messages, int n,
                                                   const Sampling& sampling) {
    slots_.acquire();
    struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
    } release{slots_};
    return inner_->complete(messages, n, sampling);
}

}  // namespace pwab::agent

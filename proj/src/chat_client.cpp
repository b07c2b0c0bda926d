#include "reviewkit/chat_client.hpp"

#include <cstdlib>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "reviewkit/error.hpp"
#include "url.hpp"

namespace reviewkit {

namespace {

thread_local int t_last_attempts = 0;

// Releases the slot even when the call throws.
class SlotGuard {
public:
    explicit SlotGuard(std::counting_semaphore<>& slots) : slots_(slots) { slots_.acquire(); }
    ~SlotGuard() { slots_.release(); }
    SlotGuard(const SlotGuard&) = delete;
    SlotGuard& operator=(const SlotGuard&) = delete;

private:
    std::counting_semaphore<>& slots_;
};

} // namespace

void EndpointConfig::validate() const {
    if (base_url.empty()) fail(ErrorKind::InvalidConfig, "endpoint base_url is empty");
    if (max_retries < 0 || max_retries > 20) {
        fail(ErrorKind::InvalidConfig, fmt::format("max_retries must be in [0, 20], got {}", max_retries));
    }
    if (max_in_flight < 1) {
        fail(ErrorKind::InvalidConfig, fmt::format("max_in_flight must be >= 1, got {}", max_in_flight));
    }
    if (temperature < 0.0) {
        fail(ErrorKind::InvalidConfig, fmt::format("temperature must be >= 0, got {}", temperature));
    }
    (void)detail::split_url(base_url);
}

ChatClient::ChatClient(int max_in_flight, int max_retries)
    : max_in_flight_(max_in_flight), max_retries_(max_retries), slots_(max_in_flight) {
    if (max_in_flight < 1) fail(ErrorKind::InvalidConfig, "max_in_flight must be >= 1");
    if (max_retries < 0) fail(ErrorKind::InvalidConfig, "max_retries must be >= 0");
}

std::string ChatClient::complete(std::span<const ChatMessage> messages) {
    SlotGuard guard(slots_);
    return do_complete(messages);
}

std::string chat_request_body(const EndpointConfig& config, std::span<const ChatMessage> messages) {
    nlohmann::json body;
    body["model"] = config.model_name;
    body["temperature"] = config.temperature;
    body["messages"] = nlohmann::json::array();
    for (const auto& m : messages) {
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    }
    return body.dump();
}

std::string parse_chat_response(const std::string& body) {
    try {
        const auto j = nlohmann::json::parse(body);
        const auto& content = j.at("choices").at(0).at("message").at("content");
        return content.is_null() ? std::string{} : content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::EndpointUnavailable, fmt::format("malformed chat completion response: {}", e.what()));
    }
}

HttpChatClient::HttpChatClient(EndpointConfig config)
    : ChatClient(config.max_in_flight, config.max_retries), config_(std::move(config)) {
    config_.validate();
    const auto url = detail::split_url(config_.base_url);
    origin_ = url.origin;
    path_ = url.path + "/chat/completions";
}

int HttpChatClient::last_attempts() noexcept { return t_last_attempts; }

std::string HttpChatClient::do_complete(std::span<const ChatMessage> messages) {
    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            fail(ErrorKind::Credentials,
                 fmt::format("environment variable {} is not set", config_.api_key_env));
        }
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    const std::string body = chat_request_body(config_, messages);

    httplib::Client client(origin_);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());

    std::string last_error;
    auto backoff = config_.initial_backoff;
    t_last_attempts = 0;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        ++t_last_attempts;
        auto res = client.Post(path_, headers, body, "application/json");
        if (!res) {
            last_error = fmt::format("transport error: {}", httplib::to_string(res.error()));
        } else if (res->status == 401 || res->status == 403) {
            fail(ErrorKind::Credentials,
                 fmt::format("{} rejected credentials (HTTP {})", config_.base_url, res->status));
        } else if (res->status == 429 || res->status >= 500) {
            last_error = fmt::format("HTTP {}", res->status);
        } else if (res->status != 200) {
            fail(ErrorKind::EndpointUnavailable,
                 fmt::format("{} answered HTTP {}: {}", config_.base_url, res->status, res->body));
        } else {
            try {
                return parse_chat_response(res->body);
            } catch (const Error& e) {
                last_error = e.what();
            }
        }
        spdlog::debug("chat completion attempt {} failed: {}", attempt + 1, last_error);
    }
    fail(ErrorKind::EndpointUnavailable,
         fmt::format("{} unavailable after {} attempts: {}", config_.base_url, t_last_attempts, last_error));
}

} // namespace reviewkit

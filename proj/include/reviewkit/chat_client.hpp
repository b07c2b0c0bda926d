#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <semaphore>
#include <span>
#include <string>
#include <vector>

namespace reviewkit {

struct ChatMessage {
    std::string role;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

/// Where and how to reach an OpenAI-compatible chat-completions endpoint.
struct EndpointConfig {
    /// e.g. "http://127.0.0.1:8000/v1"; requests go to <base_url>/chat/completions.
    std::string base_url;
    std::string model_name;
    /// Name of the environment variable holding the API key; empty for none.
    std::string api_key_env;
    double temperature = 0.0;
    int max_retries = 3;
    std::chrono::milliseconds timeout{120'000};
    int max_in_flight = 8;
    /// First retry delay; doubles on every further attempt.
    std::chrono::milliseconds initial_backoff{500};

    void validate() const;
};

/// Base for anything that turns a message list into an assistant reply.
/// complete() holds one of max_in_flight slots for the duration of a call.
class ChatClient {
public:
    ChatClient(int max_in_flight, int max_retries);
    virtual ~ChatClient() = default;

    ChatClient(const ChatClient&) = delete;
    ChatClient& operator=(const ChatClient&) = delete;

    std::string complete(std::span<const ChatMessage> messages);
    std::string complete(std::initializer_list<ChatMessage> messages) {
        return complete(std::span<const ChatMessage>(messages.begin(), messages.size()));
    }

    /// Re-asks allowed when a reply does not follow the requested format.
    int max_retries() const noexcept { return max_retries_; }
    int max_in_flight() const noexcept { return max_in_flight_; }

protected:
    virtual std::string do_complete(std::span<const ChatMessage> messages) = 0;

private:
    int max_in_flight_;
    int max_retries_;
    std::counting_semaphore<> slots_;
};

/// HTTP client with exponential backoff on transport errors, 429 and 5xx.
/// Exhausted retries throw EndpointUnavailable; 401/403 throw Credentials.
class HttpChatClient final : public ChatClient {
public:
    explicit HttpChatClient(EndpointConfig config);

    const EndpointConfig& config() const noexcept { return config_; }

    /// Number of HTTP attempts made by the most recent call on this thread.
    static int last_attempts() noexcept;

protected:
    std::string do_complete(std::span<const ChatMessage> messages) override;

private:
    EndpointConfig config_;
    std::string origin_;
    std::string path_;
};

/// In-process client backed by a function; used for embedding and tests.
class CallbackChatClient final : public ChatClient {
public:
    using Handler = std::function<std::string(std::span<const ChatMessage>)>;

    explicit CallbackChatClient(Handler handler, int max_in_flight = 8, int max_retries = 3)
        : ChatClient(max_in_flight, max_retries), handler_(std::move(handler)) {}

protected:
    std::string do_complete(std::span<const ChatMessage> messages) override {
        return handler_(messages);
    }

private:
    Handler handler_;
};

/// Builds the request body for a chat-completions call.
std::string chat_request_body(const EndpointConfig& config,
                              std::span<const ChatMessage> messages);

/// Extracts choices[0].message.content; throws EndpointUnavailable on a
/// malformed body.
std::string parse_chat_response(const std::string& body);

} // namespace reviewkit

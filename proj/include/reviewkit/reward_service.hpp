#pragma once

// HTTP/JSON reward and evaluation API for external RL trainers:
//   POST /v1/reward    score a batch of generated reviews
//   POST /v1/evaluate  rule-based metrics report
//   GET  /healthz      liveness and version
// Handlers are exposed as plain functions so they can be tested without a
// socket; RewardServer only adapts them to HTTP.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "reviewkit/chat_client.hpp"
#include "reviewkit/judge.hpp"
#include "reviewkit/types.hpp"

namespace httplib {
class Server;
}

namespace reviewkit {

inline constexpr const char* kServiceSchemaVersion = "1";
inline constexpr const char* kVersion = "0.1.0";

struct ServiceConfig {
    RewardConfig reward;
    /// Base seed mixed with each example_id to choose the judge presentation order.
    std::uint64_t seed = 0;
    std::size_t max_batch = 512;
    PairwiseOptions pairwise;
};

struct HttpReply {
    int status = 200;
    nlohmann::json body;
};

class RewardService {
public:
    /// `judge` may be null, which runs the service in judge-disabled mode.
    RewardService(ServiceConfig config, std::shared_ptr<ChatClient> judge);

    HttpReply handle_reward(const std::string& request_body) const;
    HttpReply handle_evaluate(const std::string& request_body) const;
    nlohmann::json health() const;

    const ServiceConfig& config() const noexcept { return config_; }
    bool judge_enabled() const noexcept { return judge_ != nullptr; }

private:
    nlohmann::json score_item(const nlohmann::json& item, const RewardConfig& reward) const;

    ServiceConfig config_;
    std::shared_ptr<ChatClient> judge_;
};

class RewardServer {
public:
    explicit RewardServer(const RewardService& service);
    ~RewardServer();

    /// Returns the bound port; port 0 picks a free one. Throws Io on failure.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void listen();
    /// Stops accepting; in-flight requests finish before listen() returns.
    void stop();
    /// Blocks until listen() is accepting connections.
    void wait_until_ready() const;

private:
    const RewardService& service_;
    std::unique_ptr<httplib::Server> server_;
};

/// Binds, prints "listening on HOST:PORT", serves until SIGINT or SIGTERM.
/// Returns 0 after a clean shutdown and 1 when the address cannot be bound.
int serve(const RewardService& service, const std::string& host, int port);

} // namespace reviewkit

#include "reviewkit/reward_service.hpp"

#include <atomic>
#include <csignal>
#include <cstdio>
#include <pthread.h>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "reviewkit/error.hpp"
#include "reviewkit/metrics.hpp"
#include "reviewkit/parallel.hpp"
#include "reviewkit/reward.hpp"
#include "reviewkit/rng.hpp"
#include "reviewkit/serialization.hpp"

namespace reviewkit {

namespace {

using nlohmann::json;

HttpReply error_reply(int status, std::string_view kind, const std::string& message) {
    return {status, json{{"schema_version", kServiceSchemaVersion},
                         {"error", {{"kind", kind}, {"message", message}}}}};
}

// Parses the body and checks the schema version; nullopt plus `reply` on failure.
std::optional<json> parse_request(const std::string& body, HttpReply& reply) {
    json request;
    try {
        request = json::parse(body);
    } catch (const json::exception& e) {
        reply = error_reply(400, "invalid_request", fmt::format("body is not JSON: {}", e.what()));
        return std::nullopt;
    }
    if (!request.is_object()) {
        reply = error_reply(400, "invalid_request", "body must be a JSON object");
        return std::nullopt;
    }
    if (request.contains("schema_version") && request["schema_version"] != kServiceSchemaVersion) {
        reply = error_reply(400, "unsupported_schema",
                            fmt::format("schema_version {} is not supported (expected \"{}\")",
                                        request["schema_version"].dump(), kServiceSchemaVersion));
        return std::nullopt;
    }
    return request;
}

const std::string& string_field(const json& item, const char* key) {
    if (!item.contains(key) || !item[key].is_string()) {
        fail(ErrorKind::InvalidInput, fmt::format("item field '{}' must be a string", key));
    }
    return item[key].get_ref<const std::string&>();
}

} // namespace

RewardService::RewardService(ServiceConfig config, std::shared_ptr<ChatClient> judge)
    : config_(std::move(config)), judge_(std::move(judge)) {
    config_.reward.validate();
    if (config_.max_batch == 0) fail(ErrorKind::InvalidConfig, "max_batch must be >= 1");
}

json RewardService::health() const {
    return json{{"status", "ok"},
                {"version", kVersion},
                {"schema_version", kServiceSchemaVersion},
                {"judge", judge_enabled() ? "enabled" : "disabled"}};
}

json RewardService::score_item(const json& item, const RewardConfig& reward) const {
    json id = item.is_object() && item.contains("example_id") ? item["example_id"] : json(nullptr);
    try {
        if (!item.is_object()) fail(ErrorKind::InvalidInput, "item must be an object");
        const std::string& example_id = string_field(item, "example_id");
        if (example_id.empty()) fail(ErrorKind::InvalidInput, "example_id is empty");
        if (!item.contains("ground_truth_rating") || !item["ground_truth_rating"].is_number()) {
            fail(ErrorKind::InvalidInput, "item field 'ground_truth_rating' must be a number");
        }
        const double truth = item["ground_truth_rating"].get<double>();
        if (!(truth >= 1.0 && truth <= 10.0)) {
            fail(ErrorKind::InvalidInput, fmt::format("ground_truth_rating {} is outside [1, 10]", truth));
        }
        const std::string& generated = string_field(item, "generated_review");
        const std::string& reference = string_field(item, "reference_review");
        const std::string& context = string_field(item, "paper_context");

        json diagnostics;
        std::optional<int> judge_outcome;
        if (judge_) {
            try {
                const auto verdict = compare_reviews(context, generated, reference, *judge_,
                                                     derive_seed(config_.seed, example_id),
                                                     config_.pairwise);
                judge_outcome = verdict.r_judge();
                diagnostics["judge"] = "ok";
                diagnostics["presented_order"] = to_string(verdict.presented_order);
            } catch (const Error& e) {
                spdlog::warn("judge unavailable for {}: {}", example_id, e.what());
                diagnostics["judge"] = "unavailable";
                diagnostics["judge_error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
            }
        } else {
            diagnostics["judge"] = "disabled";
        }

        const RewardResult result = score_generated_review(truth, generated, judge_outcome, reward);
        diagnostics["missing_sections"] = result.missing;
        diagnostics["extracted_rating"] =
            result.parsed.rating ? json(*result.parsed.rating) : json(nullptr);
        return json{{"example_id", example_id},
                    {"ok", true},
                    {"reward", result.breakdown},
                    {"diagnostics", diagnostics}};
    } catch (const Error& e) {
        return json{{"example_id", id},
                    {"ok", false},
                    {"error", {{"kind", to_string(e.kind())}, {"message", e.what()}}}};
    }
}

HttpReply RewardService::handle_reward(const std::string& request_body) const {
    HttpReply reply;
    auto request = parse_request(request_body, reply);
    if (!request) return reply;
    if (!request->contains("items") || !(*request)["items"].is_array()) {
        return error_reply(400, "invalid_request", "'items' must be an array");
    }
    const json& items = (*request)["items"];
    if (items.empty()) return error_reply(400, "invalid_request", "'items' is empty");
    if (items.size() > config_.max_batch) {
        return error_reply(413, "batch_too_large",
                           fmt::format("batch of {} exceeds the limit of {}", items.size(), config_.max_batch));
    }
    RewardConfig reward;
    try {
        reward = apply_overrides(config_.reward, request->value("config", json(nullptr)));
        reward.validate();
    } catch (const Error& e) {
        return error_reply(400, to_string(e.kind()), e.what());
    }

    std::vector<json> results(items.size());
    // Items are independent; judge calls are the slow part, so fan out up
    // to the judge's in-flight budget. Output order follows input order.
    const std::size_t workers = judge_ ? static_cast<std::size_t>(judge_->max_in_flight()) : 1;
    parallel_for(items.size(), workers, [&](std::size_t i) { results[i] = score_item(items[i], reward); });

    reply.status = 200;
    reply.body = json{{"schema_version", kServiceSchemaVersion},
                      {"config", reward},
                      {"judge", judge_enabled() ? "enabled" : "disabled"},
                      {"results", results}};
    return reply;
}

HttpReply RewardService::handle_evaluate(const std::string& request_body) const {
    HttpReply reply;
    auto request = parse_request(request_body, reply);
    if (!request) return reply;
    if (!request->contains("records") || !(*request)["records"].is_array()) {
        return error_reply(400, "invalid_request", "'records' must be an array");
    }
    try {
        std::vector<RunRecord> records;
        for (const auto& r : (*request)["records"]) {
            if (!r.is_object() || !r.contains("truth") || !r["truth"].is_number()) {
                fail(ErrorKind::InvalidInput, "each record needs a numeric 'truth'");
            }
            RunRecord rec;
            rec.truth = r["truth"].get<double>();
            if (r.contains("predicted") && r["predicted"].is_number()) rec.predicted = r["predicted"].get<double>();
            records.push_back(rec);
        }
        const PairPolicy policy = PairPolicy::parse(request->value("pair_policy", std::string("auto")));
        reply.status = 200;
        reply.body = evaluate_run(records, policy).to_json();
        return reply;
    } catch (const Error& e) {
        return error_reply(400, to_string(e.kind()), e.what());
    }
}

RewardServer::RewardServer(const RewardService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
    server_->set_payload_max_length(64u * 1024u * 1024u);
    auto send = [](httplib::Response& res, const HttpReply& reply) {
        res.status = reply.status;
        res.set_content(reply.body.dump(), "application/json");
    };
    server_->Get("/healthz", [this, send](const httplib::Request&, httplib::Response& res) {
        send(res, HttpReply{200, service_.health()});
    });
    server_->Post("/v1/reward", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service_.handle_reward(req.body));
    });
    server_->Post("/v1/evaluate", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service_.handle_evaluate(req.body));
    });
}

RewardServer::~RewardServer() = default;

int RewardServer::bind(const std::string& host, int port) {
    int bound = -1;
    if (port == 0) {
        bound = server_->bind_to_any_port(host);
    } else if (server_->bind_to_port(host, port)) {
        bound = port;
    }
    if (bound <= 0) fail(ErrorKind::Io, fmt::format("cannot bind {}:{}", host, port));
    return bound;
}

void RewardServer::listen() { server_->listen_after_bind(); }

void RewardServer::stop() { server_->stop(); }

void RewardServer::wait_until_ready() const { server_->wait_until_ready(); }

int serve(const RewardService& service, const std::string& host, int port) {
    // Route SIGINT/SIGTERM to a dedicated waiter thread; every thread
    // created after this inherits the blocked mask.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    sigset_t previous;
    pthread_sigmask(SIG_BLOCK, &signals, &previous);

    RewardServer server(service);
    int bound = 0;
    try {
        bound = server.bind(host, port);
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        pthread_sigmask(SIG_SETMASK, &previous, nullptr);
        return 1;
    }

    std::atomic<bool> stopping{false};
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        if (stopping.exchange(true)) return;
        spdlog::info("signal {} received, shutting down", sig);
        server.wait_until_ready();
        server.stop();
    });

    std::printf("listening on %s:%d\n", host.c_str(), bound);
    std::fflush(stdout);
    server.listen();

    if (!stopping.exchange(true)) pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    pthread_sigmask(SIG_SETMASK, &previous, nullptr);
    return 0;
}

} // namespace reviewkit

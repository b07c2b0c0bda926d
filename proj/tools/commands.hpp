#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reviewkit/chat_client.hpp"
#include "reviewkit/types.hpp"

namespace reviewkit::cli {

struct EndpointFlags {
    std::string url;
    std::string model;
    std::string key_env;
    double temperature = 0.0;
    int max_retries = 3;
    int timeout_s = 120;
    int max_in_flight = 8;
    int backoff_ms = 500;

    bool enabled() const { return !url.empty(); }
    EndpointConfig to_config() const;
};

struct RetrieveArgs {
    std::string paper;
    std::string paper_id;
    std::string title;
    std::string out;
    EndpointFlags llm;
    std::string arxiv_url = "https://export.arxiv.org/api/query";
    int arxiv_interval_ms = 3000;
    int max_results = 5;
    std::string templates_dir;
};

struct RewardArgs {
    std::string dataset;
    std::string generated;
    std::string out;
    std::string summary;
    std::string venue_scales;
    RewardConfig reward;
    EndpointFlags judge;
    std::uint64_t seed = 0;
    std::size_t context_tokens = 8000;
    bool empty_sections_count = false;
    std::string templates_dir;
};

struct EvaluateArgs {
    std::string predictions;
    std::string pairs = "auto";
    std::string out;
};

struct JudgeEvalArgs {
    std::string input;
    std::string out;
    EndpointFlags judge;
    std::string templates_dir;
};

struct BalanceArgs {
    std::string dataset;
    std::string out;
    double mid_cap_fraction = 0.0;
    double extreme_boost = 0.0;
    std::uint64_t seed = 0;
};

struct SampleEvalArgs {
    std::string dataset;
    std::string out;
    std::size_t n = 0;
    std::size_t bins = 9;
    std::uint64_t seed = 0;
};

struct ServeArgs {
    std::string host = "127.0.0.1";
    int port = 8080;
    RewardConfig reward;
    EndpointFlags judge;
    std::uint64_t seed = 0;
    std::size_t max_batch = 512;
    std::size_t context_tokens = 8000;
};

// Each returns the process exit code. `argv` is what the manifest records.
int run_retrieve(const RetrieveArgs& args, const std::vector<std::string>& argv);
int run_reward(const RewardArgs& args, const std::vector<std::string>& argv);
int run_evaluate(const EvaluateArgs& args, const std::vector<std::string>& argv);
int run_judge_eval(const JudgeEvalArgs& args, const std::vector<std::string>& argv);
int run_balance(const BalanceArgs& args, const std::vector<std::string>& argv);
int run_sample_eval(const SampleEvalArgs& args, const std::vector<std::string>& argv);
int run_serve(const ServeArgs& args);

} // namespace reviewkit::cli

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "manifest.hpp"
#include "reviewkit/error.hpp"
#include "reviewkit/reward_service.hpp"

namespace {

using namespace reviewkit;
using namespace reviewkit::cli;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

void add_endpoint_flags(CLI::App* cmd, EndpointFlags& flags, const std::string& prefix, bool required) {
    const std::string p = "--" + prefix;
    cmd->add_option(p + "-url", flags.url, "Chat-completions base URL, e.g. http://host:8000/v1")->required(required);
    cmd->add_option(p + "-model", flags.model, "Model name sent with each request");
    cmd->add_option(p + "-key-env", flags.key_env, "Environment variable holding the API key");
    cmd->add_option(p + "-temperature", flags.temperature, "Sampling temperature")->capture_default_str();
    cmd->add_option(p + "-max-retries", flags.max_retries, "Retries per call")->capture_default_str();
    cmd->add_option(p + "-timeout", flags.timeout_s, "Request timeout in seconds")->capture_default_str();
    cmd->add_option(p + "-max-in-flight", flags.max_in_flight, "Concurrent request cap")->capture_default_str();
    cmd->add_option(p + "-backoff-ms", flags.backoff_ms, "First retry delay")->capture_default_str();
}

void add_reward_flags(CLI::App* cmd, RewardConfig& config) {
    cmd->add_option("--sigma", config.sigma, "Rating kernel width")->capture_default_str();
    cmd->add_option("--alpha", config.alpha, "Rating-consistency weight")->capture_default_str();
    cmd->add_option("--beta", config.beta, "Format-penalty weight")->capture_default_str();
    cmd->add_option("--gamma", config.gamma, "Rule vs judge mix")->capture_default_str();
}

int dispatch(std::vector<std::string> args, bool allow_replay);

int replay(const std::string& manifest_path) {
    const auto manifest = nlohmann::json::parse(read_file(manifest_path));
    const auto argv = manifest.at("argv").get<std::vector<std::string>>();
    if (manifest.contains("cwd")) std::filesystem::current_path(manifest["cwd"].get<std::string>());
    spdlog::info("replaying {}", fmt::join(argv, " "));
    return dispatch(argv, false);
}

int dispatch(std::vector<std::string> args, bool allow_replay) {
    const std::vector<std::string> recorded = args;
    CLI::App app{"Review generation toolkit: retrieval, rewards and evaluation", "reviewkit"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    std::string log_level = "warn";
    app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}))
        ->capture_default_str();

    RetrieveArgs retrieve;
    auto* c_retrieve = app.add_subcommand("retrieve", "Build a retrieved context for one paper");
    c_retrieve->add_option("--paper", retrieve.paper, "Paper text file")->required();
    c_retrieve->add_option("--paper-id", retrieve.paper_id, "Defaults to the file stem");
    c_retrieve->add_option("--title", retrieve.title, "Defaults to the first non-empty line");
    c_retrieve->add_option("--out", retrieve.out, "Output prefix")->required();
    add_endpoint_flags(c_retrieve, retrieve.llm, "llm", true);
    c_retrieve->add_option("--arxiv-url", retrieve.arxiv_url, "arXiv query endpoint")->capture_default_str();
    c_retrieve->add_option("--arxiv-interval-ms", retrieve.arxiv_interval_ms, "Minimum gap between arXiv requests")
        ->capture_default_str();
    c_retrieve->add_option("--max-results", retrieve.max_results, "Papers per query")->capture_default_str();
    c_retrieve->add_option("--templates-dir", retrieve.templates_dir, "Override built-in prompt templates");

    RewardArgs reward;
    auto* c_reward = app.add_subcommand("reward", "Score generated reviews against a dataset");
    c_reward->add_option("--dataset", reward.dataset, "Dataset JSONL")->required();
    c_reward->add_option("--generated", reward.generated, "JSONL of {paper_id, review[, rollout_id]}")->required();
    c_reward->add_option("--out", reward.out, "Rewards JSONL")->required();
    c_reward->add_option("--summary", reward.summary, "Summary JSON (default OUT.summary.json)");
    c_reward->add_option("--venue-scales", reward.venue_scales, "Check dataset ratings against this registry");
    add_reward_flags(c_reward, reward.reward);
    add_endpoint_flags(c_reward, reward.judge, "judge", false);
    c_reward->add_option("--seed", reward.seed, "Base seed for judge presentation order")->capture_default_str();
    c_reward->add_option("--context-tokens", reward.context_tokens, "Paper context cut for the judge")
        ->capture_default_str();
    c_reward->add_option("--templates-dir", reward.templates_dir, "Override built-in prompt templates");

    EvaluateArgs evaluate;
    auto* c_evaluate = app.add_subcommand("evaluate", "Rule-based rating metrics");
    c_evaluate->add_option("--predictions", evaluate.predictions, "JSONL of {predicted|review, truth}")->required();
    c_evaluate->add_option("--pairs", evaluate.pairs, "all | auto[:SEED] | sampled:N:SEED")->capture_default_str();
    c_evaluate->add_option("--out", evaluate.out, "Output prefix")->required();

    JudgeEvalArgs judge_eval;
    auto* c_judge = app.add_subcommand("judge-eval", "Seven-dimension judge scoring of reviews");
    c_judge->add_option("--input", judge_eval.input, "JSONL of {paper_id, paper, review}")->required();
    c_judge->add_option("--out", judge_eval.out, "Output prefix")->required();
    add_endpoint_flags(c_judge, judge_eval.judge, "judge", true);
    c_judge->add_option("--templates-dir", judge_eval.templates_dir, "Override built-in prompt templates");

    BalanceArgs balance;
    auto* c_balance = app.add_subcommand("balance", "Rebalance a training set by rating bin");
    c_balance->add_option("--dataset", balance.dataset, "Dataset JSONL")->required();
    c_balance->add_option("--out", balance.out, "Output JSONL")->required();
    c_balance->add_option("--mid-cap-fraction", balance.mid_cap_fraction, "Share of bins 5-6 kept")->required();
    c_balance->add_option("--extreme-boost", balance.extreme_boost, "Growth factor for bins <=3 and >=8")
        ->required();
    c_balance->add_option("--seed", balance.seed, "Sampling seed")->required();

    SampleEvalArgs sample;
    auto* c_sample = app.add_subcommand("sample-eval", "Draw a rating-uniform evaluation set");
    c_sample->add_option("--dataset", sample.dataset, "Candidate pool JSONL")->required();
    c_sample->add_option("--out", sample.out, "Output JSONL")->required();
    c_sample->add_option("-n,--n", sample.n, "Sample size")->required();
    c_sample->add_option("--bins", sample.bins, "Equal-width rating bins over [1, 10]")->capture_default_str();
    c_sample->add_option("--seed", sample.seed, "Sampling seed")->required();

    ServeArgs serve_args;
    auto* c_serve = app.add_subcommand("serve", "Run the HTTP reward service");
    c_serve->add_option("--host", serve_args.host, "Bind address")->capture_default_str();
    c_serve->add_option("--port", serve_args.port, "Port, 0 picks a free one")->capture_default_str();
    add_reward_flags(c_serve, serve_args.reward);
    add_endpoint_flags(c_serve, serve_args.judge, "judge", false);
    c_serve->add_option("--seed", serve_args.seed, "Base seed mixed with example ids")->capture_default_str();
    c_serve->add_option("--max-batch", serve_args.max_batch, "Largest accepted batch")->capture_default_str();
    c_serve->add_option("--context-tokens", serve_args.context_tokens, "Paper context cut for the judge")
        ->capture_default_str();

    std::string manifest_path;
    CLI::App* c_replay = nullptr;
    if (allow_replay) {
        c_replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
        c_replay->add_option("manifest", manifest_path, "Manifest JSON")->required();
    }

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        if (c_replay && c_replay->parsed()) return replay(manifest_path);
        if (c_retrieve->parsed()) return run_retrieve(retrieve, recorded);
        if (c_reward->parsed()) return run_reward(reward, recorded);
        if (c_evaluate->parsed()) return run_evaluate(evaluate, recorded);
        if (c_judge->parsed()) return run_judge_eval(judge_eval, recorded);
        if (c_balance->parsed()) return run_balance(balance, recorded);
        if (c_sample->parsed()) return run_sample_eval(sample, recorded);
        if (c_serve->parsed()) return run_serve(serve_args);
    } catch (const Error& e) {
        fmt::print(stderr, "reviewkit: {}: {}\n", to_string(e.kind()), e.what());
        return kExitRuntime;
    } catch (const std::exception& e) {
        fmt::print(stderr, "reviewkit: {}\n", e.what());
        return kExitRuntime;
    }
    return kExitUsage;
}

} // namespace

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("reviewkit"));
    spdlog::set_pattern("[%l] %v");
    std::vector<std::string> args(argv + 1, argv + argc);
    return dispatch(std::move(args), true);
}

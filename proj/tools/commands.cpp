#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "manifest.hpp"
#include "reviewkit/arxiv.hpp"
#include "reviewkit/data_pipeline.hpp"
#include "reviewkit/error.hpp"
#include "reviewkit/judge.hpp"
#include "reviewkit/metrics.hpp"
#include "reviewkit/parallel.hpp"
#include "reviewkit/prompts.hpp"
#include "reviewkit/retrieval.hpp"
#include "reviewkit/review_parser.hpp"
#include "reviewkit/reward.hpp"
#include "reviewkit/reward_service.hpp"
#include "reviewkit/rng.hpp"
#include "reviewkit/serialization.hpp"

namespace reviewkit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kOutputSchemaVersion = "1";

struct JsonLine {
    std::size_t line = 0;
    json value;
};

std::vector<JsonLine> read_jsonl(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot read " + path.string());
    std::vector<JsonLine> lines;
    std::string text;
    for (std::size_t n = 1; std::getline(in, text); ++n) {
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            lines.push_back({n, json::parse(text)});
        } catch (const json::parse_error& e) {
            fail(ErrorKind::InvalidInput, fmt::format("{}:{}: {}", path.string(), n, e.what()));
        }
        if (!lines.back().value.is_object()) {
            fail(ErrorKind::InvalidInput, fmt::format("{}:{}: expected a JSON object", path.string(), n));
        }
    }
    return lines;
}

std::string with_suffix(const std::string& base, const std::string& suffix) { return base + suffix; }

const PromptTemplates& templates_from(const std::string& dir, std::unique_ptr<PromptTemplates>& holder) {
    if (dir.empty()) return PromptTemplates::builtin();
    holder = std::make_unique<PromptTemplates>(PromptTemplates::load(dir));
    return *holder;
}

json endpoint_json(const EndpointFlags& flags) {
    if (!flags.enabled()) return nullptr;
    return {{"url", flags.url},
            {"model", flags.model},
            {"key_env", flags.key_env},
            {"temperature", flags.temperature},
            {"max_retries", flags.max_retries},
            {"max_in_flight", flags.max_in_flight}};
}

std::string dump_jsonl(const std::vector<json>& rows) {
    std::string out;
    for (const auto& row : rows) {
        out += row.dump();
        out += '\n';
    }
    return out;
}

std::string dataset_jsonl(std::span<const ReviewExample> examples) {
    std::string out;
    for (const auto& e : examples) {
        out += to_record(e).dump();
        out += '\n';
    }
    return out;
}

std::vector<ReviewExample> load_dataset(const std::string& path, const VenueScales* scales = nullptr) {
    IngestResult ingested = ingest_jsonl(path, scales);
    for (const auto& reject : ingested.rejects) {
        spdlog::warn("{}:{}: skipped: {}", path, reject.line, reject.reason);
    }
    return std::move(ingested.examples);
}

json rating_histogram(std::span<const ReviewExample> examples) {
    json hist = json::object();
    for (int b = 1; b <= 10; ++b) hist[std::to_string(b)] = 0;
    for (const auto& e : examples) {
        auto& slot = hist[std::to_string(rating_bin(e.truth.mean_rating))];
        slot = slot.get<int>() + 1;
    }
    return hist;
}

std::string title_from_body(const std::string& body) {
    std::istringstream in(body);
    std::string line;
    while (std::getline(in, line)) {
        const auto start = line.find_first_not_of("# \t");
        if (start == std::string::npos) continue;
        auto end = line.find_last_not_of(" \t\r");
        return line.substr(start, end - start + 1);
    }
    return {};
}

} // namespace

EndpointConfig EndpointFlags::to_config() const {
    EndpointConfig config;
    config.base_url = url;
    config.model_name = model;
    config.api_key_env = key_env;
    config.temperature = temperature;
    config.max_retries = max_retries;
    config.timeout = std::chrono::seconds(timeout_s);
    config.max_in_flight = max_in_flight;
    config.initial_backoff = std::chrono::milliseconds(backoff_ms);
    config.validate();
    return config;
}

int run_retrieve(const RetrieveArgs& args, const std::vector<std::string>& argv) {
    if (!fs::is_regular_file(args.paper)) fail(ErrorKind::Io, "paper file not found: " + args.paper);
    PaperDocument paper;
    paper.body = read_file(args.paper);
    paper.id = args.paper_id.empty() ? fs::path(args.paper).stem().string() : args.paper_id;
    paper.title = args.title.empty() ? title_from_body(paper.body) : args.title;

    std::unique_ptr<PromptTemplates> holder;
    const auto& templates = templates_from(args.templates_dir, holder);
    HttpChatClient llm(args.llm.to_config());
    ArxivConfig arxiv_config;
    arxiv_config.base_url = args.arxiv_url;
    arxiv_config.min_interval = std::chrono::milliseconds(args.arxiv_interval_ms);
    ArxivClient arxiv(arxiv_config);

    const RetrievalRun run = run_retrieval(paper, llm, arxiv, args.max_results, templates);

    json out = {{"schema_version", kOutputSchemaVersion},
                {"paper_id", paper.id},
                {"title", paper.title},
                {"queries", run.queries},
                {"context", run.context}};
    const std::string json_path = with_suffix(args.out, ".context.json");
    const std::string text_path = with_suffix(args.out, ".context.txt");
    write_file_atomic(json_path, out.dump(2) + "\n");
    write_file_atomic(text_path, run.rendered);

    Manifest manifest{"retrieve", argv, json::object(), {json_path, text_path}};
    manifest.parameters = {{"paper", args.paper},
                           {"paper_id", paper.id},
                           {"llm", endpoint_json(args.llm)},
                           {"arxiv_url", args.arxiv_url},
                           {"arxiv_interval_ms", args.arxiv_interval_ms},
                           {"max_results", args.max_results}};
    write_manifest(with_suffix(args.out, ".manifest.json"), manifest);
    fmt::print("wrote {} and {}\n", json_path, text_path);
    return 0;
}

int run_reward(const RewardArgs& args, const std::vector<std::string>& argv) {
    args.reward.validate();
    std::optional<VenueScales> scales;
    if (!args.venue_scales.empty()) scales = VenueScales::load(args.venue_scales);
    const auto dataset = load_dataset(args.dataset, scales ? &*scales : nullptr);
    std::map<std::string, const ReviewExample*> by_id;
    for (const auto& e : dataset) by_id.emplace(e.paper.id, &e);

    struct Job {
        std::string example_id;
        const ReviewExample* example;
        std::string review;
    };
    std::vector<Job> jobs;
    std::vector<std::string> unjoined;
    std::size_t invalid = 0;
    std::map<std::string, int> seen;
    for (const auto& [line, row] : read_jsonl(args.generated)) {
        if (!row.contains("paper_id") || !row["paper_id"].is_string() || !row.contains("review") ||
            !row["review"].is_string()) {
            spdlog::warn("{}:{}: needs string fields 'paper_id' and 'review'", args.generated, line);
            ++invalid;
            continue;
        }
        const auto paper_id = row["paper_id"].get<std::string>();
        const auto it = by_id.find(paper_id);
        if (it == by_id.end()) {
            spdlog::warn("{}:{}: no dataset record for paper_id '{}'", args.generated, line, paper_id);
            unjoined.push_back(paper_id);
            continue;
        }
        std::string example_id;
        if (row.contains("rollout_id") && row["rollout_id"].is_string()) {
            example_id = row["rollout_id"].get<std::string>();
        } else {
            const int k = seen[paper_id]++;
            example_id = k == 0 ? paper_id : fmt::format("{}#{}", paper_id, k);
        }
        jobs.push_back({std::move(example_id), it->second, row["review"].get<std::string>()});
    }
    if (jobs.empty()) {
        fail(ErrorKind::InvalidInput,
             fmt::format("no generated review joins the dataset ({} unjoined, {} invalid)", unjoined.size(), invalid));
    }

    std::unique_ptr<PromptTemplates> holder;
    const auto& templates = templates_from(args.templates_dir, holder);
    std::unique_ptr<HttpChatClient> judge;
    if (args.judge.enabled()) judge = std::make_unique<HttpChatClient>(args.judge.to_config());
    PairwiseOptions pairwise;
    pairwise.context_token_limit = args.context_tokens;

    std::vector<json> rows(jobs.size());
    std::vector<RewardResult> results(jobs.size());
    std::vector<bool> judge_failed(jobs.size(), false);
    parallel_for(jobs.size(), judge ? static_cast<std::size_t>(judge->max_in_flight()) : 1, [&](std::size_t i) {
        const Job& job = jobs[i];
        const ReviewExample& ex = *job.example;
        std::optional<int> outcome;
        json row = {{"example_id", job.example_id}, {"paper_id", ex.paper.id}};
        if (judge) {
            try {
                const std::string context = ex.paper.title.empty() ? ex.paper.body
                                                                   : ex.paper.title + "\n\n" + ex.paper.body;
                const auto verdict = compare_reviews(context, job.review, ex.truth.reference_review, *judge,
                                                     derive_seed(args.seed, job.example_id), pairwise, templates);
                outcome = verdict.r_judge();
                row["presented_order"] = to_string(verdict.presented_order);
            } catch (const Error& e) {
                spdlog::warn("judge unavailable for {}: {}", job.example_id, e.what());
                judge_failed[i] = true;
                row["judge_error"] = to_string(e.kind());
            }
        }
        results[i] = score_generated_review(ex.truth.mean_rating, job.review, outcome, args.reward);
        const auto& b = results[i].breakdown;
        row["truth"] = ex.truth.mean_rating;
        row["extracted_rating"] = results[i].parsed.rating ? json(*results[i].parsed.rating) : json(nullptr);
        row["missing_sections"] = results[i].missing.labels();
        row["r_rc"] = b.r_rc;
        row["r_f"] = b.r_f;
        row["r_rule"] = b.r_rule;
        if (b.r_judge) row["r_judge"] = *b.r_judge;
        row["r_final"] = b.r_final;
        rows[i] = std::move(row);
    });

    double sum_rc = 0, sum_f = 0, sum_rule = 0, sum_judge = 0, sum_final = 0;
    std::size_t judged = 0;
    json section_hist = json::object();
    for (Section s : kAllSections) section_hist[std::string(to_string(s))] = 0;
    std::array<int, 5> count_hist{};
    for (const auto& r : results) {
        const auto& b = r.breakdown;
        sum_rc += b.r_rc;
        sum_f += b.r_f;
        sum_rule += b.r_rule;
        sum_final += b.r_final;
        if (b.r_judge) {
            sum_judge += *b.r_judge;
            ++judged;
        }
        for (const auto& label : r.missing.labels()) section_hist[label] = section_hist[label].get<int>() + 1;
        ++count_hist[r.missing.size()];
    }
    const double n = static_cast<double>(results.size());
    json means = {{"r_rc", sum_rc / n}, {"r_f", sum_f / n}, {"r_rule", sum_rule / n}, {"r_final", sum_final / n}};
    if (judged > 0) means["r_judge"] = sum_judge / static_cast<double>(judged);
    json count_json = json::object();
    for (std::size_t k = 0; k < count_hist.size(); ++k) count_json[std::to_string(k)] = count_hist[k];
    const auto failures = static_cast<std::size_t>(std::count(judge_failed.begin(), judge_failed.end(), true));
    json summary = {{"schema_version", kOutputSchemaVersion},
                    {"config", args.reward},
                    {"judge", judge ? "enabled" : "disabled"},
                    {"n_joined", jobs.size()},
                    {"n_unjoined", unjoined.size()},
                    {"unjoined_ids", unjoined},
                    {"n_invalid_lines", invalid},
                    {"n_judge_unavailable", failures},
                    {"means", means},
                    {"missing_section_histogram", section_hist},
                    {"missing_count_histogram", count_json}};

    const std::string summary_path = args.summary.empty() ? with_suffix(args.out, ".summary.json") : args.summary;
    write_file_atomic(args.out, dump_jsonl(rows));
    write_file_atomic(summary_path, summary.dump(2) + "\n");

    Manifest manifest{"reward", argv, json::object(), {args.out, summary_path}};
    manifest.parameters = {{"dataset", args.dataset},
                           {"generated", args.generated},
                           {"config", args.reward},
                           {"seed", args.seed},
                           {"context_tokens", args.context_tokens},
                           {"judge", endpoint_json(args.judge)}};
    write_manifest(with_suffix(args.out, ".manifest.json"), manifest);
    fmt::print("scored {} reviews ({} unjoined) -> {}\n", jobs.size(), unjoined.size(), args.out);
    return 0;
}

int run_evaluate(const EvaluateArgs& args, const std::vector<std::string>& argv) {
    const PairPolicy policy = PairPolicy::parse(args.pairs);
    std::vector<RunRecord> records;
    for (const auto& [line, row] : read_jsonl(args.predictions)) {
        RunRecord record;
        if (!row.contains("truth") || !row["truth"].is_number()) {
            fail(ErrorKind::InvalidInput, fmt::format("{}:{}: 'truth' must be a number", args.predictions, line));
        }
        record.truth = row["truth"].get<double>();
        if (row.contains("predicted") && row["predicted"].is_number()) {
            record.predicted = row["predicted"].get<double>();
        } else if (row.contains("review") && row["review"].is_string()) {
            record.predicted = extract_rating(row["review"].get<std::string>());
        } else if (row.contains("predicted") && !row["predicted"].is_null()) {
            fail(ErrorKind::InvalidInput,
                 fmt::format("{}:{}: 'predicted' must be a number or null", args.predictions, line));
        }
        records.push_back(record);
    }
    const MetricsReport report = evaluate_run(records, policy);
    const std::string json_path = with_suffix(args.out, ".json");
    const std::string text_path = with_suffix(args.out, ".txt");
    write_file_atomic(json_path, report.to_json().dump(2) + "\n");
    write_file_atomic(text_path, report.to_table());

    Manifest manifest{"evaluate", argv, json::object(), {json_path, text_path}};
    manifest.parameters = {{"predictions", args.predictions},
                           {"pairs", args.pairs},
                           {"resolved_pairs", policy.resolve(records.size()).describe()}};
    write_manifest(with_suffix(args.out, ".manifest.json"), manifest);
    fmt::print("{}", report.to_table());
    return 0;
}

int run_judge_eval(const JudgeEvalArgs& args, const std::vector<std::string>& argv) {
    struct Item {
        std::string id;
        std::string paper;
        std::string review;
    };
    std::vector<Item> items;
    for (const auto& [line, row] : read_jsonl(args.input)) {
        if (!row.contains("paper") || !row["paper"].is_string() || !row.contains("review") ||
            !row["review"].is_string()) {
            fail(ErrorKind::InvalidInput, fmt::format("{}:{}: needs string fields 'paper' and 'review'", args.input, line));
        }
        std::string id = row.value("paper_id", fmt::format("line{}", line));
        items.push_back({std::move(id), row["paper"].get<std::string>(), row["review"].get<std::string>()});
    }
    if (items.empty()) fail(ErrorKind::InvalidInput, "no reviews to score in " + args.input);

    std::unique_ptr<PromptTemplates> holder;
    const auto& templates = templates_from(args.templates_dir, holder);
    HttpChatClient judge(args.judge.to_config());
    std::vector<DimensionScores> scores(items.size());
    parallel_for(items.size(), static_cast<std::size_t>(judge.max_in_flight()), [&](std::size_t i) {
        scores[i] = score_review_dimensions(items[i].paper, items[i].review, judge, templates);
    });

    std::array<double, kDimensionCount> sums{};
    std::array<std::size_t, kDimensionCount> counts{};
    json reviews = json::array();
    std::size_t complete = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        json row_scores = json::object();
        json gaps = json::object();
        for (std::size_t d = 0; d < kDimensionCount; ++d) {
            const std::string k(key(kDimensions[d]));
            if (scores[i].scores[d]) {
                row_scores[k] = *scores[i].scores[d];
                sums[d] += *scores[i].scores[d];
                ++counts[d];
            } else {
                row_scores[k] = nullptr;
                gaps[k] = scores[i].errors[d];
            }
        }
        if (scores[i].complete()) ++complete;
        reviews.push_back({{"paper_id", items[i].id}, {"scores", row_scores}, {"gaps", gaps}});
    }
    json means = json::object();
    json dims = json::array();
    for (std::size_t d = 0; d < kDimensionCount; ++d) {
        const std::string k(key(kDimensions[d]));
        dims.push_back({{"key", k}, {"name", display_name(kDimensions[d])}});
        means[k] = counts[d] ? json(sums[d] / static_cast<double>(counts[d])) : json(nullptr);
    }
    json report = {{"schema_version", kOutputSchemaVersion},
                   {"n_reviews", items.size()},
                   {"n_complete", complete},
                   {"dimensions", dims},
                   {"means", means},
                   {"reviews", reviews}};

    std::string table = "| Review |";
    std::string rule = "|---|";
    for (auto d : kDimensions) {
        table += fmt::format(" {} |", display_name(d));
        rule += "---|";
    }
    table += "\n" + rule + "\n";
    auto cell = [](const std::optional<double>& v, int precision) {
        return v ? fmt::format(" {:.{}f} |", *v, precision) : std::string(" - |");
    };
    for (std::size_t i = 0; i < items.size(); ++i) {
        table += fmt::format("| {} |", items[i].id);
        for (std::size_t d = 0; d < kDimensionCount; ++d) {
            const auto& s = scores[i].scores[d];
            table += cell(s ? std::optional<double>(*s) : std::nullopt, 0);
        }
        table += "\n";
    }
    table += "| Mean |";
    for (std::size_t d = 0; d < kDimensionCount; ++d) {
        table += cell(counts[d] ? std::optional<double>(sums[d] / static_cast<double>(counts[d])) : std::nullopt, 2);
    }
    table += "\n";

    const std::string json_path = with_suffix(args.out, ".json");
    const std::string text_path = with_suffix(args.out, ".txt");
    write_file_atomic(json_path, report.dump(2) + "\n");
    write_file_atomic(text_path, table);
    Manifest manifest{"judge-eval", argv, json::object(), {json_path, text_path}};
    manifest.parameters = {{"input", args.input}, {"judge", endpoint_json(args.judge)}};
    write_manifest(with_suffix(args.out, ".manifest.json"), manifest);
    fmt::print("{}", table);
    if (complete != items.size()) {
        spdlog::warn("{} of {} reviews have missing dimension scores", items.size() - complete, items.size());
    }
    return 0;
}

int run_balance(const BalanceArgs& args, const std::vector<std::string>& argv) {
    const auto dataset = load_dataset(args.dataset);
    const BalanceParams params{args.mid_cap_fraction, args.extreme_boost, args.seed};
    const auto balanced = balance_dataset(dataset, params);
    write_file_atomic(args.out, dataset_jsonl(balanced));

    Manifest manifest{"balance", argv, json::object(), {args.out}};
    manifest.parameters = {{"dataset", args.dataset},
                           {"mid_cap_fraction", args.mid_cap_fraction},
                           {"extreme_boost", args.extreme_boost},
                           {"seed", args.seed},
                           {"n_in", dataset.size()},
                           {"n_out", balanced.size()},
                           {"histogram_in", rating_histogram(dataset)},
                           {"histogram_out", rating_histogram(balanced)}};
    write_manifest(with_suffix(args.out, ".manifest.json"), manifest);
    fmt::print("balanced {} -> {} examples -> {}\n", dataset.size(), balanced.size(), args.out);
    return 0;
}

int run_sample_eval(const SampleEvalArgs& args, const std::vector<std::string>& argv) {
    const auto pool = load_dataset(args.dataset);
    const auto sample = sample_uniform_eval_set(pool, args.n, args.bins, args.seed);
    write_file_atomic(args.out, dataset_jsonl(sample));

    std::vector<std::size_t> per_bin(args.bins, 0);
    for (const auto& e : sample) ++per_bin[uniform_bin(e.truth.mean_rating, args.bins)];
    Manifest manifest{"sample-eval", argv, json::object(), {args.out}};
    manifest.parameters = {{"dataset", args.dataset},
                           {"n", args.n},
                           {"bins", args.bins},
                           {"seed", args.seed},
                           {"pool_size", pool.size()},
                           {"n_out", sample.size()},
                           {"per_bin", per_bin}};
    write_manifest(with_suffix(args.out, ".manifest.json"), manifest);
    fmt::print("sampled {} of {} examples -> {}\n", sample.size(), pool.size(), args.out);
    return 0;
}

int run_serve(const ServeArgs& args) {
    args.reward.validate();
    ServiceConfig config;
    config.reward = args.reward;
    config.seed = args.seed;
    config.max_batch = args.max_batch;
    config.pairwise.context_token_limit = args.context_tokens;
    std::shared_ptr<ChatClient> judge;
    if (args.judge.enabled()) judge = std::make_shared<HttpChatClient>(args.judge.to_config());
    const RewardService service(config, judge);
    return serve(service, args.host, args.port);
}

} // namespace reviewkit::cli

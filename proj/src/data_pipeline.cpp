#include "reviewkit/data_pipeline.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "reviewkit/error.hpp"
#include "reviewkit/review_parser.hpp"
#include "reviewkit/rng.hpp"
#include "reviewkit/serialization.hpp"

namespace reviewkit {

namespace {

// ceil() that ignores floating-point noise such as 1.1 * 10 = 11.000000000000002.
std::size_t ceil_count(double x) {
    return static_cast<std::size_t>(std::ceil(x - 1e-9));
}

} // namespace

double normalize_rating(double score, RatingScale scale) {
    if (!(scale.max > scale.min)) {
        fail(ErrorKind::InvalidInput, fmt::format("invalid scale [{}, {}]", scale.min, scale.max));
    }
    if (!(score >= scale.min && score <= scale.max)) {
        fail(ErrorKind::InvalidInput,
             fmt::format("score {} is outside the scale [{}, {}]", score, scale.min, scale.max));
    }
    return 1.0 + 9.0 * (score - scale.min) / (scale.max - scale.min);
}

VenueScales VenueScales::defaults() {
    VenueScales v;
    v.set(Venue::ICLR, {1.0, 10.0});
    v.set(Venue::NeurIPS, {1.0, 10.0});
    v.set(Venue::ARR, {1.0, 5.0});
    v.set(Venue::ACL, {1.0, 5.0});
    v.set(Venue::COLING, {1.0, 5.0});
    v.set(Venue::CONLL, {1.0, 5.0});
    return v;
}

VenueScales VenueScales::from_json_text(const std::string& text) {
    VenueScales v;
    try {
        const auto j = json::parse(text);
        for (const auto& [label, range] : j.items()) {
            const Venue venue = parse_venue(label);
            if (venue == Venue::Other && label != "other") {
                spdlog::warn("venue scale registry: '{}' is not a known venue, stored as 'other'", label);
            }
            RatingScale scale{range.at("min").get<double>(), range.at("max").get<double>()};
            if (!(scale.max > scale.min)) {
                fail(ErrorKind::InvalidConfig, fmt::format("venue {}: max must exceed min", label));
            }
            v.set(venue, scale);
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::InvalidConfig, fmt::format("venue scale registry: {}", e.what()));
    }
    return v;
}

VenueScales VenueScales::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot read venue scale registry " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

std::optional<RatingScale> VenueScales::find(Venue venue) const {
    const auto it = scales_.find(venue);
    if (it == scales_.end()) return std::nullopt;
    return it->second;
}

void VenueScales::set(Venue venue, RatingScale scale) { scales_[venue] = scale; }

double aggregate_ground_truth(std::span<const double> normalized_scores) {
    if (normalized_scores.empty()) fail(ErrorKind::InvalidInput, "no reviewer scores to aggregate");
    double sum = 0.0;
    for (double s : normalized_scores) sum += s;
    return sum / static_cast<double>(normalized_scores.size());
}

GroundTruth make_ground_truth(std::vector<double> reviewer_scores, RatingScale scale,
                              std::string reference_review) {
    std::vector<double> normalized;
    for (double s : reviewer_scores) normalized.push_back(normalize_rating(s, scale));
    GroundTruth truth;
    truth.mean_rating = aggregate_ground_truth(normalized);
    truth.reviewer_scores = std::move(reviewer_scores);
    truth.reference_review = std::move(reference_review);
    return truth;
}

int rating_bin(double rating) {
    if (!std::isfinite(rating)) fail(ErrorKind::InvalidInput, "rating must be finite");
    return std::clamp(static_cast<int>(std::floor(rating + 0.5)), 1, 10);
}

std::vector<std::size_t> balance_indices(std::span<const double> ratings, const BalanceParams& params) {
    if (!(params.mid_cap_fraction > 0.0 && params.mid_cap_fraction <= 1.0)) {
        fail(ErrorKind::InvalidConfig,
             fmt::format("mid_cap_fraction must be in (0, 1], got {}", params.mid_cap_fraction));
    }
    if (!(params.extreme_boost >= 1.0) || !std::isfinite(params.extreme_boost)) {
        fail(ErrorKind::InvalidConfig,
             fmt::format("extreme_boost must be >= 1, got {}", params.extreme_boost));
    }
    std::array<std::vector<std::size_t>, 11> by_bin;
    for (std::size_t i = 0; i < ratings.size(); ++i) by_bin[rating_bin(ratings[i])].push_back(i);

    Rng rng(params.seed);
    std::vector<std::size_t> out;
    for (int bin = 1; bin <= 10; ++bin) {
        auto& members = by_bin[bin];
        if (members.empty()) continue;
        if (bin == 5 || bin == 6) {
            const std::size_t keep = std::min(members.size(), ceil_count(params.mid_cap_fraction * members.size()));
            // Partial Fisher-Yates: the first `keep` slots are a uniform sample.
            for (std::size_t i = 0; i < keep; ++i) {
                const auto j = i + uniform_index(rng, members.size() - i);
                std::swap(members[i], members[j]);
                out.push_back(members[i]);
            }
        } else if (bin <= 3 || bin >= 8) {
            const std::size_t target = ceil_count(params.extreme_boost * members.size());
            out.insert(out.end(), members.begin(), members.end());
            for (std::size_t k = members.size(); k < target; ++k) {
                out.push_back(members[uniform_index(rng, members.size())]);
            }
        } else {
            out.insert(out.end(), members.begin(), members.end());
        }
    }
    shuffle_in_place(std::span<std::size_t>(out), rng);
    return out;
}

std::vector<ReviewExample> balance_dataset(std::span<const ReviewExample> examples,
                                           const BalanceParams& params) {
    std::vector<double> ratings;
    for (const auto& e : examples) ratings.push_back(e.truth.mean_rating);
    std::vector<ReviewExample> out;
    for (std::size_t i : balance_indices(ratings, params)) out.push_back(examples[i]);
    return out;
}

std::size_t uniform_bin(double rating, std::size_t bins) {
    if (!(rating >= 1.0 && rating <= 10.0)) {
        fail(ErrorKind::InvalidInput, fmt::format("rating {} is outside [1, 10]", rating));
    }
    const double width = 9.0 / static_cast<double>(bins);
    return std::min(bins - 1, static_cast<std::size_t>((rating - 1.0) / width));
}

std::vector<std::size_t> sample_uniform_indices(std::span<const double> ratings, std::size_t n,
                                                std::size_t bins, std::uint64_t seed) {
    if (bins < 2) fail(ErrorKind::InvalidInput, fmt::format("bins must be >= 2, got {}", bins));
    if (n > ratings.size()) {
        fail(ErrorKind::InvalidInput,
             fmt::format("cannot sample {} papers from a pool of {}", n, ratings.size()));
    }
    std::vector<std::vector<std::size_t>> members(bins);
    for (std::size_t i = 0; i < ratings.size(); ++i) members[uniform_bin(ratings[i], bins)].push_back(i);

    std::vector<std::size_t> take(bins);
    std::size_t deficit = 0;
    for (std::size_t b = 0; b < bins; ++b) {
        const std::size_t quota = n / bins + (b < n % bins ? 1 : 0);
        take[b] = std::min(quota, members[b].size());
        deficit += quota - take[b];
    }
    for (std::size_t b = 0; deficit > 0; b = (b + 1) % bins) {
        if (take[b] < members[b].size()) {
            ++take[b];
            --deficit;
        }
    }

    Rng rng(seed);
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < bins; ++b) {
        auto& m = members[b];
        for (std::size_t i = 0; i < take[b]; ++i) {
            const auto j = i + uniform_index(rng, m.size() - i);
            std::swap(m[i], m[j]);
            out.push_back(m[i]);
        }
    }
    return out;
}

std::vector<ReviewExample> sample_uniform_eval_set(std::span<const ReviewExample> pool, std::size_t n,
                                                   std::size_t bins, std::uint64_t seed) {
    std::vector<double> ratings;
    for (const auto& e : pool) ratings.push_back(e.truth.mean_rating);
    std::vector<ReviewExample> out;
    for (std::size_t i : sample_uniform_indices(ratings, n, bins, seed)) out.push_back(pool[i]);
    return out;
}

std::string synthesize_reference_review(std::span<const std::string> human_reviews, ChatClient& llm,
                                        const PromptTemplates& templates) {
    if (human_reviews.empty()) fail(ErrorKind::InvalidInput, "need at least one human review");
    std::string reviews;
    for (std::size_t i = 0; i < human_reviews.size(); ++i) {
        if (i > 0) reviews += "\n\n";
        reviews += fmt::format("Review {}:\n{}", i + 1, human_reviews[i]);
    }
    const std::vector<ChatMessage> messages = {
        {"user", render(templates.reference_synthesis,
                        {{"count", std::to_string(human_reviews.size())}, {"reviews", reviews}})}};
    std::string reply;
    for (int attempt = 0; attempt <= llm.max_retries(); ++attempt) {
        reply = llm.complete(messages);
        SectionSet missing = missing_sections(parse_review(reply));
        if (!missing.contains(Section::Summary) && !missing.contains(Section::Strengths) &&
            !missing.contains(Section::Weaknesses)) {
            return reply;
        }
        spdlog::debug("synthesized review missing sections (attempt {})", attempt + 1);
    }
    fail(ErrorKind::SynthesisFailed,
         fmt::format("no well-formed merged review after {} attempts", llm.max_retries() + 1));
}

IngestResult ingest_jsonl(const std::filesystem::path& path, const VenueScales* scales) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IngestionFailed, "cannot open " + path.string());
    IngestResult result;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            ReviewExample ex = from_record(json::parse(line));
            if (scales != nullptr) {
                if (auto scale = scales->find(ex.paper.venue)) {
                    const auto expected = make_ground_truth(ex.truth.reviewer_scores, *scale, "").mean_rating;
                    if (std::abs(expected - ex.truth.mean_rating) > 1e-9) {
                        fail(ErrorKind::InvalidInput,
                             fmt::format("mean_rating {} does not match normalized reviewer mean {}",
                                         ex.truth.mean_rating, expected));
                    }
                }
            }
            if (!ids.insert(ex.paper.id).second) {
                fail(ErrorKind::InvalidInput, fmt::format("duplicate paper_id '{}'", ex.paper.id));
            }
            result.examples.push_back(std::move(ex));
        } catch (const json::exception& e) {
            result.rejects.push_back({line_no, fmt::format("invalid JSON: {}", e.what())});
        } catch (const Error& e) {
            result.rejects.push_back({line_no, e.what()});
        }
    }
    for (const auto& r : result.rejects) {
        spdlog::warn("{}:{}: rejected: {}", path.string(), r.line, r.reason);
    }
    if (result.examples.empty()) {
        fail(ErrorKind::IngestionFailed, fmt::format("{} contains no valid records", path.string()));
    }
    return result;
}

void write_jsonl(const std::filesystem::path& path, std::span<const ReviewExample> examples) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    for (const auto& e : examples) out << to_record(e).dump() << '\n';
    if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

} // namespace reviewkit

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reviewkit/chat_client.hpp"
#include "reviewkit/prompts.hpp"
#include "reviewkit/types.hpp"

namespace reviewkit {

struct RatingScale {
    double min = 1.0;
    double max = 10.0;

    bool operator==(const RatingScale&) const = default;
};

/// Affine map of [scale.min, scale.max] onto [1, 10].
double normalize_rating(double score, RatingScale scale);

/// Per-venue reviewer score ranges, loaded from a JSON object such as
/// {"ICLR": {"min": 1, "max": 10}, "ARR": {"min": 1, "max": 5}}.
class VenueScales {
public:
    static VenueScales defaults();
    static VenueScales load(const std::filesystem::path& path);
    static VenueScales from_json_text(const std::string& text);

    std::optional<RatingScale> find(Venue venue) const;
    void set(Venue venue, RatingScale scale);

private:
    std::map<Venue, RatingScale> scales_;
};

/// Arithmetic mean of already-normalized reviewer ratings.
double aggregate_ground_truth(std::span<const double> normalized_scores);

/// Normalizes raw venue-scale scores and averages them.
GroundTruth make_ground_truth(std::vector<double> reviewer_scores, RatingScale scale,
                              std::string reference_review);

/// Round-half-up bin of a mean rating (1..10).
int rating_bin(double rating);

struct BalanceParams {
    /// Bins 5 and 6 keep ceil(fraction * size) examples, drawn without replacement.
    double mid_cap_fraction = 0.5;
    /// Bins <= 3 and >= 8 grow to ceil(boost * size) by drawing extra copies with replacement.
    double extreme_boost = 2.0;
    std::uint64_t seed = 0;
};

/// Indices into `ratings` forming the balanced, shuffled selection.
std::vector<std::size_t> balance_indices(std::span<const double> ratings, const BalanceParams& params);

std::vector<ReviewExample> balance_dataset(std::span<const ReviewExample> examples,
                                           const BalanceParams& params);

/// Bin index of a rating when [1, 10] is cut into `bins` equal-width bins.
std::size_t uniform_bin(double rating, std::size_t bins);

/// Indices of an evaluation sample that is close to uniform over rating bins:
/// floor(n / bins) per bin with the remainder given to the lowest bins, and
/// any shortfall handed round-robin to bins that still have candidates.
/// Output is grouped by bin.
std::vector<std::size_t> sample_uniform_indices(std::span<const double> ratings, std::size_t n,
                                                std::size_t bins, std::uint64_t seed);

std::vector<ReviewExample> sample_uniform_eval_set(std::span<const ReviewExample> pool, std::size_t n,
                                                   std::size_t bins, std::uint64_t seed);

/// Merges several human reviews into one Summary/Strengths/Weaknesses review.
/// Replies missing any of those sections are re-asked, then SynthesisFailed.
std::string synthesize_reference_review(std::span<const std::string> human_reviews, ChatClient& llm,
                                        const PromptTemplates& templates = PromptTemplates::builtin());

struct IngestReject {
    std::size_t line = 0;
    std::string reason;
};

struct IngestResult {
    std::vector<ReviewExample> examples;
    std::vector<IngestReject> rejects;
};

/// Reads one dataset record per line. Bad lines are reported and skipped;
/// blank lines are ignored. When `scales` knows the venue, mean_rating must
/// equal the mean of the normalized reviewer scores within 1e-9. Throws
/// IngestionFailed when no line is valid.
IngestResult ingest_jsonl(const std::filesystem::path& path, const VenueScales* scales = nullptr);

void write_jsonl(const std::filesystem::path& path, std::span<const ReviewExample> examples);

} // namespace reviewkit

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "reviewkit/review_parser.hpp"
#include "reviewkit/types.hpp"

namespace reviewkit {

/// Gaussian kernel exp(-(s - s_hat)^2 / (2 sigma^2)).
double rating_consistency_reward(double s, double s_hat, double sigma);

/// Minus the number of missing structural sections.
int format_reward(const SectionSet& missing);

/// Label-based overload; throws InvalidInput on an unknown label.
int format_reward(std::span<const std::string> missing_labels);

/// clip(alpha * r_rc + beta * r_f, 0, 1).
double rule_reward(double r_rc, int r_f, double alpha, double beta);

/// gamma * r_rule + (1 - gamma) * r_judge, or r_rule when the judge is off.
double final_reward(double r_rule, std::optional<int> r_judge, double gamma);

/// Everything that went into one reward, for diagnostics.
struct RewardResult {
    RewardBreakdown breakdown;
    ParsedReview parsed;
    SectionSet missing;
};

/// Scores a generated review against a ground-truth mean rating. A review
/// without an extractable rating gets r_rc = 0.
RewardResult score_generated_review(double truth_rating, std::string_view generated,
                                    std::optional<int> judge_outcome,
                                    const RewardConfig& config,
                                    const ParseOptions& parse_options = {});

RewardBreakdown compute_reward(const ReviewExample& example, std::string_view generated,
                               std::optional<int> judge_outcome, const RewardConfig& config,
                               const ParseOptions& parse_options = {});

} // namespace reviewkit

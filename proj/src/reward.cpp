#include "reviewkit/reward.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "reviewkit/error.hpp"

namespace reviewkit {

double rating_consistency_reward(double s, double s_hat, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        fail(ErrorKind::InvalidConfig, fmt::format("sigma must be > 0, got {}", sigma));
    }
    if (!std::isfinite(s) || !std::isfinite(s_hat)) {
        fail(ErrorKind::InvalidInput, "ratings must be finite");
    }
    const double d = s - s_hat;
    return std::exp(-(d * d) / (2.0 * sigma * sigma));
}

int format_reward(const SectionSet& missing) { return -static_cast<int>(missing.size()); }

int format_reward(std::span<const std::string> missing_labels) {
    SectionSet set;
    for (const auto& label : missing_labels) {
        auto section = parse_section(label);
        if (!section) fail(ErrorKind::InvalidInput, fmt::format("unknown section '{}'", label));
        set.insert(*section);
    }
    return format_reward(set);
}

double rule_reward(double r_rc, int r_f, double alpha, double beta) {
    if (!(alpha >= 0.0) || !(beta >= 0.0)) {
        fail(ErrorKind::InvalidConfig,
             fmt::format("alpha and beta must be >= 0, got {} and {}", alpha, beta));
    }
    return std::clamp(alpha * r_rc + beta * static_cast<double>(r_f), 0.0, 1.0);
}

double final_reward(double r_rule, std::optional<int> r_judge, double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        fail(ErrorKind::InvalidConfig, fmt::format("gamma must be in [0, 1], got {}", gamma));
    }
    if (!r_judge) return r_rule;
    if (*r_judge != 0 && *r_judge != 1) {
        fail(ErrorKind::InvalidInput, fmt::format("judge outcome must be 0 or 1, got {}", *r_judge));
    }
    return gamma * r_rule + (1.0 - gamma) * static_cast<double>(*r_judge);
}

RewardResult score_generated_review(double truth_rating, std::string_view generated,
                                    std::optional<int> judge_outcome,
                                    const RewardConfig& config,
                                    const ParseOptions& parse_options) {
    config.validate();
    RewardResult result;
    result.parsed = parse_review(generated, parse_options);
    result.missing = missing_sections(result.parsed);

    RewardBreakdown& b = result.breakdown;
    b.r_rc = result.parsed.rating
                 ? rating_consistency_reward(truth_rating, *result.parsed.rating, config.sigma)
                 : 0.0;
    b.r_f = format_reward(result.missing);
    b.r_rule = rule_reward(b.r_rc, b.r_f, config.alpha, config.beta);
    b.r_judge = judge_outcome;
    b.r_final = final_reward(b.r_rule, judge_outcome, config.gamma);
    return result;
}

RewardBreakdown compute_reward(const ReviewExample& example, std::string_view generated,
                               std::optional<int> judge_outcome, const RewardConfig& config,
                               const ParseOptions& parse_options) {
    return score_generated_review(example.truth.mean_rating, generated, judge_outcome, config,
                                  parse_options)
        .breakdown;
}

} // namespace reviewkit

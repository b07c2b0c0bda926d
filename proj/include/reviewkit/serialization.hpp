#pragma once

// JSON mapping for the domain types. ReviewExample uses the flat dataset
// record layout (paper_id, title, body, venue, year, context,
// reviewer_scores, mean_rating, reference_review).

#include <nlohmann/json.hpp>

#include "reviewkit/types.hpp"

namespace reviewkit {

using json = nlohmann::json;

void to_json(json& j, const BibEntry& e);
void from_json(const json& j, BibEntry& e);

void to_json(json& j, const QueryAnswer& qa);
void from_json(const json& j, QueryAnswer& qa);

void to_json(json& j, const RetrievedContext& c);
void from_json(const json& j, RetrievedContext& c);

void to_json(json& j, const ParsedReview& r);
void from_json(const json& j, ParsedReview& r);

void to_json(json& j, const RewardConfig& c);
void from_json(const json& j, RewardConfig& c);

/// r_judge is omitted when absent.
void to_json(json& j, const RewardBreakdown& b);
void from_json(const json& j, RewardBreakdown& b);

void to_json(json& j, const SectionSet& s);
void from_json(const json& j, SectionSet& s);

void to_json(json& j, const QuerySet& q);

json to_record(const ReviewExample& example);
/// Throws InvalidInput naming the offending field. `year` and `context` may be
/// absent.
ReviewExample from_record(const json& record);

/// Partial override: only the keys present in `overrides` replace fields.
RewardConfig apply_overrides(RewardConfig base, const json& overrides);

} // namespace reviewkit

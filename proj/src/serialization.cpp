#include "reviewkit/serialization.hpp"

#include <fmt/format.h>

#include "reviewkit/error.hpp"

namespace reviewkit {

namespace {

template <typename T>
T required(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        fail(ErrorKind::InvalidInput, fmt::format("missing field '{}'", key));
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(ErrorKind::InvalidInput, fmt::format("field '{}': {}", key, e.what()));
    }
}

template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& out) {
    if (j.contains(key) && !j.at(key).is_null()) {
        out = j.at(key).get<T>();
    } else {
        out.reset();
    }
}

} // namespace

void to_json(json& j, const BibEntry& e) {
    j = json{{"arxiv_id", e.arxiv_id}, {"title", e.title},       {"authors", e.authors},
             {"abstract", e.abstract}, {"url", e.url}, {"excerpts", e.excerpts}};
}

void from_json(const json& j, BibEntry& e) {
    e.arxiv_id = required<std::string>(j, "arxiv_id");
    e.title = required<std::string>(j, "title");
    e.authors = j.value("authors", std::vector<std::string>{});
    e.abstract = j.value("abstract", std::string{});
    e.url = j.value("url", std::string{});
    e.excerpts = j.value("excerpts", std::vector<std::string>{});
}

void to_json(json& j, const QueryAnswer& qa) {
    j = json{{"query", qa.query}, {"answer", qa.answer}, {"sources", qa.sources}};
}

void from_json(const json& j, QueryAnswer& qa) {
    qa.query = required<std::string>(j, "query");
    qa.answer = required<std::string>(j, "answer");
    qa.sources = j.value("sources", std::vector<BibEntry>{});
}

void to_json(json& j, const RetrievedContext& c) {
    j = json{{"query_answers", c.query_answers}};
}

void from_json(const json& j, RetrievedContext& c) {
    c.query_answers = required<std::vector<QueryAnswer>>(j, "query_answers");
}

void to_json(json& j, const ParsedReview& r) {
    j = json::object();
    j["thinking"] = r.thinking ? json(*r.thinking) : json(nullptr);
    j["summary"] = r.summary ? json(*r.summary) : json(nullptr);
    j["strengths"] = r.strengths ? json(*r.strengths) : json(nullptr);
    j["weaknesses"] = r.weaknesses ? json(*r.weaknesses) : json(nullptr);
    j["rating"] = r.rating ? json(*r.rating) : json(nullptr);
    j["raw"] = r.raw;
}

void from_json(const json& j, ParsedReview& r) {
    read_optional(j, "thinking", r.thinking);
    read_optional(j, "summary", r.summary);
    read_optional(j, "strengths", r.strengths);
    read_optional(j, "weaknesses", r.weaknesses);
    read_optional(j, "rating", r.rating);
    r.raw = required<std::string>(j, "raw");
}

void to_json(json& j, const RewardConfig& c) {
    j = json{{"sigma", c.sigma}, {"alpha", c.alpha}, {"beta", c.beta}, {"gamma", c.gamma}};
}

void from_json(const json& j, RewardConfig& c) {
    c = apply_overrides(RewardConfig{}, j);
}

RewardConfig apply_overrides(RewardConfig base, const json& overrides) {
    if (overrides.is_null()) return base;
    if (!overrides.is_object()) {
        fail(ErrorKind::InvalidConfig, "reward config overrides must be an object");
    }
    for (const auto& [key, value] : overrides.items()) {
        if (!value.is_number()) {
            fail(ErrorKind::InvalidConfig, fmt::format("config field '{}' must be a number", key));
        }
        const double v = value.get<double>();
        if (key == "sigma") base.sigma = v;
        else if (key == "alpha") base.alpha = v;
        else if (key == "beta") base.beta = v;
        else if (key == "gamma") base.gamma = v;
        else fail(ErrorKind::InvalidConfig, fmt::format("unknown config field '{}'", key));
    }
    return base;
}

void to_json(json& j, const RewardBreakdown& b) {
    j = json{{"r_rc", b.r_rc}, {"r_f", b.r_f}, {"r_rule", b.r_rule}};
    if (b.r_judge) j["r_judge"] = *b.r_judge;
    j["r_final"] = b.r_final;
}

void from_json(const json& j, RewardBreakdown& b) {
    b.r_rc = required<double>(j, "r_rc");
    b.r_f = required<int>(j, "r_f");
    b.r_rule = required<double>(j, "r_rule");
    read_optional(j, "r_judge", b.r_judge);
    b.r_final = required<double>(j, "r_final");
}

void to_json(json& j, const SectionSet& s) { j = s.labels(); }

void from_json(const json& j, SectionSet& s) {
    s = SectionSet{};
    for (const auto& label : j.get<std::vector<std::string>>()) {
        auto section = parse_section(label);
        if (!section) fail(ErrorKind::InvalidInput, fmt::format("unknown section '{}'", label));
        s.insert(*section);
    }
}

void to_json(json& j, const QuerySet& q) { j = q.queries(); }

json to_record(const ReviewExample& example) {
    return json{{"paper_id", example.paper.id},
                {"title", example.paper.title},
                {"body", example.paper.body},
                {"venue", std::string(to_string(example.paper.venue))},
                {"year", example.paper.year},
                {"context", example.context},
                {"reviewer_scores", example.truth.reviewer_scores},
                {"mean_rating", example.truth.mean_rating},
                {"reference_review", example.truth.reference_review}};
}

ReviewExample from_record(const json& record) {
    if (!record.is_object()) fail(ErrorKind::InvalidInput, "record is not a JSON object");
    ReviewExample ex;
    ex.paper.id = required<std::string>(record, "paper_id");
    ex.paper.title = required<std::string>(record, "title");
    ex.paper.body = required<std::string>(record, "body");
    ex.paper.venue = parse_venue(required<std::string>(record, "venue"));
    if (record.contains("year") && !record["year"].is_null()) ex.paper.year = required<int>(record, "year");
    if (record.contains("context") && !record["context"].is_null()) {
        try {
            ex.context = required<RetrievedContext>(record, "context");
        } catch (const json::exception& e) {
            fail(ErrorKind::InvalidInput, fmt::format("field 'context': {}", e.what()));
        }
    }
    ex.truth.reviewer_scores = required<std::vector<double>>(record, "reviewer_scores");
    ex.truth.mean_rating = required<double>(record, "mean_rating");
    ex.truth.reference_review = required<std::string>(record, "reference_review");

    if (ex.paper.id.empty()) fail(ErrorKind::InvalidInput, "paper_id is empty");
    if (ex.paper.body.empty()) fail(ErrorKind::InvalidInput, "body is empty");
    if (ex.truth.reviewer_scores.empty()) fail(ErrorKind::InvalidInput, "reviewer_scores is empty");
    if (!(ex.truth.mean_rating >= 1.0 && ex.truth.mean_rating <= 10.0)) {
        fail(ErrorKind::InvalidInput,
             fmt::format("mean_rating {} is outside [1, 10]", ex.truth.mean_rating));
    }
    return ex;
}

} // namespace reviewkit

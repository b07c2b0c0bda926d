#include "reviewkit/judge.hpp"

#include <cctype>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "reviewkit/error.hpp"
#include "reviewkit/rng.hpp"

namespace reviewkit {

namespace {

constexpr std::string_view kReview1 = "REVIEW_1_BETTER";
constexpr std::string_view kReview2 = "REVIEW_2_BETTER";

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Calls the judge until `parse` accepts a reply, at most 1 + max_retries times.
template <typename Parse>
auto ask_until_parsed(ChatClient& judge, std::span<const ChatMessage> messages, Parse parse,
                      std::string& last_reply) -> decltype(parse(std::string_view{})) {
    for (int attempt = 0; attempt <= judge.max_retries(); ++attempt) {
        last_reply = judge.complete(messages);
        if (auto parsed = parse(last_reply)) return parsed;
        spdlog::debug("judge reply rejected (attempt {}): {}", attempt + 1, last_reply);
    }
    return std::nullopt;
}

} // namespace

std::string_view to_string(PresentedOrder order) noexcept {
    return order == PresentedOrder::CandidateFirst ? "candidate_first" : "reference_first";
}

PresentedOrder presentation_order(std::uint64_t seed) {
    Rng rng(seed);
    return coin_flip(rng) ? PresentedOrder::ReferenceFirst : PresentedOrder::CandidateFirst;
}

std::optional<int> parse_preference(std::string_view reply) {
    const bool one = reply.find(kReview1) != std::string_view::npos;
    const bool two = reply.find(kReview2) != std::string_view::npos;
    if (one == two) return std::nullopt;
    return one ? 1 : 2;
}

std::string truncate_tokens(std::string_view text, std::size_t limit) {
    std::size_t count = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i == text.size()) break;
        if (count == limit) return std::string(trim(text.substr(0, i)));
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        ++count;
    }
    return std::string(text);
}

JudgeVerdict compare_reviews(std::string_view paper_context, std::string_view candidate,
                             std::string_view reference, ChatClient& judge,
                             std::uint64_t rng_seed, const PairwiseOptions& options,
                             const PromptTemplates& templates) {
    if (trim(candidate).empty() || trim(reference).empty()) {
        fail(ErrorKind::InvalidInput, "both reviews must be non-empty");
    }
    JudgeVerdict verdict;
    verdict.presented_order = presentation_order(rng_seed);
    const bool candidate_first = verdict.presented_order == PresentedOrder::CandidateFirst;

    const std::string context = options.context_token_limit == 0
                                    ? std::string(paper_context)
                                    : truncate_tokens(paper_context, options.context_token_limit);
    const std::vector<ChatMessage> messages = {
        {"user", render(templates.genrm,
                        {{"paper_context", context},
                         {"review1", std::string(candidate_first ? candidate : reference)},
                         {"review2", std::string(candidate_first ? reference : candidate)}})}};

    const auto slot = ask_until_parsed(judge, messages, parse_preference, verdict.raw_reply);
    if (!slot) {
        fail(ErrorKind::JudgeUnparseable,
             fmt::format("judge gave no single REVIEW_1_BETTER/REVIEW_2_BETTER after {} attempts; last reply: {}",
                         judge.max_retries() + 1, verdict.raw_reply));
    }
    const bool candidate_slot = (*slot == 1) == candidate_first;
    verdict.winner = candidate_slot ? Preferred::Candidate : Preferred::Reference;
    return verdict;
}

std::string_view display_name(Dimension d) noexcept {
    switch (d) {
    case Dimension::TopicCoverage: return "Topic Coverage";
    case Dimension::SemanticSimilarity: return "Semantic Similarity";
    case Dimension::CorrectnessOfClaims: return "Correctness of Claims";
    case Dimension::AbsenceOfHallucinations: return "Absence of Hallucinations";
    case Dimension::AnalyticalDepth: return "Analytical Depth";
    case Dimension::ActionableInsights: return "Actionable Insights";
    case Dimension::AdherenceToGuidelines: return "Adherence to Guidelines";
    }
    return "";
}

std::string_view key(Dimension d) noexcept {
    switch (d) {
    case Dimension::TopicCoverage: return "topic_coverage";
    case Dimension::SemanticSimilarity: return "semantic_similarity";
    case Dimension::CorrectnessOfClaims: return "correctness_of_claims";
    case Dimension::AbsenceOfHallucinations: return "absence_of_hallucinations";
    case Dimension::AnalyticalDepth: return "analytical_depth";
    case Dimension::ActionableInsights: return "actionable_insights";
    case Dimension::AdherenceToGuidelines: return "adherence_to_guidelines";
    }
    return "";
}

std::string_view description(Dimension d) noexcept {
    switch (d) {
    case Dimension::TopicCoverage:
        return "How completely the review covers the paper's main topics, claims and "
               "the aspects a human reviewer would normally examine.";
    case Dimension::SemanticSimilarity:
        return "How closely the review's core critique and suggestions match what a "
               "plausible human review of this paper would say, regardless of wording.";
    case Dimension::CorrectnessOfClaims:
        return "Whether the statements the review makes about the paper's method, "
               "results and conclusions are accurate.";
    case Dimension::AbsenceOfHallucinations:
        return "Whether the review avoids introducing information or claims that the "
               "paper does not support.";
    case Dimension::AnalyticalDepth:
        return "How deeply the review engages with the work: methodological rigor, "
               "logical gaps, interpretation of results, relation to prior work.";
    case Dimension::ActionableInsights:
        return "Whether the review gives specific, practical suggestions the authors "
               "could act on to improve the paper.";
    case Dimension::AdherenceToGuidelines:
        return "Whether the review follows standard reviewing criteria: originality, "
               "significance, soundness, clarity and, where relevant, ethics.";
    }
    return "";
}

bool DimensionScores::complete() const {
    for (const auto& s : scores) {
        if (!s) return false;
    }
    return true;
}

std::array<int, kDimensionCount> DimensionScores::require() const {
    std::array<int, kDimensionCount> out{};
    for (std::size_t i = 0; i < kDimensionCount; ++i) {
        if (!scores[i]) {
            fail(ErrorKind::DimensionScoreMissing,
                 fmt::format("no score for {}: {}", display_name(kDimensions[i]), errors[i]));
        }
        out[i] = *scores[i];
    }
    return out;
}

std::optional<int> parse_dimension_score(std::string_view reply) {
    for (std::size_t i = 0; i < reply.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(reply[i]))) continue;
        std::size_t j = i;
        while (j < reply.size() && std::isdigit(static_cast<unsigned char>(reply[j]))) ++j;
        if (j - i > 1) return std::nullopt;
        const int value = reply[i] - '0';
        if (value < 1 || value > 5) return std::nullopt;
        return value;
    }
    return std::nullopt;
}

DimensionScores score_review_dimensions(std::string_view paper, std::string_view review,
                                        ChatClient& judge, const PromptTemplates& templates) {
    if (trim(review).empty()) fail(ErrorKind::InvalidInput, "review is empty");
    DimensionScores result;
    for (std::size_t i = 0; i < kDimensionCount; ++i) {
        const Dimension d = kDimensions[i];
        const std::vector<ChatMessage> messages = {
            {"user", render(templates.dimension_scoring,
                            {{"paper", std::string(paper)},
                             {"review", std::string(review)},
                             {"dimension", std::string(display_name(d))},
                             {"dimension_description", std::string(description(d))}})}};
        std::string reply;
        result.scores[i] = ask_until_parsed(judge, messages, parse_dimension_score, reply);
        if (!result.scores[i]) {
            result.errors[i] = fmt::format("unparseable score after {} attempts; last reply: {}",
                                           judge.max_retries() + 1, reply);
            spdlog::warn("{}: {}", display_name(d), result.errors[i]);
        }
    }
    return result;
}

std::string_view key(RetrievalCriterion c) noexcept {
    switch (c) {
    case RetrievalCriterion::FactualAccuracy: return "factual_accuracy";
    case RetrievalCriterion::EvidenceQuality: return "evidence_quality";
    case RetrievalCriterion::ClarityCoherence: return "clarity_coherence";
    }
    return "";
}

int judge_retrieval_pair(std::string_view answer_with_retrieval, std::string_view answer_without,
                         RetrievalCriterion criterion, ChatClient& judge,
                         const PromptTemplates& templates) {
    if (trim(answer_with_retrieval).empty() || trim(answer_without).empty()) {
        fail(ErrorKind::InvalidInput, "both answers must be non-empty");
    }
    const std::string* prompt = nullptr;
    switch (criterion) {
    case RetrievalCriterion::FactualAccuracy: prompt = &templates.retrieval_factual_accuracy; break;
    case RetrievalCriterion::EvidenceQuality: prompt = &templates.retrieval_evidence_quality; break;
    case RetrievalCriterion::ClarityCoherence: prompt = &templates.retrieval_clarity_coherence; break;
    }
    const std::vector<ChatMessage> messages = {
        {"system", *prompt},
        {"user", fmt::format("Answer-A:\n{}\n\nAnswer-B:\n{}", answer_with_retrieval, answer_without)}};
    auto parse = [](std::string_view reply) -> std::optional<int> {
        const auto t = trim(reply);
        if (t == "0") return 0;
        if (t == "1") return 1;
        return std::nullopt;
    };
    std::string reply;
    const auto verdict = ask_until_parsed(judge, messages, parse, reply);
    if (!verdict) {
        fail(ErrorKind::JudgeUnparseable,
             fmt::format("{} judge did not answer 0 or 1 after {} attempts; last reply: {}",
                         key(criterion), judge.max_retries() + 1, reply));
    }
    return *verdict;
}

} // namespace reviewkit

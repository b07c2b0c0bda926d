#pragma once

// Judge protocols built on a ChatClient: pairwise review preference,
// seven-dimension review scoring, and retrieval A/B verdicts.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "reviewkit/chat_client.hpp"
#include "reviewkit/prompts.hpp"

namespace reviewkit {

enum class Preferred { Candidate, Reference };
enum class PresentedOrder { CandidateFirst, ReferenceFirst };

std::string_view to_string(PresentedOrder order) noexcept;

struct JudgeVerdict {
    Preferred winner = Preferred::Reference;
    PresentedOrder presented_order = PresentedOrder::CandidateFirst;
    std::string raw_reply;

    /// 1 iff the candidate was preferred.
    int r_judge() const noexcept { return winner == Preferred::Candidate ? 1 : 0; }
};

struct PairwiseOptions {
    /// Paper context is cut to this many whitespace-delimited tokens; 0 keeps all.
    std::size_t context_token_limit = 8000;
};

/// Order in which the candidate is shown for a given seed (uniform).
PresentedOrder presentation_order(std::uint64_t seed);

/// 1 or 2 when exactly one of REVIEW_1_BETTER / REVIEW_2_BETTER occurs.
std::optional<int> parse_preference(std::string_view reply);

/// `text` cut after its first `limit` whitespace-delimited tokens, original
/// spacing kept. Shorter texts come back unchanged.
std::string truncate_tokens(std::string_view text, std::size_t limit);

/// Asks the judge which review is better, presenting the pair in a seeded
/// random order and mapping the answer back. Re-asks up to
/// judge.max_retries() times, then throws JudgeUnparseable.
JudgeVerdict compare_reviews(std::string_view paper_context, std::string_view candidate,
                             std::string_view reference, ChatClient& judge,
                             std::uint64_t rng_seed, const PairwiseOptions& options = {},
                             const PromptTemplates& templates = PromptTemplates::builtin());

enum class Dimension {
    TopicCoverage,
    SemanticSimilarity,
    CorrectnessOfClaims,
    AbsenceOfHallucinations,
    AnalyticalDepth,
    ActionableInsights,
    AdherenceToGuidelines,
};

inline constexpr std::size_t kDimensionCount = 7;
inline constexpr std::array<Dimension, kDimensionCount> kDimensions = {
    Dimension::TopicCoverage,       Dimension::SemanticSimilarity,
    Dimension::CorrectnessOfClaims, Dimension::AbsenceOfHallucinations,
    Dimension::AnalyticalDepth,     Dimension::ActionableInsights,
    Dimension::AdherenceToGuidelines,
};

std::string_view display_name(Dimension d) noexcept;
/// snake_case key used in JSON reports.
std::string_view key(Dimension d) noexcept;
std::string_view description(Dimension d) noexcept;

struct DimensionScores {
    std::array<std::optional<int>, kDimensionCount> scores;
    /// Empty when the score for that dimension was obtained.
    std::array<std::string, kDimensionCount> errors;

    bool complete() const;
    /// Throws DimensionScoreMissing naming the first missing dimension.
    std::array<int, kDimensionCount> require() const;
};

/// First integer in the reply when it lies in [1, 5].
std::optional<int> parse_dimension_score(std::string_view reply);

/// One judge call per dimension. A dimension whose reply stays
/// unparseable after retries is left empty with its error recorded;
/// endpoint failures propagate.
DimensionScores score_review_dimensions(std::string_view paper, std::string_view review,
                                        ChatClient& judge,
                                        const PromptTemplates& templates = PromptTemplates::builtin());

enum class RetrievalCriterion { FactualAccuracy, EvidenceQuality, ClarityCoherence };

inline constexpr std::array<RetrievalCriterion, 3> kRetrievalCriteria = {
    RetrievalCriterion::FactualAccuracy, RetrievalCriterion::EvidenceQuality,
    RetrievalCriterion::ClarityCoherence};

std::string_view key(RetrievalCriterion c) noexcept;

/// 0 when the retrieval answer (Answer-A) wins, 1 otherwise. The trimmed
/// reply must be exactly "0" or "1"; anything else is re-asked, then
/// JudgeUnparseable.
int judge_retrieval_pair(std::string_view answer_with_retrieval, std::string_view answer_without,
                         RetrievalCriterion criterion, ChatClient& judge,
                         const PromptTemplates& templates = PromptTemplates::builtin());

} // namespace reviewkit

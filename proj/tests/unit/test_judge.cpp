#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <thread>

#include "reviewkit/judge.hpp"
#include "test_util.hpp"

using namespace reviewkit;
using test::error_kind;

namespace {

const std::string kCandidate = "## Summary\ncandidate review text";
const std::string kReference = "## Summary\nreference review text";

std::uint64_t seed_for(PresentedOrder wanted) {
    for (std::uint64_t s = 0;; ++s) {
        if (presentation_order(s) == wanted) return s;
    }
}

// Prefers whichever review contains `favourite`, answering by slot.
CallbackChatClient::Handler prefer(const std::string& favourite) {
    return [favourite](std::span<const ChatMessage> messages) -> std::string {
        const std::string& prompt = messages.back().content;
        const auto fav = prompt.find(favourite);
        const auto other = prompt.find(favourite == kCandidate ? kReference : kCandidate);
        return fav < other ? "Reasoning...\nREVIEW_1_BETTER" : "Reasoning...\nREVIEW_2_BETTER";
    };
}

} // namespace

TEST(ParsePreference, ExactlyOneToken) {
    EXPECT_EQ(parse_preference("REVIEW_1_BETTER"), 1);
    EXPECT_EQ(parse_preference("After thought: REVIEW_2_BETTER."), 2);
    EXPECT_FALSE(parse_preference("REVIEW_1_BETTER or REVIEW_2_BETTER"));
    EXPECT_FALSE(parse_preference("review 1 is better"));
}

TEST(TruncateTokens, KeepsOriginalSpacing) {
    EXPECT_EQ(truncate_tokens("a  b\nc d", 3), "a  b\nc");
    EXPECT_EQ(truncate_tokens("a b", 5), "a b");
    EXPECT_EQ(truncate_tokens("  a b  ", 2), "  a b  ");
    EXPECT_EQ(truncate_tokens("a b c", 0), "");
}

TEST(PresentationOrder, SeededAndBalanced) {
    EXPECT_EQ(presentation_order(77), presentation_order(77));
    int candidate_first = 0;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        candidate_first += presentation_order(s) == PresentedOrder::CandidateFirst;
    }
    EXPECT_GT(candidate_first, 450);
    EXPECT_LT(candidate_first, 550);
}

TEST(CompareReviews, MapsVerdictUnderBothOrders) {
    for (auto order : {PresentedOrder::CandidateFirst, PresentedOrder::ReferenceFirst}) {
        const auto seed = seed_for(order);
        CallbackChatClient favours_candidate(prefer(kCandidate));
        CallbackChatClient favours_reference(prefer(kReference));
        const auto win = compare_reviews("paper", kCandidate, kReference, favours_candidate, seed);
        const auto loss = compare_reviews("paper", kCandidate, kReference, favours_reference, seed);
        SCOPED_TRACE(std::string(to_string(order)));
        EXPECT_EQ(win.presented_order, order);
        EXPECT_EQ(win.r_judge(), 1);
        EXPECT_EQ(loss.r_judge(), 0);
    }
}

TEST(CompareReviews, PromptCarriesBothReviewsAndContext) {
    std::string seen;
    CallbackChatClient judge([&](std::span<const ChatMessage> m) {
        seen = m.back().content;
        return std::string("REVIEW_1_BETTER");
    });
    compare_reviews("PAPER-CONTEXT", kCandidate, kReference, judge, 1);
    EXPECT_NE(seen.find("PAPER-CONTEXT"), std::string::npos);
    EXPECT_NE(seen.find(kCandidate), std::string::npos);
    EXPECT_NE(seen.find(kReference), std::string::npos);
    EXPECT_EQ(seen.find("{review1}"), std::string::npos);
}

TEST(CompareReviews, ContextIsTruncated) {
    std::string seen;
    CallbackChatClient judge([&](std::span<const ChatMessage> m) {
        seen = m.back().content;
        return std::string("REVIEW_2_BETTER");
    });
    PairwiseOptions options;
    options.context_token_limit = 3;
    compare_reviews("one two three FOUR five", kCandidate, kReference, judge, 1, options);
    EXPECT_NE(seen.find("one two three"), std::string::npos);
    EXPECT_EQ(seen.find("FOUR"), std::string::npos);
}

TEST(CompareReviews, SlotOneBiasAveragesOut) {
    CallbackChatClient biased([](std::span<const ChatMessage>) { return std::string("REVIEW_1_BETTER"); });
    double total = 0;
    for (std::uint64_t s = 0; s < 1000; ++s) total += compare_reviews("p", kCandidate, kReference, biased, s).r_judge();
    const double mean = total / 1000.0;
    EXPECT_GE(mean, 0.45);
    EXPECT_LE(mean, 0.55);
}

TEST(CompareReviews, RetriesThenGivesUp) {
    int calls = 0;
    CallbackChatClient flaky([&](std::span<const ChatMessage>) {
        return ++calls < 3 ? std::string("undecided") : std::string("REVIEW_2_BETTER");
    });
    EXPECT_NO_THROW(compare_reviews("p", kCandidate, kReference, flaky, 0));
    EXPECT_EQ(calls, 3);

    int attempts = 0;
    CallbackChatClient mute(
        [&](std::span<const ChatMessage>) {
            ++attempts;
            return std::string("no idea");
        },
        8, 2);
    EXPECT_EQ(error_kind([&] { compare_reviews("p", kCandidate, kReference, mute, 0); }),
              ErrorKind::JudgeUnparseable);
    EXPECT_EQ(attempts, 3);
}

TEST(CompareReviews, EmptyReviewRejected) {
    CallbackChatClient judge([](std::span<const ChatMessage>) { return std::string("REVIEW_1_BETTER"); });
    EXPECT_EQ(error_kind([&] { compare_reviews("p", "  ", kReference, judge, 0); }), ErrorKind::InvalidInput);
}

TEST(ChatClientSlots, NeverExceedsMaxInFlight) {
    std::atomic<int> active{0}, peak{0};
    CallbackChatClient judge(
        [&](std::span<const ChatMessage>) {
            const int now = ++active;
            int seen = peak.load();
            while (now > seen && !peak.compare_exchange_weak(seen, now)) {
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
            --active;
            return std::string("REVIEW_1_BETTER");
        },
        4);
    std::vector<std::jthread> threads;
    for (int t = 0; t < 32; ++t) {
        threads.emplace_back([&, t] { compare_reviews("p", kCandidate, kReference, judge, t); });
    }
    threads.clear();
    EXPECT_LE(peak.load(), 4);
    EXPECT_GE(peak.load(), 2);
}

TEST(DimensionScore, Parsing) {
    EXPECT_EQ(parse_dimension_score("4"), 4);
    EXPECT_EQ(parse_dimension_score("Score: 5"), 5);
    EXPECT_FALSE(parse_dimension_score("0"));
    EXPECT_FALSE(parse_dimension_score("6"));
    EXPECT_FALSE(parse_dimension_score("10"));
    EXPECT_FALSE(parse_dimension_score("good"));
}

TEST(DimensionScore, ConstantJudge) {
    CallbackChatClient judge([](std::span<const ChatMessage>) { return std::string("4"); });
    const auto scores = score_review_dimensions("paper", "review", judge);
    ASSERT_TRUE(scores.complete());
    for (int s : scores.require()) EXPECT_EQ(s, 4);
}

TEST(DimensionScore, OneCallPerDimensionWithItsName) {
    std::vector<std::string> prompts;
    CallbackChatClient judge([&](std::span<const ChatMessage> m) {
        prompts.push_back(m.back().content);
        return std::string("3");
    });
    score_review_dimensions("paper", "review", judge);
    ASSERT_EQ(prompts.size(), kDimensionCount);
    for (std::size_t i = 0; i < kDimensionCount; ++i) {
        EXPECT_NE(prompts[i].find(std::string(display_name(kDimensions[i]))), std::string::npos);
        EXPECT_NE(prompts[i].find(std::string(description(kDimensions[i]))), std::string::npos);
    }
}

TEST(DimensionScore, GapIsRecordedNotThrown) {
    CallbackChatClient judge(
        [](std::span<const ChatMessage> m) {
            return m.back().content.find("Analytical Depth") != std::string::npos ? std::string("excellent")
                                                                                  : std::string("2");
        },
        8, 1);
    const auto scores = score_review_dimensions("paper", "review", judge);
    EXPECT_FALSE(scores.complete());
    const auto idx = static_cast<std::size_t>(Dimension::AnalyticalDepth);
    EXPECT_FALSE(scores.scores[idx]);
    EXPECT_FALSE(scores.errors[idx].empty());
    EXPECT_EQ(error_kind([&] { scores.require(); }), ErrorKind::DimensionScoreMissing);
}

TEST(RetrievalVerdict, StrictZeroOrOne) {
    std::vector<ChatMessage> seen;
    CallbackChatClient judge([&](std::span<const ChatMessage> m) {
        seen.assign(m.begin(), m.end());
        return std::string(" 0\n");
    });
    EXPECT_EQ(judge_retrieval_pair("with", "without", RetrievalCriterion::EvidenceQuality, judge), 0);
    ASSERT_EQ(seen.size(), 2u);
    EXPECT_EQ(seen[0].role, "system");
    EXPECT_EQ(seen[0].content, PromptTemplates::builtin().retrieval_evidence_quality);
    EXPECT_EQ(seen[1].content, "Answer-A:\nwith\n\nAnswer-B:\nwithout");

    CallbackChatClient chatty([](std::span<const ChatMessage>) { return std::string("0 because A cites"); }, 8, 1);
    EXPECT_EQ(error_kind([&] { judge_retrieval_pair("a", "b", RetrievalCriterion::FactualAccuracy, chatty); }),
              ErrorKind::JudgeUnparseable);
}

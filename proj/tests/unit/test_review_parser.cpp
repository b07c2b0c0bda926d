#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "reviewkit/review_parser.hpp"
#include "stub_server.hpp"

using namespace reviewkit;

namespace {

std::string corpus(const std::string& name) {
    return test::read_text(std::string(RK_TEST_DATA) + "/parser_corpus/" + name);
}

} // namespace

TEST(ReviewParserCorpus, MatchesExpectedSectionsAndRatings) {
    const auto expected = nlohmann::json::parse(corpus("expected.json"));
    ASSERT_EQ(expected.size(), 20u);
    for (const auto& row : expected) {
        const std::string file = row["file"];
        SCOPED_TRACE(file);
        const ParsedReview parsed = parse_review(corpus(file));
        const SectionSet missing = missing_sections(parsed);
        EXPECT_EQ(!missing.contains(Section::Thinking), row["thinking"].get<bool>());
        EXPECT_EQ(!missing.contains(Section::Summary), row["summary"].get<bool>());
        EXPECT_EQ(!missing.contains(Section::Strengths), row["strengths"].get<bool>());
        EXPECT_EQ(!missing.contains(Section::Weaknesses), row["weaknesses"].get<bool>());
        if (row["rating"].is_null()) {
            EXPECT_FALSE(parsed.rating.has_value());
        } else {
            ASSERT_TRUE(parsed.rating.has_value());
            EXPECT_DOUBLE_EQ(*parsed.rating, row["rating"].get<double>());
        }
    }
}

TEST(ReviewParser, WellFormedReviewKeepsContent) {
    const auto parsed = parse_review(
        "<think>\nweigh novelty\n</think>\n## Summary\nA method.\n\n## Strengths\n- fast\n- simple\n\n"
        "## Weaknesses\n- narrow\n  evaluation\n\n## Rating\n7\n");
    ASSERT_TRUE(parsed.thinking);
    EXPECT_EQ(*parsed.thinking, "weigh novelty");
    EXPECT_EQ(*parsed.summary, "A method.");
    EXPECT_EQ(*parsed.strengths, (std::vector<std::string>{"fast", "simple"}));
    EXPECT_EQ(*parsed.weaknesses, (std::vector<std::string>{"narrow evaluation"}));
    EXPECT_EQ(*parsed.rating, 7.0);
    EXPECT_TRUE(missing_sections(parsed).empty());
}

TEST(ReviewParser, EmptyDocumentMissesEverything) {
    const auto parsed = parse_review("");
    EXPECT_EQ(missing_sections(parsed).size(), 4u);
    EXPECT_FALSE(parsed.rating);
}

TEST(ReviewParser, EmptySectionSwitch) {
    const std::string text = "<think>x</think>\n## Summary\n\n## Strengths\n- a\n## Weaknesses\n- b\n";
    EXPECT_TRUE(missing_sections(parse_review(text)).contains(Section::Summary));
    const auto lenient = parse_review(text, ParseOptions{false});
    EXPECT_FALSE(missing_sections(lenient).contains(Section::Summary));
}

TEST(ExtractRating, FirstNumberWins) {
    EXPECT_EQ(extract_rating("## Rating\n6 (marginally above, could be 8)"), 6.0);
    EXPECT_EQ(extract_rating("## Rating\nScore: 7.5/10"), 7.5);
}

TEST(ExtractRating, ClampsIntoScale) {
    EXPECT_EQ(extract_rating("## Rating\n0"), 1.0);
    EXPECT_EQ(extract_rating("## Rating\n42"), 10.0);
    EXPECT_EQ(extract_rating("## Rating\n10"), 10.0);
    EXPECT_EQ(extract_rating("## Rating\n1"), 1.0);
}

TEST(ExtractRating, NoNumberOrNoHeading) {
    EXPECT_FALSE(extract_rating("## Rating\nundecided"));
    EXPECT_FALSE(extract_rating("Rating 5 without a heading"));
}

TEST(ExtractRating, NumbersOutsideRatingSectionIgnored) {
    EXPECT_EQ(extract_rating("## Summary\nWe ran 12 seeds.\n## Rating\n4\n"), 4.0);
}

#pragma once

// Generated reviews with known structure, and a judge whose preference
// depends only on review content (never on slot order).

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>

#include <fmt/format.h>

#include "reviewkit/chat_client.hpp"
#include "reviewkit/types.hpp"

namespace reviewkit::test {

// Reviews carrying this marker beat the reference.
inline constexpr const char* kStrongMarker = "[[strong-review]]";
inline constexpr const char* kReferenceMarker = "[[reference-review]]";

struct SyntheticReview {
    std::string text;
    std::optional<double> rating;  // what the rating heading says, unclamped
    SectionSet omitted;
    bool strong = false;
};

inline std::string synthetic_reference(const std::string& id) {
    return fmt::format("## Summary\nReference summary for {}. {}\n## Strengths\n- clear\n## Weaknesses\n- narrow\n",
                       id, kReferenceMarker);
}

inline SyntheticReview synthetic_review(std::mt19937_64& gen, const std::string& id) {
    SyntheticReview r;
    std::uniform_int_distribution<int> half_points(0, 22);  // 0.0 .. 11.0 in steps of 0.5
    std::bernoulli_distribution coin(0.5), rare(0.15);
    if (!rare(gen)) r.rating = half_points(gen) / 2.0;
    for (Section s : kAllSections) {
        if (rare(gen)) r.omitted.insert(s);
    }
    r.strong = coin(gen);
    std::string& t = r.text;
    if (!r.omitted.contains(Section::Thinking)) t += fmt::format("<think>\nWeighing {} carefully.\n</think>\n", id);
    if (!r.omitted.contains(Section::Summary)) {
        t += fmt::format("## Summary\nThe paper {} proposes a method.{}\n", id, r.strong ? std::string(" ") + kStrongMarker : "");
    }
    if (!r.omitted.contains(Section::Strengths)) t += "## Strengths\n- sound experiments\n";
    if (!r.omitted.contains(Section::Weaknesses)) t += "## Weaknesses\n- limited ablations\n";
    if (r.rating) t += fmt::format("## Rating\n{}\n", *r.rating);
    if (r.strong && r.omitted.contains(Section::Summary)) t += std::string(kStrongMarker) + "\n";
    return r;
}

inline double clamp_rating(double r) { return r < 1.0 ? 1.0 : (r > 10.0 ? 10.0 : r); }

// Answers by slot: whichever review holds the strong marker wins, else the reference.
inline std::string marker_judge_reply(std::span<const ChatMessage> messages) {
    const std::string& prompt = messages.back().content;
    const auto second_slot = prompt.find("\nReview 2: ");
    auto winner = prompt.find(kStrongMarker);
    if (winner == std::string::npos) winner = prompt.find(kReferenceMarker);
    return winner < second_slot ? "Review 1 reads better.\nREVIEW_1_BETTER" : "Review 2 reads better.\nREVIEW_2_BETTER";
}

} // namespace reviewkit::test

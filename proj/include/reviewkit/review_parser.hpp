#pragma once

#include <optional>
#include <string_view>

#include "reviewkit/types.hpp"

namespace reviewkit {

struct ParseOptions {
    /// A heading (or think block) whose body is blank counts as absent.
    bool empty_section_is_missing = true;
};

/// Splits a generated review into its think trace and markdown sections.
///
/// Only the first <think>...</think> pair is the reasoning block; headings
/// inside it are ignored, and an unclosed <think> yields no thinking field.
/// Section headings need at least two '#' and match case-insensitively,
/// optionally wrapped in bold markers or followed by a colon. Never throws:
/// structure that cannot be found is reported as an absent field.
ParsedReview parse_review(std::string_view text, const ParseOptions& options = {});

/// First number after the first "Rating" heading, clamped to [1, 10].
std::optional<double> extract_rating(std::string_view text);

/// Labels of the absent structural fields. The rating is not one of them.
SectionSet missing_sections(const ParsedReview& parsed);

} // namespace reviewkit

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace reviewkit {

/// Prompt texts. The built-in set is compiled from templates/*.txt; a
/// directory with the same file names can replace it at runtime.
struct PromptTemplates {
    std::string query_generation;
    std::string retrieval_system;
    std::string review_generation;
    std::string genrm;
    std::string retrieval_factual_accuracy;
    std::string retrieval_evidence_quality;
    std::string retrieval_clarity_coherence;
    std::string dimension_scoring;
    std::string reference_synthesis;

    static const PromptTemplates& builtin();

    /// Reads <dir>/<name>.txt for every template; throws Io if one is missing.
    static PromptTemplates load(const std::filesystem::path& dir);
};

/// Replaces each {name} with vars[name] in a single left-to-right pass, so
/// substituted text is never re-scanned. Unknown placeholders stay as-is.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars);

/// Prompt asking a policy model for a structured review of `paper`.
std::string render_review_prompt(std::string_view paper,
                                 const PromptTemplates& templates = PromptTemplates::builtin());

} // namespace reviewkit

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reviewkit/arxiv.hpp"
#include "reviewkit/chat_client.hpp"
#include "reviewkit/judge.hpp"
#include "reviewkit/prompts.hpp"
#include "reviewkit/types.hpp"

namespace reviewkit {

/// The three questions from a "1.xxx / 2.xxx / 3.xxx" reply, or nothing
/// when the reply does not contain exactly those three numbered lines.
std::optional<std::vector<std::string>> parse_query_lines(std::string_view reply);

/// Asks the model for three search questions about the paper; re-asks up to
/// llm.max_retries() times before throwing QueryGenerationFailed.
QuerySet generate_queries(const PaperDocument& paper, ChatClient& llm,
                          const PromptTemplates& templates = PromptTemplates::builtin());

/// Source digest block placed under the question.
std::string format_sources(const std::vector<BibEntry>& sources);

/// Answers a question from retrieved sources. With no sources this is the
/// plain, retrieval-free answer.
std::string answer_query(const std::string& query, const std::vector<BibEntry>& sources,
                         ChatClient& llm,
                         const PromptTemplates& templates = PromptTemplates::builtin());

struct ConsolidationOptions {
    /// open/close pairs removed together with everything between them.
    std::vector<std::pair<std::string, std::string>> block_patterns;
    /// Substrings that must never survive consolidation.
    std::vector<std::string> delimiters;

    static ConsolidationOptions defaults();
};

/// Removes tool-call markup until no blocklisted substring is left.
std::string strip_tool_artifacts(std::string_view text, const ConsolidationOptions& options);

/// Cleans 1-3 (query, answer, sources) triples into a RetrievedContext.
RetrievedContext consolidate_context(std::vector<QueryAnswer> pairs,
                                     const ConsolidationOptions& options = ConsolidationOptions::defaults());

/// Deterministic text block: per-query "### Query" / "### Answer" /
/// "### Sources", then "### Bibliography" and "### Ranked Excerpts".
std::string render_context(const RetrievedContext& context);

struct RetrievalRun {
    QuerySet queries;
    RetrievedContext context;
    std::string rendered;
};

/// Query generation, search, answering and consolidation for one paper.
/// The three queries run concurrently; results keep query order.
RetrievalRun run_retrieval(const PaperDocument& paper, ChatClient& llm, PaperSearch& search,
                           int max_results = 5,
                           const PromptTemplates& templates = PromptTemplates::builtin(),
                           const ConsolidationOptions& options = ConsolidationOptions::defaults());

struct CriterionWinRate {
    std::size_t wins = 0;
    std::size_t usable = 0;
    std::size_t excluded = 0;

    double rate() const { return usable == 0 ? 0.0 : static_cast<double>(wins) / static_cast<double>(usable); }
};

struct RetrievalBenefit {
    std::array<CriterionWinRate, 3> criteria;

    const CriterionWinRate& operator[](RetrievalCriterion c) const {
        return criteria[static_cast<std::size_t>(c)];
    }
};

/// For each query, compares the retrieval answer with the plain answer on
/// each criterion. Every pair gets `judges_per_pair` verdicts; the retrieval
/// answer wins a pair when strictly more than half of them favour it. A
/// pair with any unparseable verdict is excluded for that criterion.
/// Throws UndefinedMetric when a criterion ends with no usable pairs.
RetrievalBenefit evaluate_retrieval_benefit(const std::vector<std::string>& queries,
                                            PaperSearch& search, ChatClient& answerer,
                                            ChatClient& judge, int judges_per_pair,
                                            int max_results = 5,
                                            const PromptTemplates& templates = PromptTemplates::builtin());

} // namespace reviewkit

#include "reviewkit/retrieval.hpp"

#include <cctype>
#include <future>
#include <map>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "reviewkit/error.hpp"

namespace reviewkit {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += sep;
        out += items[i];
    }
    return out;
}

std::string collapse_blank_lines(std::string_view text) {
    std::string out;
    int newlines = 0;
    for (char c : text) {
        if (c == '\n') {
            if (++newlines > 2) continue;
        } else if (c != '\r') {
            newlines = 0;
        }
        out.push_back(c);
    }
    return std::string(trim(out));
}

} // namespace

std::optional<std::vector<std::string>> parse_query_lines(std::string_view reply) {
    std::vector<std::pair<int, std::string>> numbered;
    std::size_t start = 0;
    while (start <= reply.size()) {
        const auto end = reply.find('\n', start);
        const auto line = trim(reply.substr(start, end == reply.npos ? reply.npos : end - start));
        std::size_t i = 0;
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
        if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
            numbered.emplace_back(std::stoi(std::string(line.substr(0, i))),
                                  std::string(trim(line.substr(i + 1))));
        }
        if (end == reply.npos) break;
        start = end + 1;
    }
    if (numbered.size() != 3) return std::nullopt;
    std::vector<std::string> queries;
    for (int k = 0; k < 3; ++k) {
        if (numbered[k].first != k + 1 || numbered[k].second.empty()) return std::nullopt;
        queries.push_back(numbered[k].second);
    }
    return queries;
}

QuerySet generate_queries(const PaperDocument& paper, ChatClient& llm, const PromptTemplates& templates) {
    if (trim(paper.body).empty()) fail(ErrorKind::InvalidInput, "paper body is empty");
    const std::vector<ChatMessage> messages = {
        {"user", render(templates.query_generation, {{"paper", paper.body}})}};
    std::string reply;
    for (int attempt = 0; attempt <= llm.max_retries(); ++attempt) {
        reply = llm.complete(messages);
        if (auto queries = parse_query_lines(reply)) return QuerySet(std::move(*queries));
        spdlog::debug("query generation reply rejected (attempt {})", attempt + 1);
    }
    fail(ErrorKind::QueryGenerationFailed,
         fmt::format("no reply with exactly three numbered questions after {} attempts; last reply: {}",
                     llm.max_retries() + 1, reply));
}

std::string format_sources(const std::vector<BibEntry>& sources) {
    std::string out;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        const auto& s = sources[i];
        if (i > 0) out += "\n";
        out += fmt::format("[{}] {} (arXiv:{})\n", i + 1, s.title, s.arxiv_id);
        if (!s.authors.empty()) out += fmt::format("Authors: {}\n", join(s.authors, ", "));
        if (s.excerpts.empty()) {
            out += s.abstract + "\n";
        } else {
            for (const auto& e : s.excerpts) out += e + "\n";
        }
    }
    return out;
}

std::string answer_query(const std::string& query, const std::vector<BibEntry>& sources,
                         ChatClient& llm, const PromptTemplates& templates) {
    if (sources.empty()) {
        return llm.complete({ChatMessage{"user", query}});
    }
    return llm.complete({
        ChatMessage{"system", templates.retrieval_system},
        ChatMessage{"user", fmt::format("Question: {}\n\nRetrieved arXiv papers:\n\n{}", query,
                                        format_sources(sources))},
    });
}

ConsolidationOptions ConsolidationOptions::defaults() {
    ConsolidationOptions o;
    o.block_patterns = {
        {"<tool_call>", "</tool_call>"},
        {"<tool_response>", "</tool_response>"},
        {"<function_call>", "</function_call>"},
        {"<|tool_call_start|>", "<|tool_call_end|>"},
    };
    o.delimiters = {
        "<tool_call>",   "</tool_call>",   "<tool_response>", "</tool_response>",
        "<function_call>", "</function_call>", "<|tool_call_start|>", "<|tool_call_end|>",
        "<|im_start|>",  "<|im_end|>",     "<|endoftext|>",   "✿FUNCTION✿",
        "✿ARGS✿",        "✿RESULT✿",       "✿RETURN✿",
    };
    return o;
}

std::string strip_tool_artifacts(std::string_view text, const ConsolidationOptions& options) {
    std::string out(text);
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [open, close] : options.block_patterns) {
            if (open.empty() || close.empty()) continue;
            for (auto pos = out.find(open); pos != std::string::npos; pos = out.find(open, pos)) {
                const auto end = out.find(close, pos + open.size());
                if (end == std::string::npos) break;
                out.erase(pos, end + close.size() - pos);
                changed = true;
            }
        }
        for (const auto& delimiter : options.delimiters) {
            if (delimiter.empty()) continue;
            for (auto pos = out.find(delimiter); pos != std::string::npos; pos = out.find(delimiter, pos)) {
                out.erase(pos, delimiter.size());
                changed = true;
            }
        }
    }
    return collapse_blank_lines(out);
}

RetrievedContext consolidate_context(std::vector<QueryAnswer> pairs, const ConsolidationOptions& options) {
    if (pairs.empty() || pairs.size() > 3) {
        fail(ErrorKind::InvalidInput, fmt::format("expected 1-3 query/answer pairs, got {}", pairs.size()));
    }
    auto clean = [&](std::string& s) { s = strip_tool_artifacts(s, options); };
    RetrievedContext context;
    for (auto& qa : pairs) {
        clean(qa.query);
        clean(qa.answer);
        for (auto& src : qa.sources) {
            clean(src.title);
            clean(src.abstract);
            for (auto& a : src.authors) clean(a);
            for (auto& e : src.excerpts) clean(e);
        }
        context.query_answers.push_back(std::move(qa));
    }
    return context;
}

std::string render_context(const RetrievedContext& context) {
    // Global bibliography numbering by first appearance.
    std::vector<const BibEntry*> bibliography;
    std::map<std::string, std::size_t> number_of;
    for (const auto& qa : context.query_answers) {
        for (const auto& src : qa.sources) {
            if (number_of.emplace(src.arxiv_id, bibliography.size() + 1).second) {
                bibliography.push_back(&src);
            }
        }
    }

    std::string out = "## Retrieved Context\n";
    for (const auto& qa : context.query_answers) {
        out += fmt::format("\n### Query\n{}\n\n### Answer\n{}\n\n### Sources\n", qa.query, qa.answer);
        if (qa.sources.empty()) out += "(none)\n";
        for (const auto& src : qa.sources) {
            out += fmt::format("[{}] {} (arXiv:{})\n", number_of.at(src.arxiv_id), src.title, src.arxiv_id);
        }
    }

    out += "\n### Bibliography\n";
    if (bibliography.empty()) out += "(none)\n";
    for (std::size_t i = 0; i < bibliography.size(); ++i) {
        const auto& b = *bibliography[i];
        out += fmt::format("[{}] {}. {}. arXiv:{}. {}\n", i + 1,
                           b.authors.empty() ? std::string("Unknown") : join(b.authors, ", "), b.title,
                           b.arxiv_id, b.url);
    }

    // Rank r of every query before rank r + 1 of any query.
    out += "\n### Ranked Excerpts\n";
    std::set<std::string> emitted;
    std::size_t depth = 0;
    for (const auto& qa : context.query_answers) depth = std::max(depth, qa.sources.size());
    bool any = false;
    for (std::size_t rank = 0; rank < depth; ++rank) {
        for (const auto& qa : context.query_answers) {
            if (rank >= qa.sources.size()) continue;
            const auto& src = qa.sources[rank];
            if (src.excerpts.empty() || !emitted.insert(src.arxiv_id).second) continue;
            if (any) out += "\n";
            out += fmt::format("[{}] {} (arXiv:{})\n", number_of.at(src.arxiv_id), src.title, src.arxiv_id);
            for (const auto& e : src.excerpts) out += e + "\n";
            any = true;
        }
    }
    if (!any) out += "(none)\n";
    return out;
}

namespace {

// Prefixes the failing stage so callers can tell where a run stopped.
template <typename F>
auto staged(std::string_view stage, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        throw Error(e.kind(), fmt::format("{}: {}", stage, e.what()));
    }
}

} // namespace

RetrievalRun run_retrieval(const PaperDocument& paper, ChatClient& llm, PaperSearch& search,
                           int max_results, const PromptTemplates& templates,
                           const ConsolidationOptions& options) {
    QuerySet queries = staged("query generation", [&] { return generate_queries(paper, llm, templates); });
    std::vector<std::future<QueryAnswer>> futures;
    for (const auto& q : queries.queries()) {
        futures.push_back(std::async(std::launch::async, [&, q] {
            QueryAnswer qa;
            qa.query = q;
            qa.sources = staged("search", [&] { return search.search(q, max_results); });
            qa.answer = staged("answer", [&] { return answer_query(q, qa.sources, llm, templates); });
            return qa;
        }));
    }
    std::vector<QueryAnswer> pairs;
    for (auto& f : futures) pairs.push_back(f.get());
    RetrievedContext context = consolidate_context(std::move(pairs), options);
    std::string rendered = render_context(context);
    return RetrievalRun{std::move(queries), std::move(context), std::move(rendered)};
}

RetrievalBenefit evaluate_retrieval_benefit(const std::vector<std::string>& queries,
                                            PaperSearch& search, ChatClient& answerer,
                                            ChatClient& judge, int judges_per_pair, int max_results,
                                            const PromptTemplates& templates) {
    if (judges_per_pair < 1) {
        fail(ErrorKind::InvalidInput, fmt::format("judges_per_pair must be >= 1, got {}", judges_per_pair));
    }
    RetrievalBenefit benefit;
    for (const auto& query : queries) {
        const auto sources = search.search(query, max_results);
        const std::string with_retrieval = answer_query(query, sources, answerer, templates);
        const std::string without = answer_query(query, {}, answerer, templates);
        for (std::size_t c = 0; c < kRetrievalCriteria.size(); ++c) {
            int retrieval_votes = 0;
            bool usable = true;
            for (int j = 0; j < judges_per_pair; ++j) {
                try {
                    if (judge_retrieval_pair(with_retrieval, without, kRetrievalCriteria[c], judge,
                                             templates) == 0) {
                        ++retrieval_votes;
                    }
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::JudgeUnparseable) throw;
                    spdlog::warn("excluding pair for '{}': {}", query, e.what());
                    usable = false;
                }
            }
            auto& tally = benefit.criteria[c];
            if (!usable) {
                ++tally.excluded;
                continue;
            }
            ++tally.usable;
            if (2 * retrieval_votes > judges_per_pair) ++tally.wins;
        }
    }
    for (std::size_t c = 0; c < kRetrievalCriteria.size(); ++c) {
        if (benefit.criteria[c].usable == 0) {
            fail(ErrorKind::UndefinedMetric,
                 fmt::format("no usable pairs for {}", key(kRetrievalCriteria[c])));
        }
    }
    return benefit;
}

} // namespace reviewkit

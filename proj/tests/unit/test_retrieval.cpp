#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <random>

#include "retrieval_fixture.hpp"
#include "reviewkit/retrieval.hpp"
#include "stub_server.hpp"
#include "test_util.hpp"

using namespace reviewkit;
using test::error_kind;

namespace {

PaperDocument fixture_paper() {
    PaperDocument p;
    p.id = "paper";
    p.title = "Routed Sparse Attention for Long-Document Summarization";
    p.body = test::read_text(test::fixture_path("retrieval/paper.md"));
    return p;
}

ArxivConfig stub_arxiv(const test::StubServer& server) {
    ArxivConfig c;
    c.base_url = server.url("/api/query");
    c.min_interval = std::chrono::milliseconds(0);
    c.initial_backoff = std::chrono::milliseconds(1);
    return c;
}

class FixedSearch : public PaperSearch {
public:
    explicit FixedSearch(std::vector<BibEntry> entries) : entries_(std::move(entries)) {}
    std::vector<BibEntry> search(const std::string&, int) override { return entries_; }

private:
    std::vector<BibEntry> entries_;
};

BibEntry entry(const std::string& id, const std::string& title) {
    return BibEntry{id, title, {"A. Author"}, title + " abstract", "http://arxiv.org/abs/" + id, {title + " abstract"}};
}

} // namespace

TEST(QueryLines, ExactlyThreeInOrder) {
    EXPECT_EQ(parse_query_lines("1. a?\n2. b?\n3. c?"), (std::vector<std::string>{"a?", "b?", "c?"}));
    EXPECT_EQ(parse_query_lines("Sure:\n 1) a\n\n2) b\n3) c\nThanks"), (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_FALSE(parse_query_lines("1. a\n2. b"));
    EXPECT_FALSE(parse_query_lines("1. a\n2. b\n3. c\n4. d"));
    EXPECT_FALSE(parse_query_lines("1. a\n3. b\n2. c"));
    EXPECT_FALSE(parse_query_lines("1. a\n2.   \n3. c"));
    EXPECT_FALSE(parse_query_lines(""));
}

TEST(GenerateQueries, RetriesThenFails) {
    int calls = 0;
    CallbackChatClient llm(
        [&](std::span<const ChatMessage>) {
            return ++calls == 1 ? std::string("1. only one") : std::string("1. a\n2. b\n3. c");
        },
        8, 2);
    EXPECT_EQ(generate_queries(fixture_paper(), llm)[2], "c");
    EXPECT_EQ(calls, 2);

    CallbackChatClient stubborn([](std::span<const ChatMessage>) { return std::string("no questions"); }, 8, 2);
    EXPECT_EQ(error_kind([&] { generate_queries(fixture_paper(), stubborn); }), ErrorKind::QueryGenerationFailed);
}

TEST(GenerateQueries, PromptContainsPaper) {
    std::string prompt;
    CallbackChatClient llm([&](std::span<const ChatMessage> m) {
        prompt = m.back().content;
        return std::string("1. a\n2. b\n3. c");
    });
    generate_queries(fixture_paper(), llm);
    EXPECT_NE(prompt.find("Routed Sparse Attention"), std::string::npos);
    EXPECT_EQ(prompt.find("{paper}"), std::string::npos);
}

TEST(AnswerQuery, WithAndWithoutSources) {
    std::vector<ChatMessage> seen;
    CallbackChatClient llm([&](std::span<const ChatMessage> m) {
        seen.assign(m.begin(), m.end());
        return std::string("answer");
    });
    answer_query("Why?", {}, llm);
    ASSERT_EQ(seen.size(), 1u);
    EXPECT_EQ(seen[0].content, "Why?");

    answer_query("Why?", {entry("2101.00001", "T")}, llm);
    ASSERT_EQ(seen.size(), 2u);
    EXPECT_EQ(seen[0].role, "system");
    EXPECT_EQ(seen[0].content, PromptTemplates::builtin().retrieval_system);
    EXPECT_EQ(seen[1].content,
              "Question: Why?\n\nRetrieved arXiv papers:\n\n[1] T (arXiv:2101.00001)\nAuthors: A. Author\nT abstract\n");
}

TEST(StripArtifacts, RemovesBlocksAndDelimiters) {
    const auto opts = ConsolidationOptions::defaults();
    EXPECT_EQ(strip_tool_artifacts("<tool_call>{\"q\":1}</tool_call>Answer [1].<|im_end|>", opts), "Answer [1].");
    EXPECT_EQ(strip_tool_artifacts("a\n\n\n\nb", opts), "a\n\nb");
    EXPECT_EQ(strip_tool_artifacts("x<tool_<tool_call>call>y", opts), "xy");
    EXPECT_EQ(strip_tool_artifacts("✿FUNCTION✿: search\n✿ARGS✿: {}\nDone", opts), ": search\n: {}\nDone");
    EXPECT_EQ(strip_tool_artifacts("<tool_response>unterminated", opts), "unterminated");
}

TEST(StripArtifacts, NoBlocklistedSubstringSurvivesRandomInput) {
    const auto opts = ConsolidationOptions::defaults();
    std::vector<std::string> pieces = {"text ", "\n", "[1]", "<", ">", "|", "_", "call", "tool", "/", "✿"};
    for (const auto& d : opts.delimiters) {
        pieces.push_back(d);
        pieces.push_back(d.substr(0, d.size() / 2));
        pieces.push_back(d.substr(d.size() / 2));
    }
    std::mt19937_64 gen(99);
    std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1), len(0, 40);
    for (int round = 0; round < 3000; ++round) {
        std::string s;
        for (std::size_t k = len(gen); k > 0; --k) s += pieces[pick(gen)];
        const auto out = strip_tool_artifacts(s, opts);
        for (const auto& d : opts.delimiters) {
            ASSERT_EQ(out.find(d), std::string::npos) << "input: " << s << "\noutput: " << out;
        }
    }
}

TEST(Consolidate, CleansEveryFieldAndBoundsPairs) {
    QueryAnswer qa{"q<|im_start|>", "<tool_call>x</tool_call>a", {entry("2101.00001", "T<|endoftext|>")}};
    const auto ctx = consolidate_context({qa});
    EXPECT_EQ(ctx.query_answers[0].query, "q");
    EXPECT_EQ(ctx.query_answers[0].answer, "a");
    EXPECT_EQ(ctx.query_answers[0].sources[0].title, "T");
    EXPECT_EQ(error_kind([] { consolidate_context({}); }), ErrorKind::InvalidInput);
    EXPECT_EQ(error_kind([&] { consolidate_context({qa, qa, qa, qa}); }), ErrorKind::InvalidInput);
}

TEST(RenderContext, NumbersSourcesGloballyAndDedupes) {
    RetrievedContext ctx;
    ctx.query_answers.push_back({"q1", "a1", {entry("1111.00001", "One"), entry("2222.00002", "Two")}});
    ctx.query_answers.push_back({"q2", "a2", {entry("2222.00002", "Two"), entry("3333.00003", "Three")}});
    ctx.query_answers.push_back({"q3", "a3", {}});
    const std::string expected =
        "## Retrieved Context\n"
        "\n### Query\nq1\n\n### Answer\na1\n\n### Sources\n[1] One (arXiv:1111.00001)\n[2] Two (arXiv:2222.00002)\n"
        "\n### Query\nq2\n\n### Answer\na2\n\n### Sources\n[2] Two (arXiv:2222.00002)\n[3] Three (arXiv:3333.00003)\n"
        "\n### Query\nq3\n\n### Answer\na3\n\n### Sources\n(none)\n"
        "\n### Bibliography\n"
        "[1] A. Author. One. arXiv:1111.00001. http://arxiv.org/abs/1111.00001\n"
        "[2] A. Author. Two. arXiv:2222.00002. http://arxiv.org/abs/2222.00002\n"
        "[3] A. Author. Three. arXiv:3333.00003. http://arxiv.org/abs/3333.00003\n"
        "\n### Ranked Excerpts\n"
        "[1] One (arXiv:1111.00001)\nOne abstract\n"
        "\n[2] Two (arXiv:2222.00002)\nTwo abstract\n"
        "\n[3] Three (arXiv:3333.00003)\nThree abstract\n";
    EXPECT_EQ(render_context(ctx), expected);
}

TEST(RunRetrieval, MatchesGoldenContext) {
    test::StubServer arxiv;
    test::add_arxiv_fixture_routes(arxiv);
    arxiv.start();
    ArxivClient search(stub_arxiv(arxiv));
    CallbackChatClient llm(test::retrieval_model_reply);
    const auto run = run_retrieval(fixture_paper(), llm, search, 2);
    EXPECT_EQ(run.queries[0], test::kFixtureQueries[0]);
    const std::string golden_path = test::fixture_path("retrieval/golden_context.txt");
    if (std::getenv("RK_UPDATE_GOLDEN")) std::ofstream(golden_path, std::ios::binary) << run.rendered;
    EXPECT_EQ(run.rendered, test::read_text(golden_path));
    for (const auto& d : ConsolidationOptions::defaults().delimiters) {
        EXPECT_EQ(run.rendered.find(d), std::string::npos) << d;
    }
    // Rerun is byte-identical.
    EXPECT_EQ(run_retrieval(fixture_paper(), llm, search, 2).rendered, run.rendered);
}

TEST(RunRetrieval, FailuresNameTheStage) {
    test::StubServer arxiv;
    arxiv.routes().Get("/api/query", [](const httplib::Request&, httplib::Response& res) { res.status = 400; });
    arxiv.start();
    ArxivClient search(stub_arxiv(arxiv));
    CallbackChatClient llm(test::retrieval_model_reply);
    try {
        run_retrieval(fixture_paper(), llm, search, 2);
        FAIL() << "expected a search failure";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::RetrievalUnavailable);
        EXPECT_EQ(std::string(e.what()).rfind("search: ", 0), 0u) << e.what();
    }
    CallbackChatClient mute([](std::span<const ChatMessage>) { return std::string("?"); }, 8, 0);
    try {
        run_retrieval(fixture_paper(), mute, search, 2);
        FAIL() << "expected a query generation failure";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::QueryGenerationFailed);
        EXPECT_EQ(std::string(e.what()).rfind("query generation: ", 0), 0u) << e.what();
    }
}

TEST(RetrievalBenefit, MajorityVotePerCriterion) {
    FixedSearch search({entry("2101.00001", "T")});
    CallbackChatClient answerer([](std::span<const ChatMessage> m) {
        return m.size() == 2 ? std::string("with sources") : std::string("plain");
    });
    // Three judges: 2 of 3 favour retrieval on factual accuracy, 1 of 3 on the others.
    std::atomic<int> call{0};
    CallbackChatClient judge([&](std::span<const ChatMessage> m) {
        const int k = call++ % 3;
        const bool factual = m.front().content == PromptTemplates::builtin().retrieval_factual_accuracy;
        return std::string(factual ? (k < 2 ? "0" : "1") : (k < 1 ? "0" : "1"));
    });
    const auto benefit = evaluate_retrieval_benefit({"q1", "q2"}, search, answerer, judge, 3);
    EXPECT_EQ(benefit[RetrievalCriterion::FactualAccuracy].wins, 2u);
    EXPECT_EQ(benefit[RetrievalCriterion::FactualAccuracy].rate(), 1.0);
    EXPECT_EQ(benefit[RetrievalCriterion::EvidenceQuality].wins, 0u);
    EXPECT_EQ(benefit[RetrievalCriterion::ClarityCoherence].usable, 2u);
}

TEST(RetrievalBenefit, EvenSplitIsNotAWin) {
    FixedSearch search({entry("2101.00001", "T")});
    CallbackChatClient answerer([](std::span<const ChatMessage>) { return std::string("ans"); });
    std::atomic<int> call{0};
    CallbackChatClient judge([&](std::span<const ChatMessage>) { return std::string(call++ % 2 ? "1" : "0"); });
    const auto benefit = evaluate_retrieval_benefit({"q"}, search, answerer, judge, 2);
    for (auto c : kRetrievalCriteria) EXPECT_EQ(benefit[c].wins, 0u);
}

TEST(RetrievalBenefit, UnparseableVerdictsExcludePairs) {
    FixedSearch search({entry("2101.00001", "T")});
    CallbackChatClient answerer([](std::span<const ChatMessage>) { return std::string("ans"); });
    CallbackChatClient judge(
        [](std::span<const ChatMessage> m) {
            const bool clarity = m.front().content == PromptTemplates::builtin().retrieval_clarity_coherence;
            return std::string(clarity ? "maybe" : "0");
        },
        8, 0);
    EXPECT_EQ(error_kind([&] { evaluate_retrieval_benefit({"q"}, search, answerer, judge, 1); }),
              ErrorKind::UndefinedMetric);
}

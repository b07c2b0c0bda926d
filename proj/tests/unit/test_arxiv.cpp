#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <mutex>

#include "reviewkit/arxiv.hpp"
#include "stub_server.hpp"
#include "test_util.hpp"

using namespace reviewkit;
using test::error_kind;

namespace {

std::string feed(const std::string& name) {
    return test::read_text(std::string(RK_TEST_DATA) + "/arxiv/" + name);
}

ArxivConfig fast_config(const test::StubServer& server) {
    ArxivConfig c;
    c.base_url = server.url("/api/query");
    c.min_interval = std::chrono::milliseconds(0);
    c.initial_backoff = std::chrono::milliseconds(1);
    c.timeout = std::chrono::seconds(5);
    return c;
}

} // namespace

TEST(AtomFeed, ParsesEntriesInFeedOrder) {
    const auto entries = parse_atom_feed(feed("feed_routing.xml"));
    ASSERT_EQ(entries.size(), 2u);
    const auto& first = entries[0];
    EXPECT_EQ(first.arxiv_id, "2101.03961v3");
    EXPECT_EQ(first.title, "Switch Transformers: Scaling to Trillion Parameter Models with Simple and Efficient Sparsity");
    EXPECT_EQ(first.authors, (std::vector<std::string>{"William Fedus", "Barret Zoph", "Noam Shazeer"}));
    EXPECT_EQ(first.url, "http://arxiv.org/abs/2101.03961v3");
    EXPECT_EQ(first.abstract.substr(0, 47), "In deep learning, models typically reuse the sa");
    EXPECT_EQ(first.abstract.find('\n'), std::string::npos);
    EXPECT_EQ(first.excerpts, std::vector<std::string>{first.abstract});
    EXPECT_EQ(entries[1].arxiv_id, "1701.06538v1");
}

TEST(AtomFeed, OldStyleIdsAndEntities) {
    const auto entries = parse_atom_feed(feed("feed_benchmarks.xml"));
    ASSERT_EQ(entries.size(), 2u);
    EXPECT_EQ(entries[1].arxiv_id, "cs/0112017v1");
    EXPECT_EQ(entries[1].title, "Evaluating Summaries & Extracts Without Reference Texts");
}

TEST(AtomFeed, EmptyFeedHasNoEntries) { EXPECT_TRUE(parse_atom_feed(feed("feed_empty.xml")).empty()); }

TEST(AtomFeed, ApiErrorEntryIsFeedParse) {
    EXPECT_EQ(error_kind([] { parse_atom_feed(feed("feed_error.xml")); }), ErrorKind::FeedParse);
}

TEST(AtomFeed, MalformedXmlIsFeedParse) {
    EXPECT_EQ(error_kind([] { parse_atom_feed(feed("feed_truncated.xml")); }), ErrorKind::FeedParse);
    EXPECT_EQ(error_kind([] { parse_atom_feed("<html><body>502</body></html>"); }), ErrorKind::FeedParse);
    EXPECT_EQ(error_kind([] { parse_atom_feed(""); }), ErrorKind::FeedParse);
}

TEST(SearchQuery, ContentWordsJoinedWithOr) {
    EXPECT_EQ(build_search_query("How do sparse mixture-of-experts routers scale?"),
              "all:sparse OR all:mixture-of-experts OR all:routers OR all:scale");
    EXPECT_EQ(build_search_query("What is the the GovReport benchmark"), "all:govreport OR all:benchmark");
    EXPECT_EQ(error_kind([] { build_search_query("what is the?"); }), ErrorKind::InvalidInput);
}

TEST(ArxivClient, SendsQueryAndParsesFeed) {
    test::StubServer server;
    std::string seen_query, seen_max, seen_sort;
    server.routes().Get("/api/query", [&](const httplib::Request& req, httplib::Response& res) {
        seen_query = req.get_param_value("search_query");
        seen_max = req.get_param_value("max_results");
        seen_sort = req.get_param_value("sortBy");
        res.set_content(feed("feed_routing.xml"), "application/atom+xml");
    });
    server.start();
    ArxivClient client(fast_config(server));
    const auto entries = client.search("Sparse routers?", 2);
    EXPECT_EQ(entries.size(), 2u);
    EXPECT_EQ(seen_query, "all:sparse OR all:routers");
    EXPECT_EQ(seen_max, "2");
    EXPECT_EQ(seen_sort, "relevance");
}

TEST(ArxivClient, RetriesUnavailableThenSucceeds) {
    test::StubServer server;
    std::atomic<int> calls{0};
    server.routes().Get("/api/query", [&](const httplib::Request&, httplib::Response& res) {
        if (++calls < 3) {
            res.status = 503;
            return;
        }
        res.set_content(feed("feed_attention.xml"), "application/atom+xml");
    });
    server.start();
    ArxivClient client(fast_config(server));
    EXPECT_EQ(client.search("attention cost", 5).size(), 2u);
    EXPECT_EQ(calls.load(), 3);
}

TEST(ArxivClient, ExhaustedRetriesAndClientErrors) {
    test::StubServer server;
    std::atomic<int> calls{0};
    server.routes().Get("/api/query", [&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        res.status = req.get_param_value("search_query").find("forbidden") != std::string::npos ? 400 : 500;
    });
    server.start();
    ArxivClient client(fast_config(server));
    EXPECT_EQ(error_kind([&] { client.search("anything", 5); }), ErrorKind::RetrievalUnavailable);
    EXPECT_EQ(calls.load(), 4);
    calls = 0;
    EXPECT_EQ(error_kind([&] { client.search("forbidden words", 5); }), ErrorKind::RetrievalUnavailable);
    EXPECT_EQ(calls.load(), 1);
}

TEST(ArxivClient, ErrorFeedSurfacesAsFeedParse) {
    test::StubServer server;
    server.routes().Get("/api/query", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(feed("feed_error.xml"), "application/atom+xml");
    });
    server.start();
    ArxivClient client(fast_config(server));
    EXPECT_EQ(error_kind([&] { client.search("anything", 5); }), ErrorKind::FeedParse);
}

TEST(ArxivClient, ValidatesArguments) {
    ArxivClient client;
    EXPECT_EQ(error_kind([&] { client.search("  ", 5); }), ErrorKind::InvalidInput);
    EXPECT_EQ(error_kind([&] { client.search("q", 0); }), ErrorKind::InvalidInput);
    EXPECT_EQ(error_kind([&] { client.search("q", 51); }), ErrorKind::InvalidInput);
}

TEST(ArxivClient, RequestsAreRateLimited) {
    test::StubServer server;
    std::mutex m;
    std::vector<std::chrono::steady_clock::time_point> stamps;
    server.routes().Get("/api/query", [&](const httplib::Request&, httplib::Response& res) {
        {
            std::lock_guard lock(m);
            stamps.push_back(std::chrono::steady_clock::now());
        }
        res.set_content(feed("feed_empty.xml"), "application/atom+xml");
    });
    server.start();
    auto config = fast_config(server);
    config.min_interval = std::chrono::milliseconds(100);
    ArxivClient client(config);
    {
        std::vector<std::jthread> threads;
        for (int i = 0; i < 4; ++i) threads.emplace_back([&] { client.search("graph networks", 3); });
    }
    ASSERT_EQ(stamps.size(), 4u);
    std::sort(stamps.begin(), stamps.end());
    // Arrival stamps carry delivery jitter on top of the send spacing.
    for (std::size_t i = 1; i < stamps.size(); ++i) {
        EXPECT_GE(stamps[i] - stamps[i - 1], std::chrono::milliseconds(80));
    }
}

TEST(RateLimiter, SpacesAcquisitions) {
    RateLimiter limiter(std::chrono::milliseconds(30));
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < 4; ++i) limiter.acquire();
    EXPECT_GE(std::chrono::steady_clock::now() - start, std::chrono::milliseconds(90));
}

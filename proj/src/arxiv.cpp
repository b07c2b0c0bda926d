#include "reviewkit/arxiv.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "reviewkit/error.hpp"
#include "url.hpp"

namespace reviewkit {

namespace {

namespace pt = boost::property_tree;

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> words = {
        "a",     "about", "an",   "and",  "are",   "as",    "at",    "be",    "been",  "by",
        "can",   "could", "do",   "does", "for",   "from",  "has",   "have",  "how",   "in",
        "is",    "it",    "its",  "of",   "on",    "or",    "other", "paper", "such",  "than",
        "that",  "the",   "their", "them", "there", "these", "this",  "those", "to",    "was",
        "were",  "what",  "when", "where", "which", "while", "who",   "why",   "will",  "with",
        "would", "any",   "into", "most",  "some",  "being", "did",   "recent",
    };
    return words;
}

std::string abs_id(const std::string& id_url) {
    const auto pos = id_url.find("/abs/");
    return pos == std::string::npos ? id_url : id_url.substr(pos + 5);
}

} // namespace

void RateLimiter::acquire() {
    Clock::time_point slot;
    {
        std::lock_guard lock(mutex_);
        const auto now = Clock::now();
        slot = std::max(now, next_slot_);
        next_slot_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
}

std::string build_search_query(std::string_view question) {
    std::vector<std::string> terms;
    std::set<std::string> seen;
    std::string word;
    auto flush = [&] {
        while (!word.empty() && word.back() == '-') word.pop_back();
        if (word.size() > 1 && !stopwords().contains(word) && seen.insert(word).second) {
            terms.push_back(word);
        }
        word.clear();
    };
    for (char c : question) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || (c == '-' && !word.empty())) {
            word.push_back(static_cast<char>(std::tolower(u)));
        } else {
            flush();
        }
    }
    flush();
    if (terms.empty()) {
        fail(ErrorKind::InvalidInput, fmt::format("query '{}' has no searchable terms", question));
    }
    std::string out;
    for (const auto& t : terms) {
        if (!out.empty()) out += " OR ";
        out += "all:" + t;
    }
    return out;
}

std::vector<BibEntry> parse_atom_feed(std::string_view xml) {
    pt::ptree tree;
    try {
        std::istringstream in{std::string(xml)};
        pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error& e) {
        fail(ErrorKind::FeedParse, fmt::format("malformed Atom feed: {}", e.what()));
    }
    const auto feed = tree.get_child_optional("feed");
    if (!feed) fail(ErrorKind::FeedParse, "Atom document has no <feed> root");

    std::vector<BibEntry> entries;
    for (const auto& [name, node] : *feed) {
        if (name != "entry") continue;
        const std::string id_url = collapse_whitespace(node.get<std::string>("id", ""));
        if (id_url.find("/api/errors") != std::string::npos) {
            fail(ErrorKind::FeedParse,
                 fmt::format("arXiv API error: {}", collapse_whitespace(node.get<std::string>("summary", ""))));
        }
        BibEntry e;
        e.arxiv_id = abs_id(id_url);
        if (!is_valid_arxiv_id(e.arxiv_id)) {
            fail(ErrorKind::FeedParse, fmt::format("entry id '{}' is not an arXiv identifier", id_url));
        }
        e.title = collapse_whitespace(node.get<std::string>("title", ""));
        e.abstract = collapse_whitespace(node.get<std::string>("summary", ""));
        e.url = id_url;
        for (const auto& [child_name, child] : node) {
            if (child_name == "author") {
                e.authors.push_back(collapse_whitespace(child.get<std::string>("name", "")));
            } else if (child_name == "link" &&
                       child.get<std::string>("<xmlattr>.rel", "") == "alternate") {
                e.url = child.get<std::string>("<xmlattr>.href", e.url);
            }
        }
        if (!e.abstract.empty()) e.excerpts.push_back(e.abstract);
        entries.push_back(std::move(e));
    }
    return entries;
}

ArxivClient::ArxivClient(ArxivConfig config)
    : config_(std::move(config)), limiter_(config_.min_interval) {
    (void)detail::split_url(config_.base_url);
}

std::vector<BibEntry> ArxivClient::search(const std::string& query, int max_results) {
    if (query.find_first_not_of(" \t\r\n") == std::string::npos) {
        fail(ErrorKind::InvalidInput, "search query is empty");
    }
    if (max_results < 1 || max_results > 50) {
        fail(ErrorKind::InvalidInput, fmt::format("max_results must be in [1, 50], got {}", max_results));
    }
    const auto url = detail::split_url(config_.base_url);
    const std::string target =
        fmt::format("{}?search_query={}&start=0&max_results={}&sortBy=relevance&sortOrder=descending",
                    url.path.empty() ? "/" : url.path, detail::url_encode(build_search_query(query)),
                    max_results);

    httplib::Client client(url.origin);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    client.set_connection_timeout(seconds.count());
    client.set_read_timeout(seconds.count());
    client.set_follow_location(true);

    std::string last_error;
    auto backoff = config_.initial_backoff;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        limiter_.acquire();
        auto res = client.Get(target);
        if (!res) {
            last_error = fmt::format("transport error: {}", httplib::to_string(res.error()));
        } else if (res->status == 200) {
            return parse_atom_feed(res->body);
        } else if (res->status == 429 || res->status >= 500) {
            last_error = fmt::format("HTTP {}", res->status);
        } else {
            fail(ErrorKind::RetrievalUnavailable,
                 fmt::format("arXiv answered HTTP {} for '{}'", res->status, query));
        }
        spdlog::debug("arXiv attempt {} failed: {}", attempt + 1, last_error);
    }
    fail(ErrorKind::RetrievalUnavailable,
         fmt::format("arXiv unavailable after {} attempts: {}", config_.max_retries + 1, last_error));
}

} // namespace reviewkit

#pragma once

#include <chrono>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "reviewkit/types.hpp"

namespace reviewkit {

/// Spaces request starts at least `interval` apart across all threads.
class RateLimiter {
public:
    using Clock = std::chrono::steady_clock;

    explicit RateLimiter(std::chrono::milliseconds interval) : interval_(interval) {}

    /// Blocks until this caller's slot arrives.
    void acquire();

private:
    std::chrono::milliseconds interval_;
    std::mutex mutex_;
    Clock::time_point next_slot_{};
};

/// Anything that can turn a question into ranked bibliography entries.
class PaperSearch {
public:
    virtual ~PaperSearch() = default;
    virtual std::vector<BibEntry> search(const std::string& query, int max_results) = 0;
};

struct ArxivConfig {
    std::string base_url = "https://export.arxiv.org/api/query";
    /// The export API asks clients to wait 3 s between requests.
    std::chrono::milliseconds min_interval{3000};
    int max_retries = 3;
    std::chrono::milliseconds timeout{30'000};
    std::chrono::milliseconds initial_backoff{1000};
};

/// Client for the arXiv export API (Atom responses). Feed order is kept as
/// the relevance ranking and excerpts start as the abstract.
class ArxivClient final : public PaperSearch {
public:
    explicit ArxivClient(ArxivConfig config = {});

    /// Throws InvalidInput for an empty query or max_results outside [1, 50],
    /// RetrievalUnavailable after retries, FeedParse for a malformed feed.
    std::vector<BibEntry> search(const std::string& query, int max_results) override;

    const ArxivConfig& config() const noexcept { return config_; }

private:
    ArxivConfig config_;
    RateLimiter limiter_;
};

/// search_query value for a natural-language question: content words,
/// each searched in all fields, OR-ed together.
std::string build_search_query(std::string_view question);

/// Parses an arXiv Atom feed; an empty feed gives an empty list.
std::vector<BibEntry> parse_atom_feed(std::string_view xml);

} // namespace reviewkit

#pragma once

// Shared domain types. Everything here is a plain value: construct, then
// share freely across threads.

#include <array>
#include <bitset>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reviewkit {

enum class Venue { ICLR, NeurIPS, ARR, COLING, CONLL, ACL, Other };

std::string_view to_string(Venue venue) noexcept;
/// Case-insensitive; unknown labels map to Venue::Other.
Venue parse_venue(std::string_view label) noexcept;

/// The paper under review.
struct PaperDocument {
    std::string id;
    std::string title;
    std::string body;
    Venue venue = Venue::Other;
    int year = 0;

    bool operator==(const PaperDocument&) const = default;
};

/// Exactly three non-blank questions produced for one paper.
class QuerySet {
public:
    static constexpr std::size_t kSize = 3;

    /// Throws InvalidInput unless there are exactly three non-blank queries.
    explicit QuerySet(std::vector<std::string> queries);

    const std::array<std::string, kSize>& queries() const noexcept { return queries_; }
    const std::string& operator[](std::size_t i) const { return queries_.at(i); }

    bool operator==(const QuerySet&) const = default;

private:
    std::array<std::string, kSize> queries_;
};

struct BibEntry {
    std::string arxiv_id;
    std::string title;
    std::vector<std::string> authors;
    std::string abstract;
    std::string url;
    /// Most relevant first.
    std::vector<std::string> excerpts;

    bool operator==(const BibEntry&) const = default;
};

/// True for new-style (2401.01234v2) and old-style (hep-th/9901001) ids.
bool is_valid_arxiv_id(std::string_view id);

struct QueryAnswer {
    std::string query;
    std::string answer;
    std::vector<BibEntry> sources;

    bool operator==(const QueryAnswer&) const = default;
};

struct RetrievedContext {
    std::vector<QueryAnswer> query_answers;

    bool operator==(const RetrievedContext&) const = default;
};

/// The four structural elements the format reward checks.
enum class Section { Thinking = 0, Summary = 1, Strengths = 2, Weaknesses = 3 };

inline constexpr std::array<Section, 4> kAllSections = {
    Section::Thinking, Section::Summary, Section::Strengths, Section::Weaknesses};

std::string_view to_string(Section section) noexcept;
std::optional<Section> parse_section(std::string_view label) noexcept;

class SectionSet {
public:
    SectionSet() = default;
    SectionSet(std::initializer_list<Section> sections) {
        for (Section s : sections) insert(s);
    }

    void insert(Section s) { bits_.set(static_cast<std::size_t>(s)); }
    bool contains(Section s) const { return bits_.test(static_cast<std::size_t>(s)); }
    std::size_t size() const { return bits_.count(); }
    bool empty() const { return bits_.none(); }
    std::vector<Section> to_vector() const;
    std::vector<std::string> labels() const;

    bool operator==(const SectionSet&) const = default;

private:
    std::bitset<4> bits_;
};

struct ParsedReview {
    std::optional<std::string> thinking;
    std::optional<std::string> summary;
    std::optional<std::vector<std::string>> strengths;
    std::optional<std::vector<std::string>> weaknesses;
    /// In [1, 10] when present.
    std::optional<double> rating;
    std::string raw;

    bool operator==(const ParsedReview&) const = default;
};

struct GroundTruth {
    /// Source venue scale.
    std::vector<double> reviewer_scores;
    /// Mean of normalized reviewer scores, on the 1-10 scale.
    double mean_rating = 0.0;
    std::string reference_review;

    bool operator==(const GroundTruth&) const = default;
};

struct ReviewExample {
    PaperDocument paper;
    RetrievedContext context;
    GroundTruth truth;

    bool operator==(const ReviewExample&) const = default;
};

struct RewardConfig {
    double sigma = 1.0;
    double alpha = 1.0;
    double beta = 0.25;
    double gamma = 0.5;

    /// Throws InvalidConfig when a field is out of range.
    void validate() const;

    bool operator==(const RewardConfig&) const = default;
};

struct RewardBreakdown {
    double r_rc = 0.0;
    int r_f = 0;
    double r_rule = 0.0;
    std::optional<int> r_judge;
    double r_final = 0.0;

    bool operator==(const RewardBreakdown&) const = default;
};

} // namespace reviewkit

#include "reviewkit/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>

#include <fmt/format.h>

#include "reviewkit/error.hpp"

namespace reviewkit {

namespace {

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

} // namespace

std::string_view to_string(Venue venue) noexcept {
    switch (venue) {
    case Venue::ICLR: return "ICLR";
    case Venue::NeurIPS: return "NeurIPS";
    case Venue::ARR: return "ARR";
    case Venue::COLING: return "COLING";
    case Venue::CONLL: return "CONLL";
    case Venue::ACL: return "ACL";
    case Venue::Other: return "other";
    }
    return "other";
}

Venue parse_venue(std::string_view label) noexcept {
    for (Venue v : {Venue::ICLR, Venue::NeurIPS, Venue::ARR, Venue::COLING, Venue::CONLL,
                    Venue::ACL}) {
        if (iequals(label, to_string(v))) return v;
    }
    return Venue::Other;
}

QuerySet::QuerySet(std::vector<std::string> queries) {
    if (queries.size() != kSize) {
        fail(ErrorKind::InvalidInput,
             fmt::format("a query set needs exactly 3 queries, got {}", queries.size()));
    }
    for (std::size_t i = 0; i < kSize; ++i) {
        if (is_blank(queries[i])) {
            fail(ErrorKind::InvalidInput, fmt::format("query {} is blank", i + 1));
        }
        queries_[i] = std::move(queries[i]);
    }
}

bool is_valid_arxiv_id(std::string_view id) {
    static const std::regex kNewStyle(R"(\d{4}\.\d{4,5}(v\d+)?)");
    static const std::regex kOldStyle(R"([a-z]+(-[a-z]+)*(\.[A-Z]{2})?/\d{7}(v\d+)?)");
    const std::string s(id);
    return std::regex_match(s, kNewStyle) || std::regex_match(s, kOldStyle);
}

std::string_view to_string(Section section) noexcept {
    switch (section) {
    case Section::Thinking: return "thinking";
    case Section::Summary: return "summary";
    case Section::Strengths: return "strengths";
    case Section::Weaknesses: return "weaknesses";
    }
    return "";
}

std::optional<Section> parse_section(std::string_view label) noexcept {
    for (Section s : kAllSections) {
        if (label == to_string(s)) return s;
    }
    return std::nullopt;
}

std::vector<Section> SectionSet::to_vector() const {
    std::vector<Section> out;
    for (Section s : kAllSections) {
        if (contains(s)) out.push_back(s);
    }
    return out;
}

std::vector<std::string> SectionSet::labels() const {
    std::vector<std::string> out;
    for (Section s : to_vector()) out.emplace_back(to_string(s));
    return out;
}

void RewardConfig::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        fail(ErrorKind::InvalidConfig, fmt::format("sigma must be > 0, got {}", sigma));
    }
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        fail(ErrorKind::InvalidConfig, fmt::format("alpha must be >= 0, got {}", alpha));
    }
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        fail(ErrorKind::InvalidConfig, fmt::format("beta must be >= 0, got {}", beta));
    }
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        fail(ErrorKind::InvalidConfig, fmt::format("gamma must be in [0, 1], got {}", gamma));
    }
}

} // namespace reviewkit

#include "reviewkit/review_parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <vector>

namespace reviewkit {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";

enum class Heading { Summary, Strengths, Weaknesses, Rating };
constexpr std::array<std::pair<Heading, std::string_view>, 4> kHeadings = {{
    {Heading::Summary, "summary"},
    {Heading::Strengths, "strengths"},
    {Heading::Weaknesses, "weaknesses"},
    {Heading::Rating, "rating"},
}};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        auto line = text.substr(start, end == std::string_view::npos ? text.npos : end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return lines;
}

struct HeadingLine {
    std::size_t level = 0;
    std::string_view title;
};

// ATX heading: up to three spaces, 1-6 '#', then whitespace or end of line.
std::optional<HeadingLine> heading_of(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && i < 3 && line[i] == ' ') ++i;
    std::size_t level = 0;
    while (i < line.size() && line[i] == '#') {
        ++level;
        ++i;
    }
    if (level == 0 || level > 6) return std::nullopt;
    if (i < line.size() && !is_space(line[i])) return std::nullopt;
    return HeadingLine{level, trim(line.substr(i))};
}

struct SectionMatch {
    Heading heading;
    std::string inline_content;
};

std::optional<SectionMatch> match_section(const HeadingLine& h) {
    if (h.level < 2) return std::nullopt;
    std::string title;
    for (char c : h.title) {
        if (c != '*' && c != '_') title.push_back(c);
    }
    const std::string lowered = lower(trim(title));
    for (const auto& [heading, keyword] : kHeadings) {
        if (lowered.rfind(keyword, 0) != 0) continue;
        std::string_view rest = std::string_view(lowered).substr(keyword.size());
        rest = trim(rest);
        if (rest.empty()) return SectionMatch{heading, {}};
        if (rest.front() == ':') {
            // Keep the original casing of the inline content.
            const auto colon = title.find(':');
            return SectionMatch{heading, std::string(trim(std::string_view(title).substr(colon + 1)))};
        }
    }
    return std::nullopt;
}

struct Sections {
    std::array<std::optional<std::string>, 4> bodies;

    std::optional<std::string>& operator[](Heading h) {
        return bodies[static_cast<std::size_t>(h)];
    }
};

// First occurrence of each recognised heading; a section runs until the
// next heading of any level.
Sections find_sections(std::string_view text) {
    Sections sections;
    Heading current = Heading::Summary;
    bool in_section = false;
    std::string buffer;
    auto flush = [&] {
        if (in_section && !sections[current]) sections[current] = buffer;
        in_section = false;
        buffer.clear();
    };
    for (std::string_view line : split_lines(text)) {
        if (auto h = heading_of(line)) {
            flush();
            if (auto match = match_section(*h)) {
                current = match->heading;
                in_section = true;
                buffer = match->inline_content;
            }
            continue;
        }
        if (in_section) {
            if (!buffer.empty()) buffer.push_back('\n');
            buffer.append(line);
        }
    }
    flush();
    return sections;
}

std::optional<double> first_number(std::string_view text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) continue;
        std::size_t j = i;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        if (j + 1 < text.size() && text[j] == '.' &&
            std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
            ++j;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        }
        return std::stod(std::string(text.substr(i, j - i)));
    }
    return std::nullopt;
}

std::vector<std::string> split_bullets(std::string_view body) {
    std::vector<std::string> items;
    bool continuing = false;
    for (std::string_view line : split_lines(body)) {
        const std::string_view t = trim(line);
        if (t.empty()) {
            continuing = false;
            continue;
        }
        if ((t.front() == '-' || t.front() == '*') && t.size() > 1 && is_space(t[1])) {
            items.emplace_back(trim(t.substr(1)));
            continuing = true;
        } else if (continuing && !items.empty()) {
            items.back().push_back(' ');
            items.back().append(t);
        } else {
            items.emplace_back(t);
            continuing = true;
        }
    }
    std::erase_if(items, [](const std::string& s) { return trim(s).empty(); });
    return items;
}

std::optional<std::string> text_field(const std::optional<std::string>& body,
                                      const ParseOptions& options) {
    if (!body) return std::nullopt;
    const std::string_view t = trim(*body);
    if (t.empty() && options.empty_section_is_missing) return std::nullopt;
    return std::string(t);
}

std::optional<std::vector<std::string>> list_field(const std::optional<std::string>& body,
                                                   const ParseOptions& options) {
    if (!body) return std::nullopt;
    auto items = split_bullets(*body);
    if (items.empty() && options.empty_section_is_missing) return std::nullopt;
    return items;
}

} // namespace

std::optional<double> extract_rating(std::string_view text) {
    Sections sections = find_sections(text);
    const auto& body = sections[Heading::Rating];
    if (!body) return std::nullopt;
    auto value = first_number(*body);
    if (!value) return std::nullopt;
    return std::clamp(*value, 1.0, 10.0);
}

ParsedReview parse_review(std::string_view text, const ParseOptions& options) {
    ParsedReview parsed;
    parsed.raw = std::string(text);

    std::string body;
    const auto open = text.find(kThinkOpen);
    const auto close = open == text.npos ? text.npos : text.find(kThinkClose, open + kThinkOpen.size());
    if (close != text.npos) {
        const auto inner = text.substr(open + kThinkOpen.size(), close - open - kThinkOpen.size());
        if (!trim(inner).empty() || !options.empty_section_is_missing) {
            parsed.thinking = std::string(trim(inner));
        }
        body.append(text.substr(0, open));
        body.push_back('\n');
        body.append(text.substr(close + kThinkClose.size()));
    } else {
        body = std::string(text);
    }

    Sections sections = find_sections(body);
    parsed.summary = text_field(sections[Heading::Summary], options);
    parsed.strengths = list_field(sections[Heading::Strengths], options);
    parsed.weaknesses = list_field(sections[Heading::Weaknesses], options);
    parsed.rating = extract_rating(body);
    return parsed;
}

SectionSet missing_sections(const ParsedReview& parsed) {
    SectionSet missing;
    if (!parsed.thinking) missing.insert(Section::Thinking);
    if (!parsed.summary) missing.insert(Section::Summary);
    if (!parsed.strengths) missing.insert(Section::Strengths);
    if (!parsed.weaknesses) missing.insert(Section::Weaknesses);
    return missing;
}

} // namespace reviewkit

#include "url.hpp"

#include <cctype>

#include <fmt/format.h>

#include "reviewkit/error.hpp"

namespace reviewkit::detail {

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        fail(ErrorKind::InvalidConfig, fmt::format("URL '{}' has no scheme", url));
    }
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        fail(ErrorKind::InvalidConfig, fmt::format("URL '{}' must use http or https", url));
    }
    const auto host_start = scheme_end + 3;
    const auto path_start = url.find('/', host_start);
    SplitUrl out;
    out.origin = url.substr(0, path_start);
    if (out.origin.size() <= host_start) {
        fail(ErrorKind::InvalidConfig, fmt::format("URL '{}' has no host", url));
    }
    if (path_start != std::string::npos) out.path = url.substr(path_start);
    while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
    return out;
}

std::string url_encode(const std::string& text) {
    std::string out;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out += fmt::format("%{:02X}", c);
        }
    }
    return out;
}

} // namespace reviewkit::detail

#pragma once

#include <string>

namespace reviewkit::detail {

struct SplitUrl {
    /// scheme://host[:port]
    std::string origin;
    /// Path with no trailing slash; may be empty.
    std::string path;
};

/// Throws InvalidConfig for anything other than http(s)://host[:port][/path].
SplitUrl split_url(const std::string& url);

std::string url_encode(const std::string& text);

} // namespace reviewkit::detail

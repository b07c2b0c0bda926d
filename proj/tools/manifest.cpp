#include "manifest.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "reviewkit/error.hpp"
#include "reviewkit/reward_service.hpp"

namespace reviewkit::cli {

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::Io, "cannot write " + tmp.string());
        out << content;
        if (!out) fail(ErrorKind::Io, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
    const auto now = std::chrono::system_clock::now();
    nlohmann::json j = {
        {"tool", "reviewkit"},
        {"version", kVersion},
        {"command", manifest.command},
        {"argv", manifest.argv},
        {"cwd", std::filesystem::current_path().string()},
        {"parameters", manifest.parameters},
        {"outputs", manifest.outputs},
        {"created_at", fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)))},
    };
    write_file_atomic(path, j.dump(2) + "\n");
}

} // namespace reviewkit::cli

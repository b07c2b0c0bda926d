#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace reviewkit::cli {

/// Run record written next to every output: enough to replay the command.
struct Manifest {
    std::string command;
    std::vector<std::string> argv;
    nlohmann::json parameters = nlohmann::json::object();
    std::vector<std::string> outputs;
};

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Writes `content` to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

} // namespace reviewkit::cli

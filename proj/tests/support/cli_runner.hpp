#pragma once

// Runs the reviewkit executable as a child process.

#include <filesystem>
#include <string>
#include <vector>

#include <sys/types.h>

namespace reviewkit::test {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

/// Runs the CLI with `args` and waits. Exit status 128+N for signal N.
CliResult run_cli(const std::vector<std::string>& args);

/// A long-running CLI child (for `serve`).
class CliProcess {
public:
    explicit CliProcess(const std::vector<std::string>& args);
    ~CliProcess();
    CliProcess(const CliProcess&) = delete;
    CliProcess& operator=(const CliProcess&) = delete;

    /// Polls stdout until it contains `needle` or the timeout passes.
    bool wait_for_output(const std::string& needle, int timeout_ms) const;
    std::string out() const;
    void signal(int sig) const;
    /// Waits for exit; same status convention as run_cli.
    int wait();

private:
    pid_t pid_ = -1;
    std::filesystem::path out_path_;
    std::filesystem::path err_path_;
    bool exited_ = false;
};

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

void write_text(const std::string& path, const std::string& content);

} // namespace reviewkit::test

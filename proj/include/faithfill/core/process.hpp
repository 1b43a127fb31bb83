#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace faithfill {

struct ProcessResult {
    int exit_code = -1;
    bool timed_out = false;
};

/// Runs argv[0] with the given arguments and waits at most `timeout`; the
/// child is killed on timeout. Throws RuntimeFailure if it cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, std::chrono::milliseconds timeout);

/// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(std::string_view prefix);
    ~ScratchDir();
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Location of a full-scale backend tool: $FAITHFILL_BACKEND_DIR/<name>.
/// Throws RuntimeFailure naming the variable when it is unset.
std::filesystem::path backend_tool(std::string_view name);

}  // namespace faithfill

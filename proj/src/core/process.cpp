#include "faithfill/core/process.hpp"

#include "faithfill/core/error.hpp"

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <thread>

extern char** environ;

namespace faithfill {

ProcessResult run_process(const std::vector<std::string>& argv, std::chrono::milliseconds timeout) {
    if (argv.empty()) throw RuntimeFailure("run_process: empty command");
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    pid_t pid = 0;
    if (const int rc = posix_spawnp(&pid, args[0], nullptr, nullptr, args.data(), environ); rc != 0) {
        throw RuntimeFailure("cannot start " + argv[0] + ": " + std::strerror(rc));
    }

    const auto deadline = std::chrono::steady_clock::now() + timeout;
    auto poll = std::chrono::milliseconds(1);
    while (true) {
        int status = 0;
        const pid_t done = waitpid(pid, &status, WNOHANG);
        if (done == pid) {
            if (WIFEXITED(status)) return {WEXITSTATUS(status), false};
            return {128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0), false};
        }
        if (done < 0 && errno != EINTR) throw RuntimeFailure("waitpid failed for " + argv[0]);
        if (std::chrono::steady_clock::now() >= deadline) {
            kill(pid, SIGKILL);
            waitpid(pid, &status, 0);
            return {-1, true};
        }
        std::this_thread::sleep_for(poll);
        poll = std::min(poll * 2, std::chrono::milliseconds(50));
    }
}

ScratchDir::ScratchDir(std::string_view prefix) {
    static std::atomic<unsigned> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    for (int attempt = 0; attempt < 100; ++attempt) {
        auto candidate = base / (std::string(prefix) + "-" + std::to_string(getpid()) + "-" +
                                 std::to_string(counter.fetch_add(1)));
        if (std::filesystem::create_directory(candidate)) {
            path_ = std::move(candidate);
            return;
        }
    }
    throw RuntimeFailure("cannot create scratch directory");
}

ScratchDir::~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::filesystem::path backend_tool(std::string_view name) {
    const char* dir = std::getenv("FAITHFILL_BACKEND_DIR");
    if (!dir || !*dir) {
        throw RuntimeFailure("full-scale backend '" + std::string(name) +
                             "' needs FAITHFILL_BACKEND_DIR to point at the adapter tools");
    }
    return std::filesystem::path(dir) / name;
}

}  // namespace faithfill

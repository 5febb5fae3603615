// POSIX subprocess adapter: line-delimited JSON over stdin/stdout, one
// request/response per invocation, hard wall-clock timeout.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "blindspot/errors.hpp"
#include "blindspot/targets.hpp"

namespace blindspot {

using nlohmann::json;

std::string subprocess_request_json(const ParameterSpace& space, const ThetaPoint& theta) {
    if (theta.raw.size() != space.dim())
        throw DimensionMismatch("subprocess request: theta does not match space");
    json params = json::object();
    for (std::size_t i = 0; i < space.dim(); ++i) params[space.param(i).name] = theta.raw[i];
    return json{{"params", params}}.dump() + "\n";
}

DetectionOutcome parse_detection_json(const std::string& text) {
    DetectionOutcome out;
    const json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object() || !j.contains("detected") ||
        !j["detected"].is_boolean()) {
        out.error = "malformed_output";
        out.raw_response = text;
        return out;
    }
    out.detected = j["detected"].get<bool>();
    out.face_count = out.detected ? 1 : 0;
    if (j.contains("face_count")) {
        if (!j["face_count"].is_number_integer()) {
            out.error = "malformed_output";
            out.raw_response = text;
            return out;
        }
        out.face_count = j["face_count"].get<int>();
    }
    if (out.detected != (out.face_count >= 1)) {
        out.error = "inconsistent_output";
        out.raw_response = text;
        return out;
    }
    out.raw_response = text;
    return out;
}

SubprocessResult run_subprocess(const std::vector<std::string>& argv, const std::string& input,
                                double timeout_s) {
    SubprocessResult res;
    if (argv.empty()) {
        res.error = "empty_command";
        return res;
    }

    // A child closing its stdin early must not kill the campaign.
    static const bool sigpipe_ignored = [] {
        ::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)sigpipe_ignored;

    int in_pipe[2];
    int out_pipe[2];
    if (::pipe(in_pipe) != 0) {
        res.error = "pipe_failed";
        return res;
    }
    if (::pipe(out_pipe) != 0) {
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        res.error = "pipe_failed";
        return res;
    }

    const pid_t pid = ::fork();
    if (pid < 0) {
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
        res.error = "fork_failed";
        return res;
    }
    if (pid == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
        std::vector<char*> cargv;
        cargv.reserve(argv.size() + 1);
        for (const std::string& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
        cargv.push_back(nullptr);
        ::execvp(cargv[0], cargv.data());
        ::_exit(127);
    }

    ::close(in_pipe[0]);
    ::close(out_pipe[1]);

    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    const auto remaining_ms = [&]() -> int {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                              deadline - std::chrono::steady_clock::now())
                              .count();
        return left > 0 ? static_cast<int>(left) : 0;
    };

    // Write the request; a stubborn child that never reads gets handled by
    // the timeout path below.
    std::size_t written = 0;
    while (written < input.size()) {
        const ssize_t k = ::write(in_pipe[1], input.data() + written, input.size() - written);
        if (k <= 0) break;
        written += static_cast<std::size_t>(k);
    }
    ::close(in_pipe[1]);

    char buf[4096];
    bool expired = false;
    for (;;) {
        struct pollfd pfd = {out_pipe[0], POLLIN, 0};
        const int pr = ::poll(&pfd, 1, std::min(remaining_ms(), 50));
        if (pr > 0) {
            const ssize_t k = ::read(out_pipe[0], buf, sizeof(buf));
            if (k > 0) {
                res.output.append(buf, static_cast<std::size_t>(k));
                continue;
            }
            break;  // EOF
        }
        if (remaining_ms() == 0) {
            expired = true;
            break;
        }
    }
    ::close(out_pipe[0]);

    int status = 0;
    if (expired) {
        ::kill(pid, SIGKILL);
        ::waitpid(pid, &status, 0);
        res.timed_out = true;
        return res;
    }
    // Child closed stdout; give it until the deadline to actually exit.
    for (;;) {
        const pid_t w = ::waitpid(pid, &status, WNOHANG);
        if (w == pid) break;
        if (w < 0) {
            res.error = "waitpid_failed";
            return res;
        }
        if (remaining_ms() == 0) {
            ::kill(pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            res.timed_out = true;
            return res;
        }
        ::usleep(2000);
    }
    if (WIFEXITED(status))
        res.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        res.exit_code = 128 + WTERMSIG(status);
    return res;
}

}  // namespace blindspot

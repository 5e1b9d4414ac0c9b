#include "verigrade/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <system_error>

namespace verigrade::backend {

namespace {

using Clock = std::chrono::steady_clock;

struct Pipe {
    int fds[2] = {-1, -1};
    Pipe() {
        if (::pipe2(fds, O_CLOEXEC) != 0) throw std::system_error(errno, std::generic_category(), "pipe2");
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    void close_read() {
        if (fds[0] >= 0) ::close(fds[0]);
        fds[0] = -1;
    }
    void close_write() {
        if (fds[1] >= 0) ::close(fds[1]);
        fds[1] = -1;
    }
};

// Only async-signal-safe calls here: the parent may be multi-threaded.
[[noreturn]] void child_exec(char* const* args, const char* cwd, const ProcessLimits& limits, Pipe& out, Pipe& err,
                             Pipe& status) {
    ::setpgid(0, 0);
    int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    ::dup2(out.fds[1], STDOUT_FILENO);
    ::dup2(err.fds[1], STDERR_FILENO);
    if (limits.max_memory > 0) {
        rlimit rl{limits.max_memory, limits.max_memory};
        ::setrlimit(RLIMIT_DATA, &rl);
    }
    int e = 0;
    if (::chdir(cwd) != 0) {
        e = errno;
    } else {
        ::execvp(args[0], args);
        e = errno;
    }
    [[maybe_unused]] auto n = ::write(status.fds[1], &e, sizeof e);
    ::_exit(127);
}

void drain(int fd, std::string& into, bool& open) {
    char buf[8192];
    ssize_t n = ::read(fd, buf, sizeof buf);
    if (n > 0) {
        into.append(buf, static_cast<std::size_t>(n));
    } else if (n == 0 || (errno != EINTR && errno != EAGAIN)) {
        open = false;
    }
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
                          const ProcessLimits& limits) {
    ProcessResult result;
    if (argv.empty()) {
        result.exec_failed = true;
        result.exec_errno = EINVAL;
        return result;
    }
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    std::string cwd_str = cwd.string();

    Pipe out, err, status;
    auto start = Clock::now();
    pid_t pid = ::fork();
    if (pid < 0) throw std::system_error(errno, std::generic_category(), "fork");
    if (pid == 0) child_exec(args.data(), cwd_str.c_str(), limits, out, err, status);

    ::setpgid(pid, pid);
    out.close_write();
    err.close_write();
    status.close_write();

    int child_errno = 0;
    ssize_t got = ::read(status.fds[0], &child_errno, sizeof child_errno);
    if (got == static_cast<ssize_t>(sizeof child_errno)) {
        result.exec_failed = true;
        result.exec_errno = child_errno;
    }

    bool out_open = true, err_open = true;
    auto deadline = start + limits.timeout;
    bool killed = false;
    bool reaped = false;
    int wstatus = 0;
    while (out_open || err_open) {
        auto now = Clock::now();
        if (!reaped && ::waitpid(pid, &wstatus, WNOHANG) == pid) {
            // The leader is gone; background children must not keep the pipes open.
            reaped = true;
            ::kill(-pid, SIGKILL);
            deadline = std::min(deadline, now + limits.grace);
        }
        if (!killed && !reaped && now >= deadline) {
            ::kill(-pid, SIGKILL);
            killed = true;
            result.timed_out = true;
            deadline = now + limits.grace;
        } else if (now >= deadline) {
            break;  // something outside the group still holds the pipe
        }
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
        pollfd fds[2] = {{out.fds[0], POLLIN, 0}, {err.fds[0], POLLIN, 0}};
        if (!out_open) fds[0].fd = -1;
        if (!err_open) fds[1].fd = -1;
        int rc = ::poll(fds, 2, static_cast<int>(std::max<long long>(1, std::min<long long>(left, 20))));
        if (rc < 0 && errno != EINTR) break;
        if (rc <= 0) continue;
        if (out_open && (fds[0].revents & (POLLIN | POLLHUP | POLLERR))) drain(out.fds[0], result.out, out_open);
        if (err_open && (fds[1].revents & (POLLIN | POLLHUP | POLLERR))) drain(err.fds[0], result.err, err_open);
    }

    while (!reaped) {
        pid_t w = ::waitpid(pid, &wstatus, killed ? 0 : WNOHANG);
        if (w == pid) break;
        if (w < 0 && errno != EINTR) break;
        if (w == 0) {
            // Pipes closed but the child is still running: wait for it within the deadline.
            if (Clock::now() >= deadline) {
                ::kill(-pid, SIGKILL);
                killed = true;
                result.timed_out = true;
            } else {
                ::usleep(5'000);
            }
        }
    }
    ::kill(-pid, SIGKILL);  // reap stragglers left in the group

    if (WIFEXITED(wstatus)) {
        result.exit_code = WEXITSTATUS(wstatus);
    } else if (WIFSIGNALED(wstatus)) {
        result.term_signal = WTERMSIG(wstatus);
    }
    result.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return result;
}

TempDir::TempDir(const std::filesystem::path& parent, const std::string& prefix) {
    std::string tmpl = (parent / (prefix + "XXXXXX")).string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw std::system_error(errno, std::generic_category(), "mkdtemp");
    path_ = tmpl;
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

}  // namespace verigrade::backend

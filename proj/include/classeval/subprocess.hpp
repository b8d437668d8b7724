#ifndef CLASSEVAL_SUBPROCESS_HPP
#define CLASSEVAL_SUBPROCESS_HPP

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <sys/types.h>

namespace classeval {

/// A `/bin/sh -c <command>` child with piped stdin/stdout and line-oriented I/O.
/// Stderr is inherited.
class ChildProcess {
public:
    explicit ChildProcess(const std::string& command);
    ~ChildProcess();
    ChildProcess(const ChildProcess&) = delete;
    ChildProcess& operator=(const ChildProcess&) = delete;

    /// Returns false once the child's stdin is closed.
    bool write_line(std::string_view line);

    /// Reads one '\n'-terminated line. Returns nullopt on EOF or timeout;
    /// `timed_out()` tells which.
    std::optional<std::string> read_line(std::chrono::milliseconds timeout);

    bool timed_out() const noexcept { return timed_out_; }

    /// Exit status if the child has terminated (-signal for a signal), else nullopt.
    std::optional<int> exit_status();

private:
    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
    bool timed_out_ = false;
    std::optional<int> status_;
};

}  // namespace classeval

#endif  // CLASSEVAL_SUBPROCESS_HPP

#include "rca/executor.hpp"

#include "rca/error.hpp"
#include "rca/text.hpp"

#include <nlohmann/json.hpp>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>

extern char** environ;

namespace rca {

std::string_view to_string(TraceBackend backend) {
    return backend == TraceBackend::plain ? "plain" : "traced";
}

TraceBackend parse_trace_backend(std::string_view text) {
    if (text == "plain") return TraceBackend::plain;
    if (text == "traced") return TraceBackend::traced;
    throw Error(ErrorKind::config, "executor backend must be plain or traced, got '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// LineTrace

std::size_t LineTrace::executable() const {
    return static_cast<std::size_t>(std::count_if(lines.begin(), lines.end(), [](const TraceLine& l) {
        return l.kind != LineKind::non_executable;
    }));
}

std::size_t LineTrace::executed() const {
    return static_cast<std::size_t>(std::count_if(lines.begin(), lines.end(), [](const TraceLine& l) {
        return l.kind == LineKind::executed;
    }));
}

std::vector<std::size_t> LineTrace::never_executed_lines() const {
    std::vector<std::size_t> out;
    for (const auto& l : lines) {
        if (l.kind == LineKind::never_executed) out.push_back(l.line);
    }
    return out;
}

LineTrace parse_cover_text(std::string_view content) {
    static constexpr std::string_view kMarker = ">>>>>>";
    LineTrace trace;
    std::size_t number = 0;
    for (auto raw : text::split_lines_keep(content)) {
        ++number;
        std::string_view line = raw;
        if (!line.empty() && line.back() == '\n') line.remove_suffix(1);

        TraceLine entry;
        entry.line = number;
        if (text::starts_with(line, kMarker)) {
            entry.kind = LineKind::never_executed;
            auto rest = line.substr(kMarker.size());
            if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
            entry.source = std::string(rest);
        } else {
            std::size_t i = 0;
            while (i < line.size() && line[i] == ' ') ++i;
            std::size_t digits_end = i;
            while (digits_end < line.size() && std::isdigit(static_cast<unsigned char>(line[digits_end]))) {
                ++digits_end;
            }
            if (digits_end > i && digits_end < line.size() && line[digits_end] == ':') {
                entry.kind = LineKind::executed;
                entry.count = std::stoull(std::string(line.substr(i, digits_end - i)));
                auto rest = line.substr(digits_end + 1);
                if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
                entry.source = std::string(rest);
            } else if (line.empty() || line.front() == ' ' || line.front() == '\t') {
                entry.kind = LineKind::non_executable;
                std::size_t strip = 0;
                while (strip < line.size() && strip < 7 && line[strip] == ' ') ++strip;
                entry.source = std::string(line.substr(strip));
            } else {
                throw Error(ErrorKind::parse, "malformed trace prefix on line " + std::to_string(number) +
                                                  ": '" + std::string(line.substr(0, 40)) + "'");
            }
        }
        trace.lines.push_back(std::move(entry));
    }
    return trace;
}

LineTrace parse_cover_file(const fs::path& path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) throw Error(ErrorKind::not_found, "trace file not found: " + path.string());
    return parse_cover_text(text::read_file(path));
}

std::string render_cover(const LineTrace& trace) {
    std::string out;
    char prefix[32];
    for (const auto& l : trace.lines) {
        switch (l.kind) {
            case LineKind::executed:
                std::snprintf(prefix, sizeof prefix, "%5llu: ", static_cast<unsigned long long>(l.count));
                out += prefix;
                break;
            case LineKind::never_executed: out += ">>>>>> "; break;
            case LineKind::non_executable: out += "       "; break;
        }
        out += l.source;
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Process runner

namespace {

bool is_credential_name(std::string_view name, const std::vector<std::string>& scrubbed) {
    if (std::find(scrubbed.begin(), scrubbed.end(), name) != scrubbed.end()) return true;
    const auto upper = [&] {
        std::string s(name);
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
        return s;
    }();
    for (std::string_view pattern : {"API_KEY", "SECRET", "TOKEN", "PASSWORD"}) {
        if (upper.find(pattern) != std::string::npos) return true;
    }
    return false;
}

void close_fd(int& fd) {
    if (fd >= 0) ::close(fd);
    fd = -1;
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const fs::path& cwd, double timeout_seconds,
                          const std::vector<std::string>& scrubbed_env) {
    if (argv.empty()) throw Error(ErrorKind::spawn, "empty command");
    if (timeout_seconds <= 0) throw Error(ErrorKind::validation, "timeout must be positive");

    // Prepare everything the child needs before fork.
    std::vector<std::string> env_storage;
    for (char** e = environ; e && *e; ++e) {
        std::string_view entry(*e);
        const auto eq = entry.find('=');
        if (is_credential_name(entry.substr(0, eq), scrubbed_env)) continue;
        env_storage.emplace_back(entry);
    }
    std::vector<char*> envp;
    for (auto& e : env_storage) envp.push_back(e.data());
    envp.push_back(nullptr);
    std::vector<std::string> argv_storage(argv.begin(), argv.end());
    std::vector<char*> args;
    for (auto& a : argv_storage) args.push_back(a.data());
    args.push_back(nullptr);
    const std::string cwd_str = cwd.string();

    int out_pipe[2], err_pipe[2], exec_pipe[2];
    if (::pipe(out_pipe) != 0) throw Error(ErrorKind::spawn, std::string("pipe: ") + std::strerror(errno));
    if (::pipe(err_pipe) != 0) throw Error(ErrorKind::spawn, std::string("pipe: ") + std::strerror(errno));
    if (::pipe2(exec_pipe, O_CLOEXEC) != 0) throw Error(ErrorKind::spawn, std::string("pipe: ") + std::strerror(errno));

    const auto start = std::chrono::steady_clock::now();
    const pid_t pid = ::fork();
    if (pid < 0) throw Error(ErrorKind::spawn, std::string("fork: ") + std::strerror(errno));

    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::dup2(err_pipe[1], STDERR_FILENO);
        ::close(out_pipe[0]);
        ::close(out_pipe[1]);
        ::close(err_pipe[0]);
        ::close(err_pipe[1]);
        ::close(exec_pipe[0]);
        int fail = 0;
        if (::chdir(cwd_str.c_str()) != 0) {
            fail = errno;
        } else {
            ::execvpe(args[0], args.data(), envp.data());
            fail = errno;
        }
        [[maybe_unused]] auto n = ::write(exec_pipe[1], &fail, sizeof fail);
        ::_exit(127);
    }

    ::setpgid(pid, pid);
    ::close(out_pipe[1]);
    ::close(err_pipe[1]);
    ::close(exec_pipe[1]);

    int exec_errno = 0;
    const auto got = ::read(exec_pipe[0], &exec_errno, sizeof exec_errno);
    ::close(exec_pipe[0]);
    if (got == static_cast<ssize_t>(sizeof exec_errno)) {
        int status = 0;
        ::waitpid(pid, &status, 0);
        ::close(out_pipe[0]);
        ::close(err_pipe[0]);
        throw Error(ErrorKind::spawn, "cannot run '" + argv[0] + "': " + std::strerror(exec_errno));
    }

    ProcessResult result;
    int fds[2] = {out_pipe[0], err_pipe[0]};
    std::string* sinks[2] = {&result.stdout_text, &result.stderr_text};
    const auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                      std::chrono::duration<double>(timeout_seconds));
    char buf[8192];
    while (fds[0] >= 0 || fds[1] >= 0) {
        const auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            result.timed_out = true;
            break;
        }
        const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
        pollfd pfds[2];
        nfds_t n = 0;
        int which[2];
        for (int i = 0; i < 2; ++i) {
            if (fds[i] >= 0) {
                pfds[n] = {fds[i], POLLIN, 0};
                which[n] = i;
                ++n;
            }
        }
        const int ready = ::poll(pfds, n, static_cast<int>(std::min<long long>(remaining + 1, 1000)));
        if (ready < 0) {
            if (errno == EINTR) continue;
            break;
        }
        for (nfds_t k = 0; k < n; ++k) {
            if (!(pfds[k].revents & (POLLIN | POLLHUP | POLLERR))) continue;
            const int i = which[k];
            const auto r = ::read(fds[i], buf, sizeof buf);
            if (r > 0) {
                sinks[i]->append(buf, static_cast<std::size_t>(r));
            } else if (r == 0 || errno != EINTR) {
                close_fd(fds[i]);
            }
        }
    }

    int status = 0;
    if (result.timed_out) {
        ::kill(-pid, SIGKILL);
        ::waitpid(pid, &status, 0);
        result.exit_status = -1;
    } else {
        // Streams closed; the child may still be exiting.
        while (true) {
            const pid_t w = ::waitpid(pid, &status, WNOHANG);
            if (w == pid) break;
            if (std::chrono::steady_clock::now() >= deadline) {
                ::kill(-pid, SIGKILL);
                ::waitpid(pid, &status, 0);
                result.timed_out = true;
                break;
            }
            ::usleep(2000);
        }
        if (result.timed_out) {
            result.exit_status = -1;
        } else if (WIFEXITED(status)) {
            result.exit_status = WEXITSTATUS(status);
        } else if (WIFSIGNALED(status)) {
            result.exit_status = 128 + WTERMSIG(status);
        }
    }
    close_fd(fds[0]);
    close_fd(fds[1]);
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

// ---------------------------------------------------------------------------
// Script execution

std::string cover_file_for(std::string_view script) {
    const fs::path p{std::string(script)};
    return (p.parent_path() / (p.stem().string() + "_execution_trace.cover")).generic_string();
}

std::string shim_report_for(std::string_view script) {
    const fs::path p{std::string(script)};
    return (p.parent_path() / (p.stem().string() + "_execution_trace.json")).generic_string();
}

ExecutionReport execute_script(const Workspace& workspace, std::string_view script,
                               const std::vector<std::string>& arguments, const ExecutorOptions& options) {
    const auto path = workspace.resolve(script);
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) throw Error(ErrorKind::not_found, "script not found: " + std::string(script));
    const auto relative = fs::relative(path, workspace.root()).generic_string();

    ExecutionReport report;
    report.script = relative;
    report.arguments = arguments;
    report.timeout_seconds = workspace.manifest().timeout_seconds.value_or(options.timeout_seconds);

    std::vector<std::string> argv;
    const bool traced = options.backend == TraceBackend::traced;
    if (traced) {
        argv = text::split_arguments(options.trace_shim);
        if (argv.empty()) throw Error(ErrorKind::config, "trace_shim command is empty");
        argv.push_back(relative);
        argv.insert(argv.end(), arguments.begin(), arguments.end());
        argv.push_back("--out");
        argv.push_back(path.parent_path().string());
    } else {
        argv = text::split_arguments(workspace.manifest().script_interpreter);
        argv.push_back(relative);
        argv.insert(argv.end(), arguments.begin(), arguments.end());
    }

    const auto sidecar = path.parent_path() / fs::path(shim_report_for(relative)).filename();
    fs::path cover = path.parent_path() / fs::path(cover_file_for(relative)).filename();
    if (traced) {
        // A report left by an earlier run must not pass for this one.
        fs::remove(sidecar, ec);
        fs::remove(cover, ec);
    }

    auto result = run_process(argv, workspace.root(), report.timeout_seconds, options.scrubbed_env);
    report.exit_status = result.exit_status;
    report.timed_out = result.timed_out;
    report.stdout_text = std::move(result.stdout_text);
    report.stderr_text = std::move(result.stderr_text);
    report.duration_seconds = result.seconds;

    if (traced && !report.timed_out) {
        if (fs::is_regular_file(sidecar, ec)) {
            const auto doc = nlohmann::json::parse(text::read_file(sidecar), nullptr, false);
            if (!doc.is_discarded() && doc.is_object()) {
                if (doc.contains("exit_status") && doc["exit_status"].is_number_integer()) {
                    report.exit_status = doc["exit_status"].get<int>();
                }
                if (doc.contains("cover_path") && doc["cover_path"].is_string()) {
                    fs::path reported = doc["cover_path"].get<std::string>();
                    cover = reported.is_absolute() ? reported : path.parent_path() / reported;
                }
            } else {
                report.trace_error = "trace report is not valid JSON";
            }
        } else {
            report.trace_error = "trace shim wrote no report";
        }
        if (report.trace_error.empty()) {
            try {
                report.trace = parse_cover_file(cover);
                report.trace_file = fs::relative(cover, workspace.root()).generic_string();
            } catch (const Error& e) {
                report.trace_error = e.what();
            }
        }
    }

    if (report.exit_status == 0 && !report.timed_out) {
        try {
            const auto values = match_performance(workspace.manifest().perf_pattern, report.stdout_text);
            if (values.size() == 1) report.extracted_performance = values.front();
        } catch (const Error&) {
            // Unparseable captures leave the performance absent.
        }
    }
    return report;
}

namespace {

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

std::string render_observation(const ExecutionReport& report) {
    std::string out = "Executed " + report.script;
    for (const auto& a : report.arguments) out += " " + a;
    out += "\n";
    if (report.timed_out) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "timed out: the script was stopped after the %s second limit (elapsed %.0f seconds)\n",
                      format_number(report.timeout_seconds).c_str(), report.duration_seconds);
        out += buf;
    } else {
        out += "exit status: " + std::to_string(report.exit_status) + "\n";
    }
    auto stream = [&](std::string_view label, const std::string& content) {
        out += label;
        out += ":\n";
        if (content.empty()) {
            out += "(empty)\n";
        } else {
            out += text::truncate_to(content, kMaxStreamChars);
            if (out.back() != '\n') out += '\n';
        }
    };
    stream("stdout", report.stdout_text);
    stream("stderr", report.stderr_text);
    if (report.extracted_performance) {
        out += "performance: " + format_number(*report.extracted_performance) + "\n";
    }
    if (report.trace) {
        const auto never = report.trace->never_executed_lines();
        out += "execution trace (" + report.trace_file + "): " + std::to_string(report.trace->lines.size()) +
               " lines, " + std::to_string(report.trace->executable()) + " executable, " +
               std::to_string(report.trace->executed()) + " executed, " + std::to_string(never.size()) +
               " never executed\n";
        if (!never.empty()) {
            out += "never executed lines: ";
            const auto shown = std::min(never.size(), kMaxNeverExecutedListed);
            for (std::size_t i = 0; i < shown; ++i) {
                if (i) out += ", ";
                out += std::to_string(never[i]);
            }
            if (never.size() > shown) out += " ... and " + std::to_string(never.size() - shown) + " more";
            out += "\n";
        }
    } else if (!report.trace_error.empty()) {
        out += "execution trace unavailable: " + report.trace_error + "\n";
    }
    return out;
}

}  // namespace rca

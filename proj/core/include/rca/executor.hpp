#pragma once

#include "rca/workspace.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rca {

enum class TraceBackend { plain, traced };
std::string_view to_string(TraceBackend backend);
TraceBackend parse_trace_backend(std::string_view text);

struct ExecutorOptions {
    TraceBackend backend = TraceBackend::plain;
    double timeout_seconds = 1800.0;  // overridden by the workspace manifest when it sets one
    std::string trace_shim = "trace_shim";
    // Removed from the child's environment in addition to the built-in
    // credential patterns (*API_KEY*, *SECRET*, *TOKEN*, *PASSWORD*).
    std::vector<std::string> scrubbed_env;
};

enum class LineKind { executed, never_executed, non_executable };

struct TraceLine {
    std::size_t line = 0;
    LineKind kind = LineKind::non_executable;
    std::uint64_t count = 0;
    std::string source;
};

// Per-line execution counts in the `.cover` convention: "N: " prefixes count
// executions, ">>>>>>" marks executable lines that never ran, anything else
// is non-executable.
struct LineTrace {
    std::vector<TraceLine> lines;

    std::size_t executable() const;
    std::size_t executed() const;
    std::vector<std::size_t> never_executed_lines() const;
    const TraceLine& at(std::size_t line_number) const { return lines.at(line_number - 1); }
};

LineTrace parse_cover_text(std::string_view text);
LineTrace parse_cover_file(const fs::path& path);
std::string render_cover(const LineTrace& trace);

struct ProcessResult {
    int exit_status = 0;  // 128 + signal for signalled children, -1 on timeout
    bool timed_out = false;
    std::string stdout_text;
    std::string stderr_text;
    double seconds = 0.0;
};

// Runs argv[0] (PATH lookup) with `cwd` as working directory, capturing both
// streams. The whole process group is killed once `timeout_seconds` elapses.
ProcessResult run_process(const std::vector<std::string>& argv, const fs::path& cwd,
                          double timeout_seconds, const std::vector<std::string>& scrubbed_env = {});

struct ExecutionReport {
    std::string script;
    std::vector<std::string> arguments;
    int exit_status = 0;
    bool timed_out = false;
    double timeout_seconds = 0.0;
    std::string stdout_text;
    std::string stderr_text;
    double duration_seconds = 0.0;
    std::optional<LineTrace> trace;
    std::string trace_file;  // workspace-relative .cover path when traced
    std::string trace_error;
    std::optional<double> extracted_performance;
};

inline constexpr std::size_t kMaxStreamChars = 2000;
inline constexpr std::size_t kMaxNeverExecutedListed = 50;

// "<stem>_execution_trace.cover" next to the script.
std::string cover_file_for(std::string_view script);
std::string shim_report_for(std::string_view script);

ExecutionReport execute_script(const Workspace& workspace, std::string_view script,
                               const std::vector<std::string>& arguments, const ExecutorOptions& options);

std::string render_observation(const ExecutionReport& report);

}  // namespace rca

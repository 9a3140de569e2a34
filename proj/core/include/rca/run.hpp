#pragma once

#include "rca/config.hpp"
#include "rca/evaluation.hpp"
#include "rca/gateway.hpp"
#include "rca/planner.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rca {

struct RunRequest {
    fs::path workspace;
    RunMode mode = RunMode::agent;
    AppConfig config = AppConfig::defaults();
    GatewayMode gateway_mode = GatewayMode::live;
    fs::path cassette;  // required for replay, written in record mode
    fs::path runs_dir = "runs";
    std::optional<int> max_steps;
    // Replaces the configured providers (live and record modes only).
    std::map<RoleTag, std::shared_ptr<Provider>> providers;
};

struct RunOutcome {
    std::string run_id;
    fs::path run_dir;
    RunResult result;
    std::map<RoleTag, std::size_t> gateway_calls;
    std::size_t network_attempts_in_replay = 0;  // sentinel calls; always 0 for a sound replay
};

// "<UTC yyyymmddThhmmssZ>-<6 hex>"
std::string make_run_id();

// Copies the workspace into a fresh runs/<run_id>/ directory, runs the
// requested mode there and writes manifest.json last. Validation, usage and
// lock problems throw before any run directory is created.
RunOutcome execute_run(const RunRequest& request);

// Exit status of the run command: 0 for a final answer (or a written script
// in single mode), 1 otherwise.
int run_exit_code(const RunResult& result, RunMode mode);

// Copies a workspace tree, leaving out the lock file.
void copy_workspace(const fs::path& from, const fs::path& to);

struct EvalInputs {
    fs::path runs_dir;
    std::vector<ScoreRow> scores;
    ExecutorOptions executor;
};

// One assessment per run directory (those holding manifest.json), sorted by
// run id. Each generated script is re-executed in a scratch copy of the run's
// workspace. Score rows naming unknown runs are an error.
std::vector<RunAssessment> assess_runs(const EvalInputs& inputs, std::vector<std::string>& warnings);

}  // namespace rca

#include "rca/run.hpp"

#include "rca/error.hpp"
#include "rca/research_log.hpp"
#include "rca/text.hpp"
#include "rca/workers.hpp"

#include <nlohmann/json.hpp>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <random>
#include <set>
#include <algorithm>

namespace rca {

using ojson = nlohmann::ordered_json;

namespace {

std::string utc_stamp(std::chrono::system_clock::time_point t, const char* format) {
    const auto secs = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[64];
    std::strftime(buf, sizeof buf, format, &tm);
    return buf;
}

// Holds an exclusive advisory lock on <workspace>/.rca.lock for live runs.
class WorkspaceLock {
public:
    explicit WorkspaceLock(const fs::path& workspace) {
        const auto path = workspace / kLockFile;
        fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
        if (fd_ < 0) throw Error(ErrorKind::io, "cannot open lock file " + path.string());
        if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
            ::close(fd_);
            throw Error(ErrorKind::usage, "another live run is using workspace " + workspace.string());
        }
    }
    ~WorkspaceLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    WorkspaceLock(const WorkspaceLock&) = delete;
    WorkspaceLock& operator=(const WorkspaceLock&) = delete;

private:
    int fd_ = -1;
};

fs::path create_run_dir(const fs::path& runs_dir, std::string& run_id) {
    fs::create_directories(runs_dir);
    for (int attempt = 0; attempt < 16; ++attempt) {
        run_id = make_run_id();
        const auto dir = runs_dir / run_id;
        std::error_code ec;
        if (fs::create_directory(dir, ec)) return dir;
        if (ec) throw Error(ErrorKind::io, "cannot create run directory " + dir.string() + ": " + ec.message());
    }
    throw Error(ErrorKind::io, "could not find an unused run id in " + runs_dir.string());
}

}  // namespace

std::string make_run_id() {
    static std::mt19937_64 rng{std::random_device{}()};
    char suffix[8];
    std::snprintf(suffix, sizeof suffix, "%06llx", static_cast<unsigned long long>(rng() & 0xffffff));
    return utc_stamp(std::chrono::system_clock::now(), "%Y%m%dT%H%M%SZ") + "-" + suffix;
}

int run_exit_code(const RunResult& result, RunMode mode) {
    if (mode == RunMode::single) return result.generated_script && result.termination == Termination::final_answer ? 0 : 1;
    return result.termination == Termination::final_answer ? 0 : 1;
}

void copy_workspace(const fs::path& from, const fs::path& to) {
    fs::create_directories(to);
    for (const auto& entry : fs::directory_iterator(from)) {
        const auto name = entry.path().filename();
        if (name == kLockFile) continue;
        fs::copy(entry.path(), to / name, fs::copy_options::recursive | fs::copy_options::copy_symlinks);
    }
}

RunOutcome execute_run(const RunRequest& request) {
    if (request.gateway_mode == GatewayMode::replay && request.cassette.empty()) {
        throw Error(ErrorKind::usage, "replay needs a cassette");
    }
    if (request.gateway_mode == GatewayMode::record && request.cassette.empty()) {
        throw Error(ErrorKind::usage, "record needs a cassette path to write");
    }
    const auto issues = validate_workspace(request.workspace);
    if (!issues.empty()) {
        throw Error(ErrorKind::config, "invalid workspace " + request.workspace.string() + ":\n  " + text::join(issues, "\n  "));
    }
    auto config = request.config;
    if (request.max_steps) {
        if (*request.max_steps <= 0) throw Error(ErrorKind::usage, "--max-steps must be positive");
        config.max_steps = *request.max_steps;
    }
    std::vector<CassetteEntry> cassette;
    if (request.gateway_mode == GatewayMode::replay) cassette = load_cassette(request.cassette);

    std::optional<WorkspaceLock> lock;
    if (request.gateway_mode != GatewayMode::replay) lock.emplace(request.workspace);

    RunOutcome outcome;
    const auto started = std::chrono::system_clock::now();
    outcome.run_dir = create_run_dir(request.runs_dir, outcome.run_id);
    const auto& dir = outcome.run_dir;
    copy_workspace(request.workspace, dir / "workspace");

    std::map<RoleTag, std::shared_ptr<Provider>> providers;
    std::shared_ptr<SentinelProvider> sentinel;
    if (request.gateway_mode == GatewayMode::replay) {
        sentinel = std::make_shared<SentinelProvider>();
        for (const auto role : kAllRoles) providers[role] = sentinel;
    } else {
        providers = request.providers.empty() ? make_providers(config.roles) : request.providers;
    }
    GatewayOptions gw;
    gw.mode = request.gateway_mode;
    gw.roles = config.roles;
    gw.transport_retries = config.transport_retries;
    if (request.gateway_mode == GatewayMode::record) {
        gw.cassette_path = request.cassette;
        if (request.cassette.has_parent_path()) fs::create_directories(request.cassette.parent_path());
        std::error_code ec;
        fs::remove(request.cassette, ec);
    }
    gw.transcript_path = dir / "transcript.jsonl";
    Gateway gateway(gw, providers, std::move(cassette));

    auto workspace = Workspace::open(dir / "workspace", dir / "edit_history");
    if (request.mode == RunMode::single) {
        outcome.result = run_single_call(workspace, gateway, config.roles.at(RoleTag::base_planner).retry_budget);
    } else {
        ResearchLog log(dir, config.memory, &gateway);
        Workers workers(workspace, gateway, config.workers);
        PlannerOptions options;
        options.mode = request.mode;
        options.cascade = config.cascade();
        options.pool = config.pool;
        options.executor = config.executor;
        Planner planner(workspace, gateway, workers, log, options);
        outcome.result = planner.run();
        text::write_file_atomic(dir / "research_log.md", log.render());
    }

    if (outcome.result.generated_script) {
        fs::copy_file(workspace.resolve(*outcome.result.generated_script), dir / kGeneratedScript,
                      fs::copy_options::overwrite_existing);
    }
    if (request.gateway_mode == GatewayMode::record && fs::exists(request.cassette)) {
        fs::copy_file(request.cassette, dir / "cassette.jsonl", fs::copy_options::overwrite_existing);
    }
    for (const auto role : kAllRoles) outcome.gateway_calls[role] = gateway.calls(role);
    if (sentinel) outcome.network_attempts_in_replay = sentinel->calls();

    ojson m;
    m["run_id"] = outcome.run_id;
    m["mode"] = std::string(to_string(request.mode));
    m["workspace"] = fs::absolute(request.workspace).lexically_normal().string();
    m["task"] = workspace.manifest().task;
    m["config_digest"] = config.digest;
    m["gateway"] = {{"mode", std::string(to_string(request.gateway_mode))},
                    {"cassette", request.cassette.empty() ? "" : fs::absolute(request.cassette).lexically_normal().string()}};
    m["termination"] = std::string(to_string(outcome.result.termination));
    m["steps_taken"] = outcome.result.steps_taken;
    m["final_answer"] = outcome.result.final_answer_text ? ojson(*outcome.result.final_answer_text) : ojson();
    m["generated_script"] = outcome.result.generated_script ? ojson(*outcome.result.generated_script) : ojson();
    m["error"] = outcome.result.error;
    m["gateway_calls"] = ojson::object();
    for (const auto& [role, n] : outcome.gateway_calls) m["gateway_calls"][std::string(to_string(role))] = n;
    m["started_at"] = utc_stamp(started, "%Y-%m-%dT%H:%M:%SZ");
    m["finished_at"] = utc_stamp(std::chrono::system_clock::now(), "%Y-%m-%dT%H:%M:%SZ");
    ojson artifacts = ojson::object();
    for (const auto* name : {"workspace", "edit_history", "steps", "research_log.md", "transcript.jsonl", "cassette.jsonl"}) {
        if (fs::exists(dir / name)) artifacts[name] = name;
    }
    if (outcome.result.generated_script) artifacts["generated_script"] = std::string(kGeneratedScript);
    m["artifacts"] = artifacts;
    text::write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
    return outcome;
}

std::vector<RunAssessment> assess_runs(const EvalInputs& inputs, std::vector<std::string>& warnings) {
    std::error_code ec;
    if (!fs::is_directory(inputs.runs_dir, ec)) throw Error(ErrorKind::not_found, "runs directory not found: " + inputs.runs_dir.string());
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(inputs.runs_dir)) {
        if (entry.is_directory() && fs::is_regular_file(entry.path() / "manifest.json")) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());

    std::map<std::string, const ScoreRow*> scores;
    for (const auto& row : inputs.scores) scores[row.run_id] = &row;

    std::vector<RunAssessment> out;
    std::set<std::string> known;
    for (const auto& dir : dirs) {
        ojson manifest;
        try {
            manifest = ojson::parse(text::read_file(dir / "manifest.json"));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::parse, (dir / "manifest.json").string() + ": " + e.what());
        }
        RunAssessment a;
        a.run_id = manifest.value("run_id", dir.filename().string());
        a.task = manifest.value("task", std::string());
        if (a.task.empty()) a.task = "task";
        a.experiment = manifest.value("mode", std::string("agent"));
        known.insert(a.run_id);

        // Scratch copy so evaluation never touches the immutable run directory.
        const auto scratch = fs::temp_directory_path() / ("rca-eval-" + make_run_id());
        copy_workspace(dir / "workspace", scratch);
        try {
            auto ws = Workspace::open(scratch);
            const auto baseline = ws.read_baseline_performance();
            a.baseline_performance = baseline.value;
            a.perf_direction = baseline.direction;
            a.code_generated = ws.exists(kGeneratedScript);
            if (a.code_generated) {
                a.lines_edited = lines_edited(ws.read(ws.path_of(FileRole::starter_code)), ws.read(kGeneratedScript));
                const auto report = execute_script(ws, kGeneratedScript, {}, inputs.executor);
                a.executes_clean = report.exit_status == 0 && !report.timed_out;
                a.final_performance = report.extracted_performance;
            }
        } catch (...) {
            fs::remove_all(scratch, ec);
            throw;
        }
        fs::remove_all(scratch, ec);

        if (auto it = scores.find(a.run_id); it != scores.end()) {
            a.manual_score = it->second->manual_score;
            a.lines_repaired = it->second->lines_repaired;
        } else {
            warnings.push_back(a.run_id + ": no score row");
        }
        out.push_back(std::move(a));
    }
    std::vector<std::string> unknown;
    for (const auto& row : inputs.scores) {
        if (!known.count(row.run_id)) unknown.push_back(row.run_id);
    }
    if (!unknown.empty()) throw Error(ErrorKind::validation, "scores reference unknown runs: " + text::join(unknown, ", "));
    return out;
}

}  // namespace rca

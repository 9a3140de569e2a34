#pragma once

#include "rca/gateway.hpp"
#include "rca/planner.hpp"
#include "rca/run.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace rca::test {

namespace fs = std::filesystem;

fs::path fixtures_dir();
fs::path support_dir();
fs::path toy_workspace();
std::string python();

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const fs::path& p) const { return path_ / p; }

private:
    fs::path path_;
};

// Kind of the rca::Error thrown by fn; fails the current test when nothing
// (or something else) is thrown.
ErrorKind error_kind(const std::function<void()>& fn);

void write(const fs::path& path, std::string_view content);
std::string read(const fs::path& path);

// Copies the toy workspace to <dir>/ws and returns that path.
fs::path copy_toy(const fs::path& dir);

// Six-section planner response with generic text around the action.
std::string respond(std::string_view action, std::string_view input_json, std::string_view thought = "Next step.");

// Queues keyed like ScriptedProvider ("role/purpose", "purpose" or "role").
using Queues = std::map<std::string, std::vector<std::string>>;
std::shared_ptr<ScriptedProvider> scripted(const Queues& queues,
                                           const std::map<std::string, std::string>& defaults = {});

// Owns everything a Planner borrows, with every role bound to one scripted
// provider and the gateway in live mode.
struct PlannerHarness {
    explicit PlannerHarness(const Queues& queues, AppConfig cfg = AppConfig::defaults(), RunMode mode = RunMode::agent);

    std::vector<CassetteEntry> calls_for(RoleTag role) const;

    TempDir tmp;
    fs::path root;
    std::shared_ptr<ScriptedProvider> provider;
    Gateway gateway;
    Workspace workspace;
    Workers workers;
    ResearchLog log;
    Planner planner;
};

// Records a run of `mode` on `workspace` with the scripted responses into
// <work>/<name>.jsonl, then replays that cassette with every provider bound
// to a sentinel. Returns the replay outcome; the record outcome goes to
// `recorded` when given.
struct ScenarioResult {
    RunOutcome recorded;
    RunOutcome replayed;
    fs::path cassette;
};
ScenarioResult record_and_replay(const fs::path& work, const std::string& name, const fs::path& workspace,
                                 RunMode mode, const Queues& queues, AppConfig config = AppConfig::defaults());

RunOutcome replay(const fs::path& workspace, const fs::path& cassette, const fs::path& runs_dir, RunMode mode,
                  AppConfig config = AppConfig::defaults());

std::vector<CassetteEntry> transcript_of(const RunOutcome& outcome);

// Hand-rolled generator helpers.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}
    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
    std::string line(int max_len = 12);
    std::vector<std::string> lines(int max_lines);
    std::string text(int max_lines, bool final_newline);
    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

}  // namespace rca::test

#pragma once

#include "rca/actions.hpp"
#include "rca/config.hpp"
#include "rca/gateway.hpp"
#include "rca/response.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace rca {

inline constexpr std::string_view kLongObservationPrefix = "SUMMARY OF LONG OBSERVATION:";
inline constexpr std::size_t kFallbackHead = 2000;
inline constexpr std::size_t kFallbackTail = 1000;

// One rejected planner attempt within a step.
struct Rejection {
    RoleTag level = RoleTag::base_planner;
    int attempt = 0;  // 1-based within the level
    std::string kind;
    std::string message;

    bool operator==(const Rejection&) const = default;
};

struct StepRecord {
    std::size_t index = 0;
    std::string raw_response;
    PlannerResponse response;
    ActionInvocation invocation;
    std::string observation;
    std::string observation_shown;
    std::string step_summary;
    RoleTag cascade_level_used = RoleTag::base_planner;
    std::map<RoleTag, int> attempts_per_level;
    std::vector<Rejection> rejections;
};

// Deterministic one-paragraph digest of a step's reasoning, action and observation.
std::string make_step_summary(std::size_t index, const PlannerResponse& response,
                              const ActionInvocation& invocation, std::string_view observation_shown);

// Append-only history with short-term (last `window` steps) and long-term
// (running summary) memory. With a directory, every step is written to
// <dir>/steps/<index>.json before append returns.
class ResearchLog {
public:
    explicit ResearchLog(fs::path run_dir = {}, MemoryConfig config = {}, Gateway* summarizer = nullptr);

    // Rebuilds a log from its persisted step files.
    static ResearchLog load(const fs::path& run_dir, MemoryConfig config = {}, Gateway* summarizer = nullptr);

    // Identity up to the threshold; longer text is summarized by the worker,
    // falling back to head+tail truncation when the model is unavailable.
    std::string summarize_observation(std::string_view action, std::string_view observation);

    // record.index must equal size(). Fills step_summary when empty and extends
    // the long-term summary.
    void append(StepRecord record);

    std::size_t size() const { return records_.size(); }
    const std::vector<StepRecord>& records() const { return records_; }
    std::span<const StepRecord> short_term() const;
    const std::string& long_term_summary() const { return long_term_summary_; }
    std::vector<ActionInvocation> accepted_actions() const;

    std::string render() const;
    const MemoryConfig& config() const { return config_; }

private:
    std::string extend_summary(const std::string& step_summary);
    void persist(const StepRecord& record) const;

    fs::path run_dir_;
    MemoryConfig config_;
    Gateway* summarizer_;
    std::vector<StepRecord> records_;
    std::string long_term_summary_;
};

std::string step_to_json(const StepRecord& record, const std::string& long_term_summary);
StepRecord step_from_json(std::string_view json, std::string* long_term_summary = nullptr);

}  // namespace rca

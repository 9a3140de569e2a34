#pragma once

#include "rca/actions.hpp"
#include "rca/config.hpp"
#include "rca/constraints.hpp"
#include "rca/executor.hpp"
#include "rca/gateway.hpp"
#include "rca/research_log.hpp"
#include "rca/response.hpp"
#include "rca/workers.hpp"
#include "rca/workspace.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rca {

enum class RunMode { agent, prescribed, single };
std::string_view to_string(RunMode mode);
RunMode parse_run_mode(std::string_view text);

enum class Termination { final_answer, max_steps, cascade_exhausted, aborted };
std::string_view to_string(Termination termination);

inline constexpr std::string_view kGeneratedScript = "methodology_implementation.py";

struct RunResult {
    Termination termination = Termination::aborted;
    std::size_t steps_taken = 0;
    std::optional<std::string> final_answer_text;
    std::optional<std::string> generated_script;
    std::string error;  // set when aborted
};

// Problem statement for agent or prescribed mode, naming the workspace's files.
std::string problem_statement(const Workspace& workspace, RunMode mode);

// Everything the planner knows before the response-format section: the
// instructions with the problem statement and action catalog, the long-term
// summary and the short-term window. Also the context handed to the expert.
std::string build_context(std::string_view problem_statement, std::string_view action_catalog,
                          std::string_view long_term_summary, std::span<const StepRecord> window);

// Full planner prompt: context, response format, then any retry notes from
// rejected attempts at the current step.
std::string build_prompt(std::string_view problem_statement, std::string_view action_catalog,
                         std::string_view long_term_summary, std::span<const StepRecord> window,
                         const std::vector<std::string>& retry_notes = {});

struct PlannerOptions {
    RunMode mode = RunMode::agent;
    CascadeConfig cascade;
    PoolPolicy pool;
    ExecutorOptions executor;
};

// Accepted output of one planning step.
struct StepOutcome {
    std::string raw_response;
    PlannerResponse response;
    ActionInvocation invocation;
    std::string observation;
    RoleTag level = RoleTag::base_planner;
    std::map<RoleTag, int> attempts;
    std::vector<Rejection> rejections;
    bool final_answer = false;
};

class Planner {
public:
    Planner(Workspace& workspace, Gateway& gateway, Workers& workers, ResearchLog& log, PlannerOptions options);

    // Runs until Final Answer, max_steps or cascade exhaustion.
    RunResult run();

    // Walks the cascade until one attempt is valid and executed. nullopt when
    // every level is exhausted.
    std::optional<StepOutcome> plan_step();

    // Executes an accepted invocation; action failures become observation text.
    std::string dispatch(const ActionInvocation& invocation);

    std::string request_expert_help(std::string_view request);
    int expert_calls_used() const { return expert_calls_; }
    const std::string& problem() const { return problem_; }

private:
    std::string current_context() const;
    std::string describe_edit(const ActionInvocation& invocation, const EditOutcome& outcome) const;

    Workspace& workspace_;
    Gateway& gateway_;
    Workers& workers_;
    ResearchLog& log_;
    PlannerOptions options_;
    std::string problem_;
    std::string catalog_;
    int expert_calls_ = 0;
};

// Baseline: one base-planner call with every input file in the prompt; the
// fenced block of the reply becomes the generated script.
RunResult run_single_call(Workspace& workspace, Gateway& gateway, int retry_budget = 1);

std::string single_call_prompt(const Workspace& workspace);

}  // namespace rca

#include "rca/planner.hpp"

#include "rca/error.hpp"
#include "rca/templates.hpp"
#include "rca/text.hpp"

#include <algorithm>

namespace rca {

std::string_view to_string(RunMode mode) {
    switch (mode) {
        case RunMode::agent: return "agent";
        case RunMode::prescribed: return "prescribed";
        case RunMode::single: return "single";
    }
    return "?";
}

RunMode parse_run_mode(std::string_view text) {
    if (text == "agent") return RunMode::agent;
    if (text == "prescribed") return RunMode::prescribed;
    if (text == "single") return RunMode::single;
    throw Error(ErrorKind::usage, "mode must be agent, prescribed or single, got '" + std::string(text) + "'");
}

std::string_view to_string(Termination termination) {
    switch (termination) {
        case Termination::final_answer: return "final_answer";
        case Termination::max_steps: return "max_steps";
        case Termination::cascade_exhausted: return "cascade_exhausted";
        case Termination::aborted: return "aborted";
    }
    return "?";
}

std::string problem_statement(const Workspace& workspace, RunMode mode) {
    if (mode == RunMode::single) throw Error(ErrorKind::usage, "single mode has no planner problem statement");
    return templates::fill(mode == RunMode::agent ? "problem_agent" : "problem_prescribed",
                           {{"methodology_file", workspace.path_of(FileRole::methodology)},
                            {"dataset_file", workspace.path_of(FileRole::dataset)},
                            {"pseudocode_file", workspace.path_of(FileRole::pseudocode)},
                            {"starter_file", workspace.path_of(FileRole::starter_code)},
                            {"performance_file", workspace.path_of(FileRole::starter_performance)},
                            {"output_file", std::string(kGeneratedScript)}});
}

std::string build_context(std::string_view problem_statement, std::string_view action_catalog,
                          std::string_view long_term_summary, std::span<const StepRecord> window) {
    auto out = templates::fill("planner_instructions", {{"problem_statement", std::string(problem_statement)},
                                                        {"action_catalog", std::string(action_catalog)}});
    if (!long_term_summary.empty()) {
        out += "\nResearch log summary of all steps so far:\n";
        out += long_term_summary;
        if (out.back() != '\n') out += '\n';
    }
    if (!window.empty()) {
        out += "\nYour most recent steps, oldest first:\n";
        for (const auto& r : window) {
            out += "\n[Step " + std::to_string(r.index) + "]\n";
            out += r.raw_response;
            if (out.back() != '\n') out += '\n';
            out += "Observation:\n";
            out += r.observation_shown;
            if (out.empty() || out.back() != '\n') out += '\n';
        }
    }
    return out;
}

std::string build_prompt(std::string_view problem_statement, std::string_view action_catalog,
                         std::string_view long_term_summary, std::span<const StepRecord> window,
                         const std::vector<std::string>& retry_notes) {
    auto out = build_context(problem_statement, action_catalog, long_term_summary, window);
    out += "\n";
    out += templates::get("response_format");
    if (!retry_notes.empty()) {
        if (out.back() != '\n') out += '\n';
        out += "\nYour previous responses for this step were rejected:\n";
        for (const auto& note : retry_notes) out += "- " + note + "\n";
        out += "Respond again, fixing these problems.\n";
    }
    return out;
}

namespace {

// Failures that mean the run itself can no longer be trusted, as opposed to
// an action that went wrong and is reported back to the planner.
bool fatal(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::cassette_exhausted:
        case ErrorKind::digest_mismatch:
        case ErrorKind::role_mismatch:
        case ErrorKind::usage:
        case ErrorKind::io:
            return true;
        default:
            return false;
    }
}

bool is_edit(ActionId id) { return id == ActionId::edit_script || id == ActionId::edit_script_with_context; }

std::string rejection_note(RoleTag, int, std::string_view kind, std::string_view message) {
    return "[" + std::string(kind) + "] " + std::string(message);
}

}  // namespace

Planner::Planner(Workspace& workspace, Gateway& gateway, Workers& workers, ResearchLog& log, PlannerOptions options)
    : workspace_(workspace),
      gateway_(gateway),
      workers_(workers),
      log_(log),
      options_(std::move(options)),
      problem_(problem_statement(workspace, options_.mode)),
      catalog_(ActionRegistry::instance().render_catalog()) {
    validate(options_.cascade);
    validate(options_.pool);
}

std::string Planner::current_context() const {
    return build_context(problem_, catalog_, log_.long_term_summary(), log_.short_term());
}

std::optional<StepOutcome> Planner::plan_step() {
    const auto step = static_cast<long>(log_.size());
    const auto history = log_.accepted_actions();
    const std::string previous = log_.size() ? log_.records().back().raw_response : std::string();

    StepOutcome outcome;
    std::vector<std::string> notes;
    for (const auto& level : options_.cascade.levels) {
        for (int attempt = 1; attempt <= level.budget; ++attempt) {
            ++outcome.attempts[level.role];
            auto reject = [&](std::string_view kind, std::string message) {
                notes.push_back(rejection_note(level.role, attempt, kind, message));
                outcome.rejections.push_back({level.role, attempt, std::string(kind), std::move(message)});
            };

            const auto prompt = build_prompt(problem_, catalog_, log_.long_term_summary(), log_.short_term(), notes);
            std::string raw;
            try {
                raw = gateway_.complete(level.role, "planner", prompt);
            } catch (const Error& e) {
                if (fatal(e)) throw;
                reject("model_unavailable", e.what());
                continue;
            }

            if (auto v = check_recursive(previous, raw); !v.allowed) {
                reject(to_string(*v.violation), v.message);
                continue;
            }
            PlannerResponse response;
            ActionInvocation invocation;
            try {
                response = parse_planner_response(raw);
                invocation = parse_invocation(ActionRegistry::instance().lookup(response.action), response.action_input);
            } catch (const Error& e) {
                reject(id(e.kind()), e.what());
                continue;
            }
            if (auto v = check_pool_streak(options_.pool, history, invocation, step); !v.allowed) {
                reject(to_string(*v.violation), v.message);
                continue;
            }
            if (auto v = check_duplicate(history, invocation); !v.allowed) {
                reject(to_string(*v.violation), v.message);
                continue;
            }

            std::string observation;
            if (is_edit(invocation.id())) {
                const auto& save_as = invocation.text("save script name");
                try {
                    const auto edit = invocation.id() == ActionId::edit_script
                                          ? workers_.edit_script(invocation.text("script name"),
                                                                 invocation.text("edit instructions"), save_as)
                                          : workers_.edit_script_with_context(
                                                invocation.text("script name"), invocation.text("edit instructions"),
                                                invocation.text("context file name"),
                                                invocation.integer("file start line number"),
                                                invocation.integer("file end line number"), save_as);
                    if (auto v = check_zero_diff(edit.diff.stats); !v.allowed) {
                        workspace_.undo_edit(save_as);
                        reject(to_string(*v.violation), v.message);
                        continue;
                    }
                    observation = describe_edit(invocation, edit);
                } catch (const Error& e) {
                    if (fatal(e)) throw;
                    observation = "Error: " + std::string(e.what());
                }
            } else {
                observation = dispatch(invocation);
            }

            outcome.raw_response = std::move(raw);
            outcome.response = std::move(response);
            outcome.invocation = std::move(invocation);
            outcome.observation = std::move(observation);
            outcome.level = level.role;
            outcome.final_answer = outcome.invocation.id() == ActionId::final_answer;
            return outcome;
        }
    }
    return std::nullopt;
}

std::string Planner::describe_edit(const ActionInvocation& invocation, const EditOutcome& edit) const {
    const auto& script = invocation.text("script name");
    std::string out = "Edited " + script + " and saved the result to " + edit.saved_as + ". ";
    out += "Diff against " + script + ": " + std::to_string(edit.diff.stats.additions) + " lines added, " +
           std::to_string(edit.diff.stats.deletions) + " lines removed.\n";
    out += edit.diff.text;
    return out;
}

std::string Planner::dispatch(const ActionInvocation& inv) {
    try {
        switch (inv.id()) {
            case ActionId::list_files: {
                const auto entries = workspace_.list_files(inv.text("directory path"));
                return entries.empty() ? std::string("(empty directory)") : text::join(entries, "\n");
            }
            case ActionId::copy_file:
                workspace_.copy_file(inv.text("source"), inv.text("destination"));
                return "Copied " + inv.text("source") + " to " + inv.text("destination") + ".";
            case ActionId::inspect_script_lines:
                return workspace_.inspect_lines(inv.text("script name"), inv.integer("start line number"),
                                                inv.integer("end line number"));
            case ActionId::execute_script: {
                const auto report = execute_script(workspace_, inv.text("script name"), inv.arguments("arguments"),
                                                   options_.executor);
                return render_observation(report);
            }
            case ActionId::undo_edit_script:
                workspace_.undo_edit(inv.text("script name"));
                return "Restored the previous version of " + inv.text("script name") + ".";
            case ActionId::get_code_diff: {
                const auto diff = workspace_.get_diff(inv.text("script 1 name"), inv.text("script 2 name"));
                if (diff.stats.empty()) return "The files are identical.";
                return std::to_string(diff.stats.additions) + " lines added, " + std::to_string(diff.stats.deletions) +
                       " lines removed.\n" + diff.text;
            }
            case ActionId::final_answer:
                return "Final answer submitted.";
            case ActionId::request_expert_help:
                return request_expert_help(inv.text("request description"));
            case ActionId::understand_file:
                return workers_.understand_file(inv.text("file name"), inv.text("things to look for"));
            case ActionId::understand_file_with_context:
                return workers_.understand_file_with_context(
                    inv.text("file name"), inv.integer("file start line number"), inv.integer("file end line number"),
                    inv.text("script name"), inv.integer("script start line number"),
                    inv.integer("script end line number"), inv.text("things to look for"));
            case ActionId::edit_script: {
                const auto edit = workers_.edit_script(inv.text("script name"), inv.text("edit instructions"),
                                                       inv.text("save script name"));
                return describe_edit(inv, edit);
            }
            case ActionId::edit_script_with_context: {
                const auto edit = workers_.edit_script_with_context(
                    inv.text("script name"), inv.text("edit instructions"), inv.text("context file name"),
                    inv.integer("file start line number"), inv.integer("file end line number"),
                    inv.text("save script name"));
                return describe_edit(inv, edit);
            }
            case ActionId::reflection:
                return workers_.reflect(inv.text("things to reflect on"), log_.long_term_summary());
            case ActionId::check_implementation:
                return render_reports(workers_.check_implementation(inv.text("script name")));
        }
    } catch (const Error& e) {
        if (fatal(e)) throw;
        return "Error: " + std::string(e.what());
    }
    return "Error: unhandled action";
}

std::string Planner::request_expert_help(std::string_view request) {
    if (text::trim(request).empty()) return "Error: 'request description' must not be empty.";
    if (expert_calls_ >= options_.cascade.expert_help_budget) {
        return "Expert help budget exhausted: all " + std::to_string(options_.cascade.expert_help_budget) +
               " expert calls of this run have been used. Continue without expert help.";
    }
    ++expert_calls_;
    const auto prompt = templates::fill("expert_help", {{"planning_context", current_context()},
                                                        {"request", std::string(request)}});
    return gateway_.complete(RoleTag::expert_planner, "expert_help", prompt);
}

RunResult Planner::run() {
    RunResult result;
    try {
        while (true) {
            if (log_.size() >= static_cast<std::size_t>(options_.cascade.max_steps)) {
                result.termination = Termination::max_steps;
                break;
            }
            auto outcome = plan_step();
            if (!outcome) {
                result.termination = Termination::cascade_exhausted;
                break;
            }
            StepRecord record;
            record.index = log_.size();
            record.observation_shown = log_.summarize_observation(outcome->invocation.name(), outcome->observation);
            record.raw_response = std::move(outcome->raw_response);
            record.response = std::move(outcome->response);
            record.invocation = std::move(outcome->invocation);
            record.observation = std::move(outcome->observation);
            record.cascade_level_used = outcome->level;
            record.attempts_per_level = std::move(outcome->attempts);
            record.rejections = std::move(outcome->rejections);
            const bool done = outcome->final_answer;
            if (done) result.final_answer_text = record.invocation.text("description");
            log_.append(std::move(record));
            if (done) {
                result.termination = Termination::final_answer;
                break;
            }
        }
    } catch (const Error& e) {
        result.termination = Termination::aborted;
        result.error = e.what();
    } catch (const std::exception& e) {
        result.termination = Termination::aborted;
        result.error = e.what();
    }
    result.steps_taken = log_.size();
    if (workspace_.exists(kGeneratedScript)) result.generated_script = std::string(kGeneratedScript);
    return result;
}

// ---------------------------------------------------------------------------
// Single-call baseline

std::string single_call_prompt(const Workspace& workspace) {
    std::string additional;
    std::vector<KnownFile> extra;
    for (const auto& f : workspace.files()) {
        if (f.role == FileRole::subpart || f.role == FileRole::supplementary) extra.push_back(f);
    }
    std::sort(extra.begin(), extra.end(),
              [](const KnownFile& a, const KnownFile& b) { return a.relative_path < b.relative_path; });
    for (const auto& f : extra) {
        auto label = fs::path(f.relative_path).stem().string();
        std::transform(label.begin(), label.end(), label.begin(), [](unsigned char c) { return std::toupper(c); });
        additional += "\n" + label + " CODE:\n\n" + workspace.read(f.relative_path) + "\n";
    }
    auto read = [&](FileRole role) { return workspace.read(workspace.path_of(role)); };
    return templates::fill("single_call", {{"methodology", read(FileRole::methodology)},
                                           {"starter_code", read(FileRole::starter_code)},
                                           {"data", read(FileRole::dataset)},
                                           {"pseudocode", read(FileRole::pseudocode)},
                                           {"starter_code_performance", read(FileRole::starter_performance)},
                                           {"additional_files", additional}});
}

RunResult run_single_call(Workspace& workspace, Gateway& gateway, int retry_budget) {
    RunResult result;
    try {
        if (retry_budget <= 0) throw Error(ErrorKind::config, "retry budget must be positive");
        const auto base = single_call_prompt(workspace);
        auto prompt = base;
        for (int attempt = 1; attempt <= retry_budget; ++attempt) {
            ++result.steps_taken;
            const auto reply = gateway.complete(RoleTag::base_planner, "single_call", prompt);
            if (auto code = extract_fenced_block(reply)) {
                workspace.apply_edit(kGeneratedScript, *code);
                result.termination = Termination::final_answer;
                result.generated_script = std::string(kGeneratedScript);
                return result;
            }
            prompt = base + "\n\nYour previous reply did not contain a fenced code block. Reply with the complete "
                            "edited script inside a single ``` fenced code block.";
        }
        throw Error(ErrorKind::extraction, "no fenced code block in the reply after " + std::to_string(retry_budget) +
                                               " attempts");
    } catch (const std::exception& e) {
        result.termination = Termination::aborted;
        result.error = e.what();
    }
    return result;
}

}  // namespace rca

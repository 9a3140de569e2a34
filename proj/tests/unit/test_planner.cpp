#include "rca/error.hpp"
#include "rca/planner.hpp"
#include "rca/text.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

namespace rca {
namespace {

using test::error_kind;
using test::respond;
using test::TempDir;

std::string list(const std::string& dir) { return respond("List Files", "{\"directory path\": \"" + dir + "\"}"); }
std::string undo(const std::string& s) { return respond("Undo Edit Script", "{\"script name\": \"" + s + "\"}"); }
std::string final_answer() { return respond("Final Answer", R"({"description": "done"})"); }
std::string expert(const std::string& what) {
    return respond("Request Planning Expert Help", "{\"request description\": \"" + what + "\"}");
}
const std::string kGarbage = "I am not sure what to do.";

using Harness = test::PlannerHarness;

TEST(Response, ParsesSixSections) {
    const auto r = parse_planner_response(
        "## Reflection: none\n**Research Plan and Status**: 1. read\n2. edit\nFact Check: -\n"
        "Thought: go\nAction: List Files\nAction Input: {\n  \"directory path\": \".\"\n}\n");
    EXPECT_EQ(r.reflection, "none");
    EXPECT_EQ(r.research_plan_and_status, "1. read\n2. edit");
    EXPECT_EQ(r.action, "List Files");
    EXPECT_EQ(r.action_input, "{\n  \"directory path\": \".\"\n}");
    EXPECT_EQ(parse_planner_response(render_planner_response(r)), r);
}

TEST(Response, StructuralErrors) {
    const auto good = list(".");
    auto without = [&](std::string_view heading) {
        auto s = good;
        const auto at = s.find(heading);
        s.erase(at, s.find('\n', at) - at + 1);
        return s;
    };
    EXPECT_EQ(error_kind([&] { parse_planner_response(without("Fact Check:")); }), ErrorKind::parse);
    EXPECT_EQ(error_kind([&] { parse_planner_response(good + "Thought: again\n"); }), ErrorKind::parse);
    EXPECT_EQ(error_kind([&] { parse_planner_response("Thought: x\nReflection: y\n"); }), ErrorKind::parse);
    EXPECT_EQ(error_kind([&] { parse_planner_response(kGarbage); }), ErrorKind::parse);
    try {
        parse_planner_response(without("Fact Check:"));
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("Fact Check"), std::string::npos);
    }
}

// The prompt carries the last `window` steps verbatim and nothing older.
TEST(Prompt, ShortTermWindowOnly) {
    ResearchLog log;
    for (std::size_t i = 0; i < 6; ++i) {
        StepRecord r;
        r.index = i;
        r.raw_response = list("dir" + std::to_string(i));
        r.response = parse_planner_response(r.raw_response);
        r.invocation = parse_invocation(ActionRegistry::instance().get(ActionId::list_files), r.response.action_input);
        r.observation_shown = "observation " + std::to_string(i);
        log.append(r);
    }
    const auto prompt = build_prompt("PROBLEM", "CATALOG", log.long_term_summary(), log.short_term(), {"[x] y"});
    // Older observations reach the prompt only through the long-term summary.
    const auto recent = prompt.find("Your most recent steps, oldest first:\n");
    ASSERT_NE(recent, std::string::npos);
    const auto verbatim = prompt.substr(recent);
    for (std::size_t i = 0; i < 6; ++i) {
        const bool in_window = i >= 3;
        EXPECT_EQ(prompt.find("[Step " + std::to_string(i) + "]\n") != std::string::npos, in_window) << i;
        EXPECT_EQ(verbatim.find("observation " + std::to_string(i)) != std::string::npos, in_window) << i;
    }
    EXPECT_NE(prompt.find("Research log summary of all steps so far:\n" + log.long_term_summary()), std::string::npos);
    EXPECT_NE(prompt.find("PROBLEM"), std::string::npos);
    EXPECT_NE(prompt.find("CATALOG"), std::string::npos);
    EXPECT_NE(prompt.find("Your previous responses for this step were rejected:\n- [x] y\n"), std::string::npos);
    EXPECT_LT(prompt.find("[Step 3]"), prompt.find("[Step 5]"));
}

TEST(Problem, ModesDiffer) {
    TempDir tmp;
    auto ws = Workspace::open(test::copy_toy(tmp.path()));
    const auto agent = problem_statement(ws, RunMode::agent);
    const auto prescribed = problem_statement(ws, RunMode::prescribed);
    EXPECT_NE(agent.find("methodology_description.txt"), std::string::npos);
    EXPECT_NE(agent.find("methodology_implementation.py"), std::string::npos);
    EXPECT_NE(agent.find("_execution_trace.cover"), std::string::npos);
    EXPECT_EQ(agent.find("skeleton"), std::string::npos);
    EXPECT_NE(prescribed.find("skeleton containing function definitions"), std::string::npos);
    EXPECT_EQ(error_kind([&] { problem_statement(ws, RunMode::single); }), ErrorKind::usage);
}

TEST(Cascade, EscalatesAfterEightBaseFailures) {
    Harness h({{"base_planner/planner", std::vector<std::string>(8, kGarbage)},
               {"intermediate_planner/planner", {list(".")}}});
    const auto step = h.planner.plan_step();
    ASSERT_TRUE(step);
    EXPECT_EQ(step->level, RoleTag::intermediate_planner);
    EXPECT_EQ(step->attempts.at(RoleTag::base_planner), 8);
    EXPECT_EQ(step->attempts.at(RoleTag::intermediate_planner), 1);
    ASSERT_EQ(step->rejections.size(), 8u);
    EXPECT_EQ(step->rejections[7].attempt, 8);
    EXPECT_EQ(step->rejections[0].kind, "parse");
    EXPECT_EQ(h.calls_for(RoleTag::base_planner).size(), 8u);
    EXPECT_EQ(h.calls_for(RoleTag::expert_planner).size(), 0u);
    // Each retry sees the notes of every earlier rejection.
    const auto last_base = h.calls_for(RoleTag::base_planner).back().prompt;
    EXPECT_NE(last_base.find("Your previous responses for this step were rejected:"), std::string::npos);
    const auto intermediate = h.calls_for(RoleTag::intermediate_planner).at(0);
    EXPECT_DOUBLE_EQ(intermediate.temperature, 0.8);
}

TEST(Cascade, ExhaustionStopsTheRun) {
    Harness h({}, AppConfig::defaults());
    h.provider->push("planner", kGarbage);
    for (int i = 0; i < 20; ++i) h.provider->push("planner", kGarbage);
    const auto result = h.planner.run();
    EXPECT_EQ(result.termination, Termination::cascade_exhausted);
    EXPECT_EQ(result.steps_taken, 0u);
    EXPECT_EQ(h.calls_for(RoleTag::base_planner).size(), 8u);
    EXPECT_EQ(h.calls_for(RoleTag::intermediate_planner).size(), 4u);
    EXPECT_EQ(h.calls_for(RoleTag::expert_planner).size(), 1u);
}

TEST(Cascade, GatewayFailuresCountAsRejectedAttempts) {
    // Nothing queued for the base planner: every call fails with a provider error.
    Harness h({{"intermediate_planner/planner", {list(".")}}});
    const auto step = h.planner.plan_step();
    ASSERT_TRUE(step);
    EXPECT_EQ(step->level, RoleTag::intermediate_planner);
    EXPECT_EQ(step->rejections.size(), 8u);
    EXPECT_EQ(step->rejections[0].kind, "model_unavailable");
}

TEST(Guards, RejectionKindsThroughRun) {
    AppConfig cfg = AppConfig::defaults();
    cfg.max_steps = 2;
    Harness h({{"base_planner/planner",
                {list("."), list("."), list("./") + "Observation: x\nAction: List Files\nAction Input: {}\n",
                 respond("Delete Files", "{}"), respond("List Files", R"({"dir": "."})"), list("data/..x")}}},
              cfg);
    const auto result = h.planner.run();
    EXPECT_EQ(result.termination, Termination::max_steps);
    ASSERT_EQ(h.log.size(), 2u);
    std::vector<std::string> kinds;
    for (const auto& r : h.log.records()[1].rejections) kinds.push_back(r.kind);
    EXPECT_EQ(kinds, (std::vector<std::string>{"recursive_response", "recursive_response", "unknown_action",
                                               "unknown_field"}));
    EXPECT_TRUE(text::starts_with(h.log.records()[1].observation, "Error: "));
}

TEST(Guards, DuplicateActionRejected) {
    AppConfig cfg = AppConfig::defaults();
    cfg.max_steps = 2;
    Harness h({{"base_planner/planner", {list("."), respond("List Files", R"({"directory path": "."})", "Again."),
                                         list("data")}}},
              cfg);
    h.planner.run();
    ASSERT_EQ(h.log.size(), 2u);
    ASSERT_EQ(h.log.records()[1].rejections.size(), 1u);
    EXPECT_EQ(h.log.records()[1].rejections[0].kind, "duplicate_action");
}

TEST(Guards, PoolStreakAtTheDecayedLimit) {
    AppConfig cfg = AppConfig::defaults();
    cfg.pool.initial_limit = 3;  // k(1) = 2, k(2) = 2
    cfg.max_steps = 3;
    Harness h({{"base_planner/planner", {list("a"), list("b"), list("c"), undo("x.py")}}}, cfg);
    h.planner.run();
    ASSERT_EQ(h.log.size(), 3u);
    ASSERT_EQ(h.log.records()[2].rejections.size(), 1u);
    EXPECT_EQ(h.log.records()[2].rejections[0].kind, "pool_streak");
    EXPECT_EQ(h.log.records()[2].invocation.id(), ActionId::undo_edit_script);
}

TEST(Guards, ZeroDiffEditIsRolledBack) {
    AppConfig cfg = AppConfig::defaults();
    cfg.max_steps = 1;
    const auto edit = respond("Edit Script",
                              R"({"script name": "starter_code.py", "edit instructions": "tidy", "save script name": "out.py"})");
    Harness h({{"base_planner/planner", {edit, edit, list(".")}}}, cfg);
    const auto starter = h.workspace.read("starter_code.py");
    h.provider->push("edit_script", "```python\n" + starter + "```\n");
    h.provider->push("edit_script", "```python\nprint('changed')\n```\n");
    h.planner.run();
    ASSERT_EQ(h.log.size(), 1u);
    const auto& rec = h.log.records()[0];
    ASSERT_EQ(rec.rejections.size(), 1u);
    EXPECT_EQ(rec.rejections[0].kind, "zero_diff");
    EXPECT_EQ(h.workspace.read("out.py"), "print('changed')\n");
    EXPECT_EQ(h.workspace.edit_depth("out.py"), 1u);
    EXPECT_NE(rec.observation.find("Edited starter_code.py and saved the result to out.py."), std::string::npos);
}

TEST(Expert, BudgetOfThree) {
    AppConfig cfg = AppConfig::defaults();
    cfg.max_steps = 8;
    Harness h({{"base_planner/planner",
                {expert("a"), list("."), expert("b"), list("x"), expert("c"), list("y"), expert("d"), final_answer()}},
               {"expert_planner/expert_help", {"plan A", "plan B", "plan C", "plan D"}}},
              cfg);
    const auto result = h.planner.run();
    EXPECT_EQ(result.termination, Termination::final_answer);
    EXPECT_EQ(h.planner.expert_calls_used(), 3);
    const auto expert_calls = h.calls_for(RoleTag::expert_planner);
    ASSERT_EQ(expert_calls.size(), 3u);
    EXPECT_EQ(expert_calls[2].purpose, "expert_help");
    EXPECT_EQ(h.log.records()[4].observation, "plan C");
    EXPECT_EQ(h.log.records()[6].observation,
              "Expert help budget exhausted: all 3 expert calls of this run have been used. Continue without "
              "expert help.");
    EXPECT_NE(expert_calls[1].prompt.find("[Step 1]"), std::string::npos);
}

TEST(Run, StopsAtMaxSteps) {
    std::vector<std::string> responses;
    for (int i = 0; i < 60; ++i) responses.push_back(i % 2 ? undo("none" + std::to_string(i) + ".py") : list("."));
    Harness h({{"base_planner/planner", responses}});
    const auto result = h.planner.run();
    EXPECT_EQ(result.termination, Termination::max_steps);
    EXPECT_EQ(result.steps_taken, 50u);
    EXPECT_EQ(h.calls_for(RoleTag::base_planner).size(), 50u);
    EXPECT_FALSE(result.generated_script);
}

TEST(Run, FinalAnswerEndsTheRun) {
    Harness h({{"base_planner/planner", {list("."), final_answer(), list("never")}}});
    const auto result = h.planner.run();
    EXPECT_EQ(result.termination, Termination::final_answer);
    EXPECT_EQ(result.steps_taken, 2u);
    EXPECT_EQ(result.final_answer_text, "done");
}

TEST(Run, LongObservationsAreSummarizedForTheLog) {
    AppConfig cfg = AppConfig::defaults();
    cfg.max_steps = 1;
    Harness h({{"base_planner/planner", {list(".")}}, {"summarize_observation", {"short version"}}}, cfg);
    for (int i = 0; i < 400; ++i) test::write(h.root / ("file_with_a_long_name_" + std::to_string(i) + ".txt"), "");
    h.planner.run();
    ASSERT_EQ(h.log.size(), 1u);
    EXPECT_GT(h.log.records()[0].observation.size(), 4000u);
    EXPECT_EQ(h.log.records()[0].observation_shown, "SUMMARY OF LONG OBSERVATION:\nshort version");
}

TEST(SingleCall, PromptAndScript) {
    TempDir tmp;
    const auto root = test::copy_toy(tmp.path());
    test::write(root / "subpart_1_a.py", "def standardize(): pass\n");
    auto ws = Workspace::open(root);
    const auto prompt = single_call_prompt(ws);
    EXPECT_NE(prompt.find(ws.read("starter_code.py")), std::string::npos);
    EXPECT_NE(prompt.find(ws.read("methodology_description.txt")), std::string::npos);
    EXPECT_NE(prompt.find("\nSUBPART_1_A CODE:\n\ndef standardize(): pass\n"), std::string::npos);

    GatewayOptions o;
    auto provider = test::scripted({{"single_call", {"no code", "```python\nprint('Test accuracy: 0.9')\n```"}}});
    Gateway gw(o, {{RoleTag::base_planner, provider}});
    const auto once = run_single_call(ws, gw, 1);
    EXPECT_EQ(once.termination, Termination::aborted);
    const auto twice = run_single_call(ws, gw, 1);
    EXPECT_EQ(twice.termination, Termination::final_answer);
    EXPECT_EQ(ws.read("methodology_implementation.py"), "print('Test accuracy: 0.9')\n");
    EXPECT_EQ(gw.calls(RoleTag::base_planner), 2u);
}

}  // namespace
}  // namespace rca

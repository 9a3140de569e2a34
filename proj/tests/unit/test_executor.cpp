#include "rca/error.hpp"
#include "rca/executor.hpp"
#include "rca/text.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>

namespace rca {
namespace {

using test::error_kind;
using test::TempDir;

class ExecutorTest : public ::testing::Test {
protected:
    void SetUp() override {
        root = test::copy_toy(tmp.path());
        for (const auto& e : fs::directory_iterator(test::fixtures_dir() / "scripts")) {
            fs::copy_file(e.path(), root / e.path().filename());
        }
        auto manifest = test::read(root / "workspace.toml");
        const std::string plain = "interpreter = \"python3\"";
        manifest.replace(manifest.find(plain), plain.size(), "interpreter = \"" + test::python() + "\"");
        test::write(root / "workspace.toml", manifest);
    }

    void set_timeout(int seconds) {
        auto manifest = test::read(root / "workspace.toml");
        manifest.replace(manifest.find("timeout_seconds = 60"), 20, "timeout_seconds = " + std::to_string(seconds));
        test::write(root / "workspace.toml", manifest);
    }

    ExecutorOptions traced() const {
        ExecutorOptions o;
        o.backend = TraceBackend::traced;
        o.trace_shim = test::python() + " " + (test::support_dir() / "stub_trace_shim.py").string();
        return o;
    }

    TempDir tmp;
    fs::path root;
};

TEST_F(ExecutorTest, CleanRunExtractsPerformance) {
    auto ws = Workspace::open(root);
    const auto r = execute_script(ws, "clean.py", {"--lr", "0.1"}, {});
    EXPECT_EQ(r.exit_status, 0);
    EXPECT_FALSE(r.timed_out);
    ASSERT_TRUE(r.extracted_performance);
    EXPECT_DOUBLE_EQ(*r.extracted_performance, 0.8);
    EXPECT_NE(r.stdout_text.find("args: --lr 0.1"), std::string::npos);
    const auto obs = render_observation(r);
    EXPECT_TRUE(text::starts_with(obs, "Executed clean.py --lr 0.1\nexit status: 0\nstdout:\n"));
    EXPECT_NE(obs.find("stderr:\n(empty)\n"), std::string::npos);
    EXPECT_NE(obs.find("performance: 0.8\n"), std::string::npos);
}

TEST_F(ExecutorTest, FailingRunReportsTraceback) {
    auto ws = Workspace::open(root);
    const auto r = execute_script(ws, "failing.py", {}, {});
    EXPECT_NE(r.exit_status, 0);
    EXPECT_NE(r.stderr_text.find("ValueError"), std::string::npos);
    EXPECT_FALSE(r.extracted_performance);
    EXPECT_EQ(render_observation(r).find("performance:"), std::string::npos);
}

TEST_F(ExecutorTest, TimeoutKillsTheScript) {
    set_timeout(2);
    auto ws = Workspace::open(root);
    const auto start = std::chrono::steady_clock::now();
    const auto r = execute_script(ws, "slow.py", {}, {});
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_TRUE(r.timed_out);
    EXPECT_EQ(r.exit_status, -1);
    EXPECT_DOUBLE_EQ(r.timeout_seconds, 2.0);
    EXPECT_LT(elapsed, 10.0);
    EXPECT_NE(render_observation(r).find("timed out: the script was stopped after the 2 second limit"),
              std::string::npos);
}

TEST_F(ExecutorTest, ManifestTimeoutOverridesOptions) {
    auto ws = Workspace::open(root);
    ExecutorOptions o;
    o.timeout_seconds = 1;
    EXPECT_DOUBLE_EQ(execute_script(ws, "clean.py", {}, o).timeout_seconds, 60.0);
}

TEST_F(ExecutorTest, MissingScriptAndSandbox) {
    auto ws = Workspace::open(root);
    EXPECT_EQ(error_kind([&] { execute_script(ws, "nope.py", {}, {}); }), ErrorKind::not_found);
    EXPECT_EQ(error_kind([&] { execute_script(ws, "../x.py", {}, {}); }), ErrorKind::sandbox_violation);
}

TEST_F(ExecutorTest, AmbiguousPerformanceIsAbsent) {
    test::write(root / "twice.py", "print('Test accuracy: 0.1')\nprint('Test accuracy: 0.2')\n");
    auto ws = Workspace::open(root);
    EXPECT_FALSE(execute_script(ws, "twice.py", {}, {}).extracted_performance);
}

TEST_F(ExecutorTest, CredentialsAreScrubbed) {
    ::setenv("OPENAI_API_KEY", "x", 1);
    ::setenv("MY_SECRET_THING", "x", 1);
    ::setenv("GH_TOKEN", "x", 1);
    ::setenv("DB_PASSWORD", "x", 1);
    ::setenv("RCA_EXTRA_HIDDEN", "x", 1);
    ::setenv("RCA_VISIBLE", "x", 1);
    auto ws = Workspace::open(root);
    ExecutorOptions o;
    o.scrubbed_env = {"RCA_EXTRA_HIDDEN"};
    const auto r = execute_script(ws, "envdump.py", {}, o);
    ASSERT_EQ(r.exit_status, 0) << r.stderr_text;
    const auto names = text::split_lines(r.stdout_text);
    auto has = [&](const std::string& n) { return std::find(names.begin(), names.end(), n) != names.end(); };
    EXPECT_TRUE(has("RCA_VISIBLE"));
    for (const char* hidden : {"OPENAI_API_KEY", "MY_SECRET_THING", "GH_TOKEN", "DB_PASSWORD", "RCA_EXTRA_HIDDEN"}) {
        EXPECT_FALSE(has(hidden)) << hidden;
    }
}

TEST_F(ExecutorTest, TracedBackendReadsShimOutput) {
    auto ws = Workspace::open(root);
    const auto r = execute_script(ws, "deadbranch.py", {}, traced());
    ASSERT_EQ(r.exit_status, 0) << r.stderr_text;
    ASSERT_TRUE(r.trace) << r.trace_error;
    EXPECT_EQ(r.trace_file, "deadbranch_execution_trace.cover");
    EXPECT_EQ(r.trace->never_executed_lines(), std::vector<std::size_t>{5});
    EXPECT_EQ(r.trace->at(6).kind, LineKind::non_executable);
    EXPECT_EQ(r.trace->at(2).count, 4u);
    EXPECT_EQ(r.stdout_text, "total 3\n");
    const auto obs = render_observation(r);
    EXPECT_NE(obs.find("execution trace (deadbranch_execution_trace.cover): 7 lines, 6 executable, 5 executed, "
                       "1 never executed\nnever executed lines: 5\n"),
              std::string::npos)
        << obs;
}

TEST_F(ExecutorTest, TracedAndPlainAgree) {
    auto ws = Workspace::open(root);
    for (const char* script : {"clean.py", "failing.py", "loop5.py"}) {
        const auto plain = execute_script(ws, script, {"a"}, {});
        const auto shimmed = execute_script(ws, script, {"a"}, traced());
        EXPECT_EQ(plain.exit_status, shimmed.exit_status) << script;
        EXPECT_EQ(plain.stdout_text, shimmed.stdout_text) << script;
        EXPECT_EQ(plain.extracted_performance, shimmed.extracted_performance) << script;
        EXPECT_TRUE(shimmed.trace) << script;
    }
}

TEST_F(ExecutorTest, TracedFailurePropagatesExitStatus) {
    auto ws = Workspace::open(root);
    const auto r = execute_script(ws, "failing.py", {}, traced());
    EXPECT_EQ(r.exit_status, 1);
    EXPECT_NE(r.stderr_text.find("ValueError"), std::string::npos);
}

TEST_F(ExecutorTest, MissingShimReportIsAnnotated) {
    auto ws = Workspace::open(root);
    ExecutorOptions o;
    o.backend = TraceBackend::traced;
    o.trace_shim = "true";
    const auto r = execute_script(ws, "clean.py", {}, o);
    EXPECT_FALSE(r.trace);
    EXPECT_EQ(r.trace_error, "trace shim wrote no report");
    EXPECT_NE(render_observation(r).find("execution trace unavailable: trace shim wrote no report"),
              std::string::npos);
}

TEST_F(ExecutorTest, UnknownInterpreterIsSpawnError) {
    auto manifest = test::read(root / "workspace.toml");
    manifest.replace(manifest.find("interpreter = \""), 15, "interpreter = \"/no/such/bin ");
    test::write(root / "workspace.toml", manifest);
    auto ws = Workspace::open(root);
    EXPECT_EQ(error_kind([&] { execute_script(ws, "clean.py", {}, {}); }), ErrorKind::spawn);
}

TEST(Process, ExitStatusAndSignals) {
    TempDir tmp;
    EXPECT_EQ(run_process({"sh", "-c", "exit 7"}, tmp.path(), 10).exit_status, 7);
    EXPECT_EQ(run_process({"sh", "-c", "kill -TERM $$"}, tmp.path(), 10).exit_status, 128 + 15);
    const auto r = run_process({"sh", "-c", "echo out; echo err >&2; pwd"}, tmp.path(), 10);
    EXPECT_EQ(r.stdout_text, "out\n" + tmp.path().string() + "\n");
    EXPECT_EQ(r.stderr_text, "err\n");
}

TEST(Process, LargeOutputOnBothStreamsDoesNotDeadlock) {
    TempDir tmp;
    const auto r = run_process({"sh", "-c", "yes o | head -c 300000; yes e | head -c 300000 >&2"}, tmp.path(), 30);
    EXPECT_EQ(r.stdout_text.size(), 300000u);
    EXPECT_EQ(r.stderr_text.size(), 300000u);
}

TEST(Process, TimeoutKillsGrandchildren) {
    TempDir tmp;
    const auto start = std::chrono::steady_clock::now();
    const auto r = run_process({"sh", "-c", "sleep 30 & sleep 30; wait"}, tmp.path(), 1);
    EXPECT_TRUE(r.timed_out);
    EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 10.0);
}

TEST(Cover, ParsesFixtures) {
    const auto loop = parse_cover_file(test::fixtures_dir() / "scripts" / "loop5.expected.cover");
    ASSERT_EQ(loop.lines.size(), 4u);
    EXPECT_EQ(loop.at(2).count, 6u);
    EXPECT_EQ(loop.at(3).count, 5u);
    EXPECT_EQ(loop.at(3).source, "    acc += i");
    EXPECT_EQ(loop.executable(), 4u);
    EXPECT_EQ(loop.executed(), 4u);

    const auto dead = parse_cover_file(test::fixtures_dir() / "scripts" / "deadbranch.expected.cover");
    EXPECT_EQ(dead.at(5).kind, LineKind::never_executed);
    EXPECT_EQ(dead.at(5).source, "    print(\"unreachable\")");
    EXPECT_EQ(dead.at(6).kind, LineKind::non_executable);
    EXPECT_EQ(dead.at(6).source, "else:");
}

TEST(Cover, RenderMatchesFixtureBytes) {
    for (const char* name : {"loop5.expected.cover", "deadbranch.expected.cover"}) {
        const auto raw = test::read(test::fixtures_dir() / "scripts" / name);
        EXPECT_EQ(render_cover(parse_cover_text(raw)), raw) << name;
    }
}

TEST(Cover, MalformedLineIsParseError) {
    EXPECT_EQ(error_kind([] { parse_cover_text("    1: ok\nx: nope\n"); }), ErrorKind::parse);
}

TEST(Cover, RandomTracesRoundTrip) {
    test::Gen gen(51);
    for (int i = 0; i < 2000; ++i) {
        LineTrace t;
        const int n = gen.uniform(0, 30);
        for (int k = 1; k <= n; ++k) {
            TraceLine l;
            l.line = static_cast<std::size_t>(k);
            const int pick = gen.uniform(0, 2);
            l.kind = pick == 0 ? LineKind::executed : pick == 1 ? LineKind::never_executed : LineKind::non_executable;
            if (l.kind == LineKind::executed) l.count = static_cast<std::uint64_t>(gen.uniform(1, 2000000));
            l.source = (gen.coin() ? "    " : "") + gen.line(10);
            t.lines.push_back(l);
        }
        const auto back = parse_cover_text(render_cover(t));
        ASSERT_EQ(back.lines.size(), t.lines.size());
        for (std::size_t k = 0; k < t.lines.size(); ++k) {
            ASSERT_EQ(back.lines[k].kind, t.lines[k].kind);
            ASSERT_EQ(back.lines[k].count, t.lines[k].count);
            ASSERT_EQ(back.lines[k].source, t.lines[k].source);
        }
        ASSERT_EQ(back.executable() + 0, t.lines.size() - static_cast<std::size_t>(std::count_if(
                                              t.lines.begin(), t.lines.end(),
                                              [](const TraceLine& l) { return l.kind == LineKind::non_executable; })));
    }
}

TEST(Observation, StreamsAndNeverExecutedListsAreBounded) {
    ExecutionReport r;
    r.script = "big.py";
    r.stdout_text = std::string(50000, 'o');
    r.stderr_text = std::string(50000, 'e');
    LineTrace t;
    for (std::size_t k = 1; k <= 120; ++k) t.lines.push_back({k, LineKind::never_executed, 0, "x = 1"});
    r.trace = t;
    r.trace_file = "big_execution_trace.cover";
    const auto obs = render_observation(r);
    EXPECT_LT(obs.size(), 2 * kMaxStreamChars + 1000);
    EXPECT_NE(obs.find("never executed lines: 1, 2, 3"), std::string::npos);
    EXPECT_NE(obs.find(", 50 ... and 70 more\n"), std::string::npos);
}

TEST(Names, SidecarPaths) {
    EXPECT_EQ(cover_file_for("src/train.py"), "src/train_execution_trace.cover");
    EXPECT_EQ(shim_report_for("train.py"), "train_execution_trace.json");
    EXPECT_EQ(parse_trace_backend("traced"), TraceBackend::traced);
    EXPECT_EQ(error_kind([] { parse_trace_backend("gdb"); }), ErrorKind::config);
}

}  // namespace
}  // namespace rca

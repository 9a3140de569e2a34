#include "rca_cli/cli.hpp"

#include "rca/config.hpp"
#include "rca/diff.hpp"
#include "rca/error.hpp"
#include "rca/evaluation.hpp"
#include "rca/run.hpp"
#include "rca/text.hpp"
#include "rca/workspace.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <ostream>

namespace rca::cli {

namespace {

AppConfig load_config(const std::string& explicit_path) {
    if (!explicit_path.empty()) return AppConfig::load(explicit_path);
    if (const char* env = std::getenv("RCA_CONFIG"); env && *env) return AppConfig::load(env);
    return AppConfig::defaults();
}

int usage_kind(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::usage:
        case ErrorKind::config:
            return kUsage;
        default:
            return kFailure;
    }
}

int cmd_validate(const std::string& dir, std::ostream& out, std::ostream& err) {
    const auto issues = validate_workspace(dir);
    if (issues.empty()) {
        const auto ws = Workspace::open(dir);
        const auto perf = ws.read_baseline_performance();
        out << "workspace " << dir << " is valid\n";
        out << "task: " << (ws.manifest().task.empty() ? "(unnamed)" : ws.manifest().task) << "\n";
        out << "baseline performance: " << perf.value << " (" << to_string(perf.direction) << ")\n";
        return kSuccess;
    }
    err << "workspace " << dir << " is invalid:\n";
    for (const auto& issue : issues) err << "  - " << issue << "\n";
    return kFailure;
}

struct RunArgs {
    std::string workspace;
    std::string mode = "agent";
    std::string config;
    std::string cassette;
    bool record = false;
    bool replay = false;
    int max_steps = 0;
    std::string runs_dir = "runs";
};

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
    RunRequest request;
    request.workspace = args.workspace;
    request.mode = parse_run_mode(args.mode);
    request.config = load_config(args.config);
    request.gateway_mode = args.replay ? GatewayMode::replay : args.record ? GatewayMode::record : GatewayMode::live;
    if ((args.record || args.replay) && args.cassette.empty()) {
        err << "error: --" << (args.replay ? "replay" : "record") << " requires --cassette\n";
        return kUsage;
    }
    if (!args.record && !args.replay && !args.cassette.empty()) {
        err << "error: --cassette needs --record or --replay\n";
        return kUsage;
    }
    request.cassette = args.cassette;
    request.runs_dir = args.runs_dir;
    if (args.max_steps) request.max_steps = args.max_steps;

    const auto outcome = execute_run(request);
    out << "run_id: " << outcome.run_id << "\n";
    out << "run_dir: " << outcome.run_dir.string() << "\n";
    out << "termination: " << to_string(outcome.result.termination) << "\n";
    out << "steps: " << outcome.result.steps_taken << "\n";
    if (outcome.result.generated_script) out << "generated_script: " << *outcome.result.generated_script << "\n";
    if (!outcome.result.error.empty()) err << "error: " << outcome.result.error << "\n";
    return run_exit_code(outcome.result, request.mode);
}

struct EvalArgs {
    std::string runs_dir;
    std::string scores;
    std::string out_dir = "eval";
    std::string config;
};

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
    const auto config = load_config(args.config);
    EvalInputs inputs;
    inputs.runs_dir = args.runs_dir;
    inputs.scores = parse_scores_csv(text::read_file(args.scores));
    inputs.executor = config.executor;

    std::vector<std::string> warnings;
    const auto assessments = assess_runs(inputs, warnings);
    if (assessments.empty()) {
        err << "error: no runs found in " << args.runs_dir << "\n";
        return kFailure;
    }
    auto report = aggregate(assessments);
    report.warnings.insert(report.warnings.begin(), warnings.begin(), warnings.end());

    const fs::path dir = args.out_dir;
    fs::create_directories(dir);
    const auto tables = render_tables(report);
    text::write_file_atomic(dir / "tables.txt", tables);
    text::write_file_atomic(dir / "runs.csv", render_runs_csv(report));
    text::write_file_atomic(dir / "summary.csv", render_groups_csv(report));
    out << tables;
    out << "\nreport written to " << dir.string() << "\n";
    return kSuccess;
}

int cmd_diff(const std::string& a, const std::string& b, std::ostream& out, std::ostream& err) {
    for (const auto& p : {a, b}) {
        std::error_code ec;
        if (!fs::is_regular_file(p, ec)) {
            err << "error: no such file: " << p << "\n";
            return kUsage;
        }
    }
    const auto diff = unified_diff(text::read_file(a), text::read_file(b), a, b);
    out << diff.text;
    return diff.stats.empty() ? kSuccess : kFailure;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Planner/worker agent that turns a methodology description into code"};
    app.name("rca");
    app.require_subcommand(1);

    std::string validate_dir;
    auto* validate = app.add_subcommand("validate", "Check a workspace directory and its manifest");
    validate->add_option("workspace", validate_dir, "Workspace directory")->required();

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run the agent on a copy of a workspace");
    run->add_option("workspace", run_args.workspace, "Workspace directory")->required();
    run->add_option("--mode", run_args.mode, "agent, prescribed or single")
        ->check(CLI::IsMember({"agent", "prescribed", "single"}));
    run->add_option("--config", run_args.config, "TOML config file (default: $RCA_CONFIG)");
    run->add_option("--cassette", run_args.cassette, "Cassette to replay from or record into");
    auto* record = run->add_flag("--record", run_args.record, "Call live models and record a cassette");
    auto* replay = run->add_flag("--replay", run_args.replay, "Serve model calls from the cassette");
    record->excludes(replay);
    run->add_option("--max-steps", run_args.max_steps, "Planner step cap")->check(CLI::PositiveNumber);
    run->add_option("--runs-dir", run_args.runs_dir, "Directory receiving run directories");

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Compute metrics tables over finished runs");
    eval->add_option("runs_dir", eval_args.runs_dir, "Directory of run directories")->required();
    eval->add_option("scores", eval_args.scores, "Reviewer scores CSV")->required();
    eval->add_option("--out", eval_args.out_dir, "Output directory for tables and CSV files");
    eval->add_option("--config", eval_args.config, "TOML config file (executor settings)");

    std::string diff_a, diff_b;
    auto* diff = app.add_subcommand("diff", "Unified line diff of two files");
    diff->add_option("file_a", diff_a)->required();
    diff->add_option("file_b", diff_b)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        err << "run 'rca --help' for usage\n";
        return kUsage;
    }

    try {
        if (*validate) return cmd_validate(validate_dir, out, err);
        if (*run) return cmd_run(run_args, out, err);
        if (*eval) return cmd_eval(eval_args, out, err);
        if (*diff) return cmd_diff(diff_a, diff_b, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return usage_kind(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kUsage;
}

}  // namespace rca::cli

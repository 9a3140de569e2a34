#pragma once

#include "rca/workspace.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rca {

enum class Outcome { A, B, C, D };
enum class QualityBin { S1, S2, S3 };
std::string_view to_string(Outcome outcome);
std::string_view to_string(QualityBin bin);

struct RunAssessment {
    std::string run_id;
    std::string task;
    std::string experiment;
    bool code_generated = false;
    bool executes_clean = false;
    std::optional<double> final_performance;
    double baseline_performance = 0.0;
    PerfDirection perf_direction = PerfDirection::higher_better;
    std::optional<int> manual_score;
    std::size_t lines_edited = 0;
    std::optional<std::size_t> lines_repaired;  // from the reviewer's scores file
};

// D: no code; C: code that fails; A: clean and strictly better than the
// baseline; B: clean otherwise. A clean run without a performance figure is B
// and `warning` explains why.
Outcome classify_outcome(const RunAssessment& run, std::string* warning = nullptr);

QualityBin bin_quality(int score);

// Additions plus deletions of the minimal line diff.
std::size_t lines_edited(std::string_view starter, std::string_view final_code);

// (1 - repaired / edited) * 100. Negative when repairs exceed edits.
double time_saving(std::size_t edited, std::size_t repaired);

struct RunMetrics {
    RunAssessment run;
    Outcome outcome = Outcome::D;
    std::optional<QualityBin> bin;
    std::optional<double> time_saving;
};

struct GroupMetrics {
    std::string experiment;
    std::string datapoint;  // task name, or "Average" for the experiment-wide row
    std::size_t runs = 0;
    std::array<double, 4> category_pct{};  // A, B, C, D
    std::size_t scored_runs = 0;
    std::optional<std::array<double, 3>> bin_pct;  // S1, S2, S3
    std::size_t efficiency_runs = 0;
    std::optional<double> avg_lines_edited;
    std::optional<double> avg_lines_repaired;
    std::optional<double> avg_time_saving;  // mean of per-run percentages
};

struct MetricsReport {
    std::vector<RunMetrics> runs;
    std::vector<GroupMetrics> groups;
    std::vector<std::string> warnings;
};

// Groups by (experiment, task) and adds one "Average" row per experiment.
MetricsReport aggregate(const std::vector<RunAssessment>& assessments);

// Error categories, code quality and efficiency tables as aligned text.
std::string render_tables(const MetricsReport& report);
std::string render_runs_csv(const MetricsReport& report);
std::string render_groups_csv(const MetricsReport& report);

struct ScoreRow {
    std::string run_id;
    std::optional<int> manual_score;
    std::optional<std::size_t> lines_repaired;
    std::string reviewer_id;
};

// Header "run_id,manual_score,lines_repaired,reviewer_id"; empty cells are
// absent values. Duplicate run ids are an error.
std::vector<ScoreRow> parse_scores_csv(std::string_view csv);

}  // namespace rca

#include "rca/evaluation.hpp"

#include "rca/diff.hpp"
#include "rca/error.hpp"
#include "rca/text.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <set>

namespace rca {

std::string_view to_string(Outcome outcome) {
    static constexpr std::string_view names[] = {"A", "B", "C", "D"};
    return names[static_cast<int>(outcome)];
}

std::string_view to_string(QualityBin bin) {
    static constexpr std::string_view names[] = {"S1", "S2", "S3"};
    return names[static_cast<int>(bin)];
}

Outcome classify_outcome(const RunAssessment& run, std::string* warning) {
    if (!run.code_generated) return Outcome::D;
    if (!run.executes_clean) return Outcome::C;
    if (!run.final_performance) {
        if (warning) *warning = run.run_id + ": runs cleanly but reported no performance; classified B";
        return Outcome::B;
    }
    const bool better = run.perf_direction == PerfDirection::higher_better
                            ? *run.final_performance > run.baseline_performance
                            : *run.final_performance < run.baseline_performance;
    return better ? Outcome::A : Outcome::B;
}

QualityBin bin_quality(int score) {
    if (score < 1 || score > 10) {
        throw Error(ErrorKind::validation, "manual score must be between 1 and 10, got " + std::to_string(score));
    }
    if (score >= 8) return QualityBin::S1;
    if (score >= 4) return QualityBin::S2;
    return QualityBin::S3;
}

std::size_t lines_edited(std::string_view starter, std::string_view final_code) {
    return diff_stats(starter, final_code).total();
}

double time_saving(std::size_t edited, std::size_t repaired) {
    if (edited == 0) throw Error(ErrorKind::validation, "time saving is undefined when no lines were edited");
    return (1.0 - static_cast<double>(repaired) / static_cast<double>(edited)) * 100.0;
}

namespace {

GroupMetrics summarize(std::string experiment, std::string datapoint, const std::vector<const RunMetrics*>& runs,
                       std::vector<std::string>& warnings) {
    GroupMetrics g;
    g.experiment = std::move(experiment);
    g.datapoint = std::move(datapoint);
    g.runs = runs.size();
    const auto label = g.experiment + "/" + g.datapoint;

    std::array<std::size_t, 4> categories{};
    std::array<std::size_t, 3> bins{};
    double edited = 0, repaired = 0, saving = 0;
    std::size_t saving_runs = 0;
    for (const auto* r : runs) {
        ++categories[static_cast<int>(r->outcome)];
        if (r->bin) {
            ++bins[static_cast<int>(*r->bin)];
            ++g.scored_runs;
        }
        if (r->run.code_generated && r->run.lines_repaired) {
            ++g.efficiency_runs;
            edited += static_cast<double>(r->run.lines_edited);
            repaired += static_cast<double>(*r->run.lines_repaired);
            if (r->time_saving) {
                saving += *r->time_saving;
                ++saving_runs;
            }
        }
    }
    for (int i = 0; i < 4; ++i) g.category_pct[i] = 100.0 * static_cast<double>(categories[i]) / static_cast<double>(g.runs);
    if (g.scored_runs) {
        std::array<double, 3> pct{};
        for (int i = 0; i < 3; ++i) pct[i] = 100.0 * static_cast<double>(bins[i]) / static_cast<double>(g.scored_runs);
        g.bin_pct = pct;
    } else {
        warnings.push_back(label + ": no scored runs; quality row omitted");
    }
    if (g.efficiency_runs) {
        g.avg_lines_edited = edited / static_cast<double>(g.efficiency_runs);
        g.avg_lines_repaired = repaired / static_cast<double>(g.efficiency_runs);
    } else {
        warnings.push_back(label + ": no runs with generated code and repair counts; efficiency row omitted");
    }
    if (saving_runs) g.avg_time_saving = saving / static_cast<double>(saving_runs);
    return g;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    auto line = [&](const std::vector<std::string>& cells) {
        std::string out;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c) out += "  ";
            // Text columns left-aligned, numbers right-aligned.
            const auto pad = std::string(width[c] - cells[c].size(), ' ');
            out += c < 2 ? cells[c] + pad : pad + cells[c];
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        return out + "\n";
    };
    std::string out = line(header);
    std::size_t total = 0;
    for (auto w : width) total += w;
    out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
    for (const auto& row : rows) out += line(row);
    return out;
}

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_number) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(text::trim(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    if (quoted) throw Error(ErrorKind::parse, "scores line " + std::to_string(line_number) + ": unterminated quote");
    cells.push_back(text::trim(cell));
    return cells;
}

template <typename T>
std::optional<T> parse_cell(const std::string& cell, std::string_view column, std::size_t line_number) {
    if (cell.empty()) return std::nullopt;
    T value{};
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw Error(ErrorKind::parse, "scores line " + std::to_string(line_number) + ": " + std::string(column) +
                                          " is not a non-negative integer: '" + cell + "'");
    }
    return value;
}

}  // namespace

MetricsReport aggregate(const std::vector<RunAssessment>& assessments) {
    MetricsReport report;
    for (const auto& a : assessments) {
        RunMetrics m;
        m.run = a;
        std::string warning;
        m.outcome = classify_outcome(a, &warning);
        if (!warning.empty()) report.warnings.push_back(warning);
        if (a.manual_score) m.bin = bin_quality(*a.manual_score);
        if (a.code_generated && a.lines_repaired) {
            if (a.lines_edited == 0) {
                report.warnings.push_back(a.run_id + ": no lines edited; time saving undefined and excluded");
            } else {
                m.time_saving = time_saving(a.lines_edited, *a.lines_repaired);
            }
        }
        report.runs.push_back(std::move(m));
    }

    // Experiments in first-seen order, tasks sorted within each.
    std::vector<std::string> experiments;
    std::map<std::string, std::map<std::string, std::vector<const RunMetrics*>>> grouped;
    for (const auto& m : report.runs) {
        if (!grouped.count(m.run.experiment)) experiments.push_back(m.run.experiment);
        grouped[m.run.experiment][m.run.task].push_back(&m);
    }
    for (const auto& experiment : experiments) {
        std::vector<const RunMetrics*> all;
        for (const auto& [task, runs] : grouped[experiment]) {
            report.groups.push_back(summarize(experiment, task, runs, report.warnings));
            all.insert(all.end(), runs.begin(), runs.end());
        }
        report.groups.push_back(summarize(experiment, "Average", all, report.warnings));
    }
    return report;
}

std::string render_tables(const MetricsReport& report) {
    std::vector<std::vector<std::string>> categories, quality, efficiency;
    for (const auto& g : report.groups) {
        categories.push_back({g.experiment, g.datapoint, fmt(g.category_pct[0]), fmt(g.category_pct[1]),
                              fmt(g.category_pct[2]), fmt(g.category_pct[3])});
        if (g.bin_pct) {
            quality.push_back({g.experiment, g.datapoint, fmt((*g.bin_pct)[0]), fmt((*g.bin_pct)[1]), fmt((*g.bin_pct)[2])});
        }
        if (g.avg_lines_edited) {
            efficiency.push_back({g.experiment, g.datapoint, fmt(*g.avg_lines_edited), fmt(*g.avg_lines_repaired),
                                  g.avg_time_saving ? fmt(*g.avg_time_saving) : "n/a"});
        }
    }
    std::string out;
    out += "Error categories (A: error-free with improvement, B: error-free without improvement, C: erroneous, D: no code)\n";
    out += table({"Experiment", "Datapoint", "A (%)", "B (%)", "C (%)", "D (%)"}, categories);
    out += "\nCode quality (S1: 8-10, S2: 4-7, S3: 1-3)\n";
    out += table({"Experiment", "Datapoint", "S1 (%)", "S2 (%)", "S3 (%)"}, quality);
    out += "\nEfficiency\n";
    out += table({"Experiment", "Datapoint", "Avg. #Lines Edited", "Avg. #Lines Repaired", "Avg. Time Saving (%)"},
                 efficiency);
    if (!report.warnings.empty()) {
        out += "\nWarnings\n";
        for (const auto& w : report.warnings) out += "- " + w + "\n";
    }
    return out;
}

std::string render_runs_csv(const MetricsReport& report) {
    std::string out = "run_id,task,experiment,outcome,manual_score,quality_bin,lines_edited,lines_repaired,time_saving\n";
    for (const auto& m : report.runs) {
        const auto& r = m.run;
        out += csv_cell(r.run_id) + "," + csv_cell(r.task) + "," + csv_cell(r.experiment) + "," +
               std::string(to_string(m.outcome)) + "," + (r.manual_score ? std::to_string(*r.manual_score) : "") + "," +
               (m.bin ? std::string(to_string(*m.bin)) : "") + "," + std::to_string(r.lines_edited) + "," +
               (r.lines_repaired ? std::to_string(*r.lines_repaired) : "") + "," +
               (m.time_saving ? fmt(*m.time_saving) : "") + "\n";
    }
    return out;
}

std::string render_groups_csv(const MetricsReport& report) {
    std::string out =
        "experiment,datapoint,runs,a_pct,b_pct,c_pct,d_pct,scored_runs,s1_pct,s2_pct,s3_pct,"
        "avg_lines_edited,avg_lines_repaired,avg_time_saving\n";
    auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
    for (const auto& g : report.groups) {
        out += csv_cell(g.experiment) + "," + csv_cell(g.datapoint) + "," + std::to_string(g.runs);
        for (double p : g.category_pct) out += "," + fmt(p);
        out += "," + std::to_string(g.scored_runs);
        for (int i = 0; i < 3; ++i) out += "," + (g.bin_pct ? fmt((*g.bin_pct)[i]) : std::string());
        out += "," + opt(g.avg_lines_edited) + "," + opt(g.avg_lines_repaired) + "," + opt(g.avg_time_saving) + "\n";
    }
    return out;
}

std::vector<ScoreRow> parse_scores_csv(std::string_view csv) {
    const auto lines = text::split_lines(csv);
    std::size_t first = 0;
    while (first < lines.size() && text::trim(lines[first]).empty()) ++first;
    if (first == lines.size()) throw Error(ErrorKind::parse, "scores file is empty");
    auto header = split_csv_line(lines[first], first + 1);
    for (auto& h : header) h = text::to_lower(h);
    const std::vector<std::string> expected = {"run_id", "manual_score", "lines_repaired", "reviewer_id"};
    if (header != expected) {
        throw Error(ErrorKind::parse, "scores header must be run_id,manual_score,lines_repaired,reviewer_id");
    }
    std::vector<ScoreRow> rows;
    std::set<std::string> seen;
    for (std::size_t i = first + 1; i < lines.size(); ++i) {
        auto line = lines[i];
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        const auto n = i + 1;
        const auto cells = split_csv_line(line, n);
        if (cells.size() != 4) {
            throw Error(ErrorKind::parse, "scores line " + std::to_string(n) + ": expected 4 columns, got " +
                                              std::to_string(cells.size()));
        }
        ScoreRow row;
        row.run_id = cells[0];
        if (row.run_id.empty()) throw Error(ErrorKind::parse, "scores line " + std::to_string(n) + ": empty run_id");
        if (!seen.insert(row.run_id).second) {
            throw Error(ErrorKind::validation, "scores line " + std::to_string(n) + ": duplicate run_id " + row.run_id);
        }
        row.manual_score = parse_cell<int>(cells[1], "manual_score", n);
        if (row.manual_score && (*row.manual_score < 1 || *row.manual_score > 10)) {
            throw Error(ErrorKind::validation, "scores line " + std::to_string(n) + ": manual_score must be 1-10");
        }
        row.lines_repaired = parse_cell<std::size_t>(cells[2], "lines_repaired", n);
        row.reviewer_id = cells[3];
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace rca

#include "rca/workers.hpp"

#include "rca/error.hpp"
#include "rca/templates.hpp"
#include "rca/text.hpp"

#include <future>
#include <regex>

namespace rca {

std::string_view persona_for(ActionId action) {
    switch (action) {
        case ActionId::understand_file:
            return "You are an expert in understanding files containing both code and natural language.";
        case ActionId::understand_file_with_context:
            return "You are an expert in understanding files containing both code and natural language given some "
                   "context.";
        case ActionId::edit_script: return "You are an expert in editing code files.";
        case ActionId::edit_script_with_context:
            return "You are an expert in editing code files given some code or text context.";
        case ActionId::reflection:
            return "You are an expert in reflecting on previous actions when implementing code for a given research "
                   "methodology.";
        case ActionId::check_implementation:
            return "You are an expert in checking the implementation of a methodology in a piece of edited code given "
                   "the starter code that was edited to arrive at the edited code.";
        default: break;
    }
    throw Error(ErrorKind::validation, "action has no worker persona");
}

std::string_view to_string(SubpartStatus status) {
    return status == SubpartStatus::implemented ? "implemented" : "missing";
}

namespace {

std::string with_newline(std::string s) {
    if (!s.empty() && s.back() != '\n') s += '\n';
    return s;
}

void require_query(std::string_view query, std::string_view field) {
    if (text::trim(query).empty()) {
        throw Error(ErrorKind::validation, "'" + std::string(field) + "' must not be empty");
    }
}

bool is_fence(std::string_view line) {
    const auto t = text::trim(line);
    return text::starts_with(t, "```");
}

}  // namespace

std::optional<std::string> extract_fenced_block(std::string_view reply) {
    const auto lines = text::split_lines_keep(reply);
    std::size_t i = 0;
    while (i < lines.size() && !is_fence(lines[i])) ++i;
    if (i == lines.size()) return std::nullopt;
    std::string body;
    for (++i; i < lines.size(); ++i) {
        if (text::trim(lines[i]) == "```") return with_newline(std::move(body));
        body += lines[i];
    }
    return std::nullopt;  // unterminated block
}

std::vector<std::string> parse_numbered_list(std::string_view reply) {
    static const std::regex item(R"(^\s*(\d+)[.)]\s+(.*\S)\s*$)");
    std::vector<std::string> items;
    bool in_item = false;
    for (const auto& line : text::split_lines(reply)) {
        std::smatch m;
        if (std::regex_match(line, m, item)) {
            items.push_back(m[2].str());
            in_item = true;
        } else if (text::trim(line).empty()) {
            in_item = false;
        } else if (in_item) {
            items.back() += " " + text::trim(line);
        }
    }
    return items;
}

SubpartReport parse_subpart_report(std::string_view reply, int subpart_id, std::string description) {
    enum class Section { none, snippet, proposed };
    SubpartReport report;
    report.subpart_id = subpart_id;
    report.description = std::move(description);

    std::optional<SubpartStatus> status;
    Section current = Section::none;
    std::string snippet, proposed;
    for (auto raw : text::split_lines_keep(reply)) {
        // "**Status**: x" and "Status: x" name the same heading.
        auto trimmed = text::trim(raw);
        if (const auto colon = trimmed.find(':'); colon != std::string::npos && colon < 24) {
            std::string label;
            for (char c : trimmed.substr(0, colon)) {
                if (c != '*' && c != '_' && c != '#') label += c;
            }
            trimmed = text::trim(label) + trimmed.substr(colon);
        }
        const auto upper = [&] {
            std::string u = trimmed;
            for (auto& c : u) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            return u;
        }();
        if (text::starts_with(upper, "STATUS:")) {
            const auto value = text::to_lower(text::trim(trimmed.substr(7)));
            std::string word;
            for (char c : value) {
                if (std::isalpha(static_cast<unsigned char>(c))) word += c;
                else break;
            }
            if (word == "implemented") status = SubpartStatus::implemented;
            else if (word == "missing") status = SubpartStatus::missing;
            else throw Error(ErrorKind::malformed_input, "STATUS must be implemented or missing, got '" + value + "'");
            current = Section::none;
        } else if (text::starts_with(upper, "SNIPPET:")) {
            current = Section::snippet;
            const auto rest = text::trim(trimmed.substr(8));
            if (!rest.empty()) snippet += rest + "\n";
        } else if (text::starts_with(upper, "PROPOSED EDIT:")) {
            current = Section::proposed;
            const auto rest = text::trim(trimmed.substr(14));
            if (!rest.empty()) proposed += rest + "\n";
        } else if (current == Section::snippet) {
            snippet += raw;
        } else if (current == Section::proposed) {
            proposed += raw;
        }
    }
    if (!status) throw Error(ErrorKind::malformed_input, "reply has no STATUS line");
    report.status = *status;
    report.snippet = text::trim(snippet);
    report.proposed_edit = text::trim(proposed);
    if (text::to_lower(report.proposed_edit) == "none") report.proposed_edit.clear();

    if (report.status == SubpartStatus::implemented && report.snippet.empty()) {
        throw Error(ErrorKind::malformed_input, "an implemented subpart needs a SNIPPET");
    }
    if (report.status == SubpartStatus::missing && report.proposed_edit.empty()) {
        throw Error(ErrorKind::malformed_input, "a missing subpart needs a PROPOSED EDIT");
    }
    if (report.status == SubpartStatus::implemented) report.proposed_edit.clear();
    return report;
}

std::string render_reports(const std::vector<SubpartReport>& reports) {
    std::string out;
    for (const auto& r : reports) {
        out += "Subpart " + std::to_string(r.subpart_id) + ": " + r.description + "\n";
        out += "STATUS: " + std::string(to_string(r.status)) + "\n";
        out += "SNIPPET:\n" + with_newline(r.snippet);
        if (r.status == SubpartStatus::missing) out += "PROPOSED EDIT:\n" + with_newline(r.proposed_edit);
        out += "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------

Workers::Workers(Workspace& workspace, Gateway& gateway, WorkerConfig config)
    : workspace_(workspace), gateway_(gateway), config_(config) {
    if (config_.chunk_chars == 0) throw Error(ErrorKind::config, "worker chunk size must be positive");
    if (config_.retry_budget <= 0) throw Error(ErrorKind::config, "worker retry budget must be positive");
}

std::string Workers::call(std::string_view purpose, const std::string& prompt) {
    return gateway_.complete(RoleTag::worker, purpose, prompt);
}

std::string Workers::understand_file(std::string_view file, std::string_view query) {
    const auto content = workspace_.read(file);
    require_query(query, "things to look for");

    // Split at line boundaries into chunks of at most chunk_chars; a single
    // overlong line is cut wherever the limit falls.
    std::vector<std::string> chunks;
    std::string current;
    for (auto line : text::split_lines_keep(content)) {
        while (!line.empty()) {
            if (current.size() + line.size() <= config_.chunk_chars) {
                current += line;
                line = {};
            } else if (current.empty()) {
                current.assign(line.substr(0, config_.chunk_chars));
                line.remove_prefix(config_.chunk_chars);
                chunks.push_back(std::move(current));
                current.clear();
            } else {
                chunks.push_back(std::move(current));
                current.clear();
            }
        }
    }
    if (!current.empty() || chunks.empty()) chunks.push_back(std::move(current));

    std::string answer;
    const auto n = chunks.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::string note = n > 1 ? " (part " + std::to_string(i + 1) + " of " + std::to_string(n) + ")" : "";
        const auto prompt = templates::fill("worker_understand_file",
                                            {{"persona", std::string(persona_for(ActionId::understand_file))},
                                             {"file_name", std::string(file)},
                                             {"part_note", note},
                                             {"file_content", chunks[i]},
                                             {"query", std::string(query)}});
        auto reply = call("understand_file", prompt);
        if (n > 1) {
            if (!answer.empty()) answer += "\n\n";
            answer += "Part " + std::to_string(i + 1) + " of " + std::to_string(n) + ":\n";
        }
        answer += reply;
    }
    return answer;
}

std::string Workers::understand_file_with_context(std::string_view file, long file_start, long file_end,
                                                  std::string_view script, long script_start, long script_end,
                                                  std::string_view query) {
    const auto file_excerpt = workspace_.inspect_lines(file, file_start, file_end);
    const auto code_excerpt = workspace_.inspect_lines(script, script_start, script_end);
    require_query(query, "things to look for");
    const auto prompt = templates::fill(
        "worker_understand_file_with_context",
        {{"persona", std::string(persona_for(ActionId::understand_file_with_context))},
         {"file_name", std::string(file)},
         {"file_start", std::to_string(file_start)},
         {"file_end", std::to_string(file_end)},
         {"file_excerpt", file_excerpt},
         {"script_name", std::string(script)},
         {"script_start", std::to_string(script_start)},
         {"script_end", std::to_string(script_end)},
         {"code_excerpt", code_excerpt},
         {"query", std::string(query)}});
    return call("understand_file_with_context", prompt);
}

EditOutcome Workers::run_edit(std::string_view purpose, std::string_view script, std::string prompt,
                              std::string_view save_as) {
    const auto source = workspace_.read(script);
    workspace_.resolve(save_as);  // sandbox check before spending any model call

    std::string attempt_prompt = prompt;
    for (int attempt = 1; attempt <= config_.retry_budget; ++attempt) {
        const auto reply = call(purpose, attempt_prompt);
        if (auto content = extract_fenced_block(reply)) {
            workspace_.apply_edit(save_as, *content);
            EditOutcome outcome;
            outcome.saved_as = std::string(save_as);
            outcome.diff = unified_diff(source, *content, script, save_as);
            return outcome;
        }
        attempt_prompt = prompt +
                         "\n\nYour previous reply did not contain a fenced code block. Reply with the complete "
                         "edited script inside a single ``` fenced code block.";
    }
    throw Error(ErrorKind::extraction, "no fenced code block in the editor's reply after " +
                                           std::to_string(config_.retry_budget) + " attempts");
}

EditOutcome Workers::edit_script(std::string_view script, std::string_view instructions, std::string_view save_as) {
    const auto content = workspace_.read(script);
    require_query(instructions, "edit instructions");
    auto prompt = templates::fill("worker_edit_script", {{"persona", std::string(persona_for(ActionId::edit_script))},
                                                         {"script_name", std::string(script)},
                                                         {"script_content", with_newline(content)},
                                                         {"instructions", std::string(instructions)}});
    return run_edit("edit_script", script, std::move(prompt), save_as);
}

EditOutcome Workers::edit_script_with_context(std::string_view script, std::string_view instructions,
                                              std::string_view context_file, long context_start, long context_end,
                                              std::string_view save_as) {
    const auto content = workspace_.read(script);
    const auto excerpt = workspace_.inspect_lines(context_file, context_start, context_end);
    require_query(instructions, "edit instructions");
    auto prompt = templates::fill("worker_edit_script_with_context",
                                  {{"persona", std::string(persona_for(ActionId::edit_script_with_context))},
                                   {"script_name", std::string(script)},
                                   {"script_content", with_newline(content)},
                                   {"context_file", std::string(context_file)},
                                   {"context_start", std::to_string(context_start)},
                                   {"context_end", std::to_string(context_end)},
                                   {"context_excerpt", excerpt},
                                   {"instructions", std::string(instructions)}});
    return run_edit("edit_script_with_context", script, std::move(prompt), save_as);
}

std::string Workers::reflect(std::string_view query, std::string_view log_summary) {
    require_query(query, "things to reflect on");
    std::string summary(log_summary);
    const auto limit = config_.reflection_summary_chars;
    if (summary.size() > limit) {
        // Keep the most recent entries, cutting at a line boundary when possible.
        auto tail = summary.substr(summary.size() - limit);
        const auto nl = tail.find('\n');
        if (nl != std::string::npos && nl + 1 < tail.size()) tail.erase(0, nl + 1);
        summary = "[earlier entries omitted]\n" + tail;
    }
    if (summary.empty()) summary = "(empty)";
    const auto prompt = templates::fill("worker_reflection", {{"persona", std::string(persona_for(ActionId::reflection))},
                                                              {"log_summary", summary},
                                                              {"query", std::string(query)}});
    return call("reflection", prompt);
}

const std::vector<std::string>& Workers::decompose_methodology() {
    if (decomposition_) return *decomposition_;
    const auto& file = workspace_.path_of(FileRole::methodology);
    const auto base = templates::fill("worker_decompose",
                                      {{"persona", std::string(persona_for(ActionId::understand_file))},
                                       {"file_name", file},
                                       {"methodology", workspace_.read(file)}});
    auto prompt = base;
    for (int attempt = 1; attempt <= config_.retry_budget; ++attempt) {
        auto items = parse_numbered_list(call("decompose_methodology", prompt));
        if (!items.empty()) {
            decomposition_ = std::move(items);
            return *decomposition_;
        }
        prompt = base + "\n\nYour previous reply contained no numbered list. Reply with a numbered list only.";
    }
    throw Error(ErrorKind::extraction, "methodology decomposition produced no numbered list after " +
                                           std::to_string(config_.retry_budget) + " attempts");
}

SubpartReport Workers::check_subpart(int id, const std::string& description,
                                     const std::map<std::string, std::string>& base_values) {
    auto values = base_values;
    values["subpart_id"] = std::to_string(id);
    values["subpart"] = description;
    const auto base = templates::fill("worker_check_implementation", values);
    auto prompt = base;
    std::string last_error;
    for (int attempt = 1; attempt <= config_.retry_budget; ++attempt) {
        try {
            return parse_subpart_report(call("check_implementation", prompt), id, description);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::malformed_input) throw;
            last_error = e.what();
            prompt = base + "\n\nYour previous reply was rejected: " + last_error +
                     ". Answer again in exactly the requested format.";
        }
    }
    throw Error(ErrorKind::extraction, "subpart " + std::to_string(id) + " check failed after " +
                                           std::to_string(config_.retry_budget) + " attempts: " + last_error);
}

std::vector<SubpartReport> Workers::check_implementation(std::string_view script) {
    const auto edited = workspace_.read(script);
    const auto& starter = workspace_.path_of(FileRole::starter_code);
    const std::map<std::string, std::string> base = {
        {"persona", std::string(persona_for(ActionId::check_implementation))},
        {"starter_name", starter},
        {"starter_code", with_newline(workspace_.read(starter))},
        {"script_name", std::string(script)},
        {"edited_code", with_newline(edited)},
    };
    const auto& subparts = decompose_methodology();
    std::vector<SubpartReport> reports;
    if (gateway_.allows_concurrency() && subparts.size() > 1) {
        std::vector<std::future<SubpartReport>> pending;
        for (std::size_t i = 0; i < subparts.size(); ++i) {
            pending.push_back(std::async(std::launch::async, [this, i, &subparts, &base] {
                return check_subpart(static_cast<int>(i + 1), subparts[i], base);
            }));
        }
        for (auto& f : pending) reports.push_back(f.get());
    } else {
        for (std::size_t i = 0; i < subparts.size(); ++i) {
            reports.push_back(check_subpart(static_cast<int>(i + 1), subparts[i], base));
        }
    }
    return reports;
}

}  // namespace rca

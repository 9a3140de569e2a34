#pragma once

#include "rca/actions.hpp"
#include "rca/config.hpp"
#include "rca/diff.hpp"
#include "rca/gateway.hpp"
#include "rca/workspace.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rca {

// Fixed system text of each LLM-backed action. Throws for programmatic actions.
std::string_view persona_for(ActionId action);

enum class SubpartStatus { implemented, missing };
std::string_view to_string(SubpartStatus status);

struct SubpartReport {
    int subpart_id = 0;  // 1-based
    std::string description;
    SubpartStatus status = SubpartStatus::missing;
    std::string snippet;        // implementing code, or the location to change
    std::string proposed_edit;  // only for missing subparts
};

struct EditOutcome {
    std::string saved_as;
    UnifiedDiff diff;  // source script vs saved file
};

// Content of the first fenced code block, with a guaranteed trailing newline.
std::optional<std::string> extract_fenced_block(std::string_view text);

// Items of a "1. ..." / "2) ..." list. Unnumbered lines directly after an item
// continue it; anything before the first item is ignored.
std::vector<std::string> parse_numbered_list(std::string_view text);

// Parses the STATUS / SNIPPET / PROPOSED EDIT reply of a subpart check and
// enforces the report invariants; throws malformed_input otherwise.
SubpartReport parse_subpart_report(std::string_view text, int subpart_id, std::string description);

std::string render_reports(const std::vector<SubpartReport>& reports);

// The LLM-backed actions. Each call is one persona-scoped request to the
// worker role; the only files touched are edit targets, through apply_edit.
class Workers {
public:
    Workers(Workspace& workspace, Gateway& gateway, WorkerConfig config = {});

    std::string understand_file(std::string_view file, std::string_view query);
    std::string understand_file_with_context(std::string_view file, long file_start, long file_end,
                                             std::string_view script, long script_start, long script_end,
                                             std::string_view query);

    EditOutcome edit_script(std::string_view script, std::string_view instructions, std::string_view save_as);
    EditOutcome edit_script_with_context(std::string_view script, std::string_view instructions,
                                         std::string_view context_file, long context_start, long context_end,
                                         std::string_view save_as);

    std::string reflect(std::string_view query, std::string_view log_summary);

    // Cached for the lifetime of this object.
    const std::vector<std::string>& decompose_methodology();
    bool has_decomposition() const { return decomposition_.has_value(); }

    // One report per decomposed subpart, in order. Decomposes on first use.
    std::vector<SubpartReport> check_implementation(std::string_view script);

private:
    std::string call(std::string_view purpose, const std::string& prompt);
    EditOutcome run_edit(std::string_view purpose, std::string_view script, std::string prompt,
                         std::string_view save_as);
    SubpartReport check_subpart(int id, const std::string& description, const std::map<std::string, std::string>& base);

    Workspace& workspace_;
    Gateway& gateway_;
    WorkerConfig config_;
    std::optional<std::vector<std::string>> decomposition_;
};

}  // namespace rca

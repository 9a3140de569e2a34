#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rca {

enum class Pool { A, B, C };
std::string_view to_string(Pool pool);

enum class ActionKind { programmatic, llm_backed };

enum class ActionId {
    list_files,
    copy_file,
    inspect_script_lines,
    execute_script,
    undo_edit_script,
    get_code_diff,
    final_answer,
    request_expert_help,
    understand_file,
    understand_file_with_context,
    edit_script,
    edit_script_with_context,
    reflection,
    check_implementation,
};

enum class FieldKind { path, text, integer, argument_list };

struct FieldSpec {
    std::string name;
    FieldKind kind;
};

struct ActionSpec {
    ActionId id;
    std::string name;
    std::vector<FieldSpec> inputs;
    Pool pool;
    ActionKind kind;
    std::string description;
};

using FieldValue = std::variant<std::string, long long, std::vector<std::string>>;

struct ActionInvocation {
    const ActionSpec* spec = nullptr;
    std::map<std::string, FieldValue> values;  // keyed by canonical field name
    std::string raw_text;

    ActionId id() const { return spec->id; }
    const std::string& name() const { return spec->name; }

    const std::string& text(std::string_view field) const;
    long long integer(std::string_view field) const;
    const std::vector<std::string>& arguments(std::string_view field) const;

    // Same action with identical field values; raw_text is ignored.
    bool same_request(const ActionInvocation& other) const;
};

// The fourteen registered actions. Immutable after construction.
class ActionRegistry {
public:
    static const ActionRegistry& instance();

    // Exact, case-sensitive match after trimming. "Edit Script (AI)" style
    // aliases resolve to their canonical action.
    const ActionSpec& lookup(std::string_view name) const;
    const ActionSpec& get(ActionId id) const;
    std::span<const ActionSpec> all() const { return specs_; }

    // Catalog text injected into planner prompts.
    std::string render_catalog() const;

private:
    ActionRegistry();

    std::vector<ActionSpec> specs_;
    std::map<std::string, std::size_t, std::less<>> aliases_;
};

// Parses an Action Input block (a single JSON object) against `spec`.
ActionInvocation parse_invocation(const ActionSpec& spec, std::string_view block);

// Canonical JSON rendering; parse_invocation(spec, render_invocation(inv))
// reproduces inv's values.
std::string render_invocation(const ActionInvocation& invocation);

Pool pool_of(const ActionInvocation& invocation);

}  // namespace rca

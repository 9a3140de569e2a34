#include "rca/actions.hpp"

#include "rca/error.hpp"
#include "rca/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <limits>

namespace rca {

using nlohmann::json;

std::string_view to_string(Pool pool) {
    switch (pool) {
        case Pool::A: return "A";
        case Pool::B: return "B";
        case Pool::C: return "C";
    }
    return "?";
}

const std::string& ActionInvocation::text(std::string_view field) const {
    auto it = values.find(std::string(field));
    if (it == values.end() || !std::holds_alternative<std::string>(it->second)) {
        throw Error(ErrorKind::missing_field, "invocation has no text field '" + std::string(field) + "'");
    }
    return std::get<std::string>(it->second);
}

long long ActionInvocation::integer(std::string_view field) const {
    auto it = values.find(std::string(field));
    if (it == values.end() || !std::holds_alternative<long long>(it->second)) {
        throw Error(ErrorKind::missing_field, "invocation has no integer field '" + std::string(field) + "'");
    }
    return std::get<long long>(it->second);
}

const std::vector<std::string>& ActionInvocation::arguments(std::string_view field) const {
    auto it = values.find(std::string(field));
    if (it == values.end() || !std::holds_alternative<std::vector<std::string>>(it->second)) {
        throw Error(ErrorKind::missing_field, "invocation has no argument field '" + std::string(field) + "'");
    }
    return std::get<std::vector<std::string>>(it->second);
}

bool ActionInvocation::same_request(const ActionInvocation& other) const {
    return spec == other.spec && values == other.values;
}

ActionRegistry::ActionRegistry() {
    using F = FieldKind;
    // clang-format off
    specs_ = {
        {ActionId::list_files, "List Files",
         {{"directory path", F::path}}, Pool::A, ActionKind::programmatic,
         "List the files and directories in a directory of the workspace."},
        {ActionId::copy_file, "Copy File",
         {{"source", F::path}, {"destination", F::path}}, Pool::B, ActionKind::programmatic,
         "Copy a file to a new location inside the workspace."},
        {ActionId::inspect_script_lines, "Inspect Script Lines",
         {{"script name", F::path}, {"start line number", F::integer}, {"end line number", F::integer}},
         Pool::A, ActionKind::programmatic,
         "Show numbered lines of a script (at most 100 lines per call)."},
        {ActionId::execute_script, "Execute Script",
         {{"script name", F::path}, {"arguments", F::argument_list}}, Pool::B, ActionKind::programmatic,
         "Run a script and observe its output, errors and per-line execution trace."},
        {ActionId::undo_edit_script, "Undo Edit Script",
         {{"script name", F::path}}, Pool::B, ActionKind::programmatic,
         "Revert the most recent edit made to a script."},
        {ActionId::get_code_diff, "Get Code Diff",
         {{"script 1 name", F::path}, {"script 2 name", F::path}}, Pool::A, ActionKind::programmatic,
         "Show a unified diff between two scripts."},
        {ActionId::final_answer, "Final Answer",
         {{"description", F::text}}, Pool::C, ActionKind::programmatic,
         "End the run once the methodology is implemented, executed and verified."},
        {ActionId::request_expert_help, "Request Planning Expert Help",
         {{"request description", F::text}}, Pool::C, ActionKind::llm_backed,
         "Ask a much stronger planning model for a plan when stuck (limited budget)."},
        {ActionId::understand_file, "Understand File",
         {{"file name", F::path}, {"things to look for", F::text}}, Pool::A, ActionKind::llm_backed,
         "Read a whole file and answer what to look for in it."},
        {ActionId::understand_file_with_context, "Understand File with Code Context",
         {{"file name", F::path}, {"file start line number", F::integer}, {"file end line number", F::integer},
          {"script name", F::path}, {"script start line number", F::integer}, {"script end line number", F::integer},
          {"things to look for", F::text}},
         Pool::A, ActionKind::llm_backed,
         "Understand an excerpt of a file together with an excerpt of related code."},
        {ActionId::edit_script, "Edit Script",
         {{"script name", F::path}, {"edit instructions", F::text}, {"save script name", F::path}},
         Pool::B, ActionKind::llm_backed,
         "Have an editor rewrite a script following instructions and save the result."},
        {ActionId::edit_script_with_context, "Edit Script with Context",
         {{"script name", F::path}, {"edit instructions", F::text}, {"context file name", F::path},
          {"file start line number", F::integer}, {"file end line number", F::integer},
          {"save script name", F::path}},
         Pool::B, ActionKind::llm_backed,
         "Edit a script using an excerpt of another file as additional context."},
        {ActionId::reflection, "Reflection",
         {{"things to reflect on", F::text}}, Pool::C, ActionKind::llm_backed,
         "Reflect on the actions and observations so far and revise the plan."},
        {ActionId::check_implementation, "Check Implementation",
         {{"script name", F::path}}, Pool::C, ActionKind::llm_backed,
         "Check, subpart by subpart, whether a script implements the methodology."},
    };
    // clang-format on
    for (std::size_t i = 0; i < specs_.size(); ++i) aliases_.emplace(specs_[i].name, i);
    const auto edit = static_cast<std::size_t>(ActionId::edit_script);
    const auto edit_ctx = static_cast<std::size_t>(ActionId::edit_script_with_context);
    aliases_.emplace("Edit Script (AI)", edit);
    aliases_.emplace("Edit Script (AI) with Context", edit_ctx);
    aliases_.emplace("Edit Script (AI) with context", edit_ctx);
}

const ActionRegistry& ActionRegistry::instance() {
    static const ActionRegistry registry;
    return registry;
}

const ActionSpec& ActionRegistry::get(ActionId id) const {
    return specs_.at(static_cast<std::size_t>(id));
}

const ActionSpec& ActionRegistry::lookup(std::string_view name) const {
    const auto trimmed = text::trim(name);
    if (auto it = aliases_.find(trimmed); it != aliases_.end()) return specs_[it->second];

    const ActionSpec* nearest = nullptr;
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (const auto& spec : specs_) {
        const auto d = text::levenshtein(text::to_lower(trimmed), text::to_lower(spec.name));
        if (d < best) {
            best = d;
            nearest = &spec;
        }
    }
    std::string message = "unknown action '" + trimmed + "'.";
    if (nearest && best <= std::max<std::size_t>(3, trimmed.size() / 4)) {
        message += " Did you mean '" + nearest->name + "'?";
    }
    message += " Valid actions: ";
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        if (i) message += ", ";
        message += specs_[i].name;
    }
    throw Error(ErrorKind::unknown_action, message);
}

std::string ActionRegistry::render_catalog() const {
    std::string out;
    for (const auto& spec : specs_) {
        out += "- " + spec.name + ": " + spec.description + "\n";
        out += "  Action Input fields: ";
        for (std::size_t i = 0; i < spec.inputs.size(); ++i) {
            if (i) out += ", ";
            out += "\"" + spec.inputs[i].name + "\"";
            switch (spec.inputs[i].kind) {
                case FieldKind::integer: out += " (integer)"; break;
                case FieldKind::argument_list: out += " (string or list of strings)"; break;
                default: break;
            }
        }
        out += "\n";
    }
    return out;
}

namespace {

std::string strip_code_fence(std::string block) {
    block = text::trim(block);
    if (text::starts_with(block, "```")) {
        const auto first_nl = block.find('\n');
        const auto last_fence = block.rfind("```");
        if (first_nl != std::string::npos && last_fence > first_nl) {
            block = text::trim(block.substr(first_nl + 1, last_fence - first_nl - 1));
        }
    }
    return block;
}

json parse_object(std::string_view raw) {
    const auto block = strip_code_fence(std::string(raw));
    auto parsed = json::parse(block, nullptr, false);
    if (parsed.is_discarded()) {
        // Tolerate prose around the object; the object itself must still parse.
        const auto open = block.find('{');
        const auto close = block.rfind('}');
        if (open != std::string::npos && close != std::string::npos && close > open) {
            parsed = json::parse(block.substr(open, close - open + 1), nullptr, false);
        }
    }
    if (parsed.is_discarded() || !parsed.is_object()) {
        throw Error(ErrorKind::malformed_input,
                    "Action Input must be a single JSON object, e.g. {\"field name\": \"value\"}");
    }
    return parsed;
}

FieldValue convert(const FieldSpec& field, const json& value) {
    auto mismatch = [&](std::string_view expected) {
        return Error(ErrorKind::type_mismatch, "field '" + field.name + "' expects " +
                                                   std::string(expected) + ", got " + value.dump());
    };
    switch (field.kind) {
        case FieldKind::path:
        case FieldKind::text:
            if (!value.is_string()) throw mismatch("a string");
            return value.get<std::string>();
        case FieldKind::integer:
            if (value.is_number_integer()) return value.get<long long>();
            if (value.is_string()) {
                const auto s = text::trim(value.get<std::string>());
                std::size_t used = 0;
                try {
                    const long long n = std::stoll(s, &used);
                    if (used == s.size() && !s.empty()) return n;
                } catch (const std::exception&) {
                }
            }
            throw mismatch("an integer");
        case FieldKind::argument_list:
            if (value.is_string()) return text::split_arguments(value.get<std::string>());
            if (value.is_array()) {
                std::vector<std::string> args;
                for (const auto& item : value) {
                    if (!item.is_string()) throw mismatch("a string or list of strings");
                    args.push_back(item.get<std::string>());
                }
                return args;
            }
            throw mismatch("a string or list of strings");
    }
    throw mismatch("a value");
}

}  // namespace

ActionInvocation parse_invocation(const ActionSpec& spec, std::string_view block) {
    const auto object = parse_object(block);

    std::map<std::string, const json*> by_field;
    for (const auto& [key, value] : object.items()) {
        const auto normalized = text::to_lower(text::trim(key));
        auto field = std::find_if(spec.inputs.begin(), spec.inputs.end(),
                                  [&](const FieldSpec& f) { return f.name == normalized; });
        if (field == spec.inputs.end()) {
            std::string expected;
            for (const auto& f : spec.inputs) expected += (expected.empty() ? "\"" : ", \"") + f.name + "\"";
            throw Error(ErrorKind::unknown_field, "unknown field '" + key + "' for action '" + spec.name +
                                                      "'; expected fields: " + expected);
        }
        if (!by_field.emplace(field->name, &value).second) {
            throw Error(ErrorKind::malformed_input, "field '" + field->name + "' given more than once");
        }
    }

    ActionInvocation inv;
    inv.spec = &spec;
    inv.raw_text = std::string(block);
    for (const auto& field : spec.inputs) {
        auto it = by_field.find(field.name);
        if (it == by_field.end()) {
            throw Error(ErrorKind::missing_field,
                        "missing field '" + field.name + "' for action '" + spec.name + "'");
        }
        inv.values.emplace(field.name, convert(field, *it->second));
    }
    return inv;
}

std::string render_invocation(const ActionInvocation& invocation) {
    nlohmann::ordered_json object = nlohmann::ordered_json::object();
    for (const auto& field : invocation.spec->inputs) {
        const auto& value = invocation.values.at(field.name);
        std::visit([&](const auto& v) { object[field.name] = v; }, value);
    }
    return object.dump();
}

Pool pool_of(const ActionInvocation& invocation) { return invocation.spec->pool; }

}  // namespace rca

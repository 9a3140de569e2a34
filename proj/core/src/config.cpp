#include "rca/config.hpp"

#include "rca/error.hpp"
#include "rca/text.hpp"
#include "rca/workspace.hpp"

#include <toml.hpp>

#include <set>

namespace rca {

namespace {

[[noreturn]] void fail(std::string_view source, const std::string& message) {
    throw Error(ErrorKind::config, std::string(source) + ": " + message);
}

toml::table parse_toml(std::string_view content, std::string_view source) {
    try {
        return toml::parse(content, source);
    } catch (const toml::parse_error& e) {
        const auto& where = e.source().begin;
        fail(source, "line " + std::to_string(where.line) + ", column " + std::to_string(where.column) + ": " +
                         std::string(e.description()));
    }
}

void reject_unknown(const toml::table& table, std::initializer_list<std::string_view> known,
                    std::string_view source, std::string_view section) {
    for (const auto& [key, value] : table) {
        if (std::find(known.begin(), known.end(), key.str()) == known.end()) {
            fail(source, "unknown key '" + std::string(key.str()) + "' in [" + std::string(section) + "]");
        }
    }
}

const toml::table* section(const toml::table& root, std::string_view name, std::string_view source) {
    const auto* node = root.get(name);
    if (!node) return nullptr;
    if (!node->is_table()) fail(source, "'" + std::string(name) + "' must be a table");
    return node->as_table();
}

std::optional<std::string> get_string(const toml::table& t, std::string_view key, std::string_view source) {
    const auto* node = t.get(key);
    if (!node) return std::nullopt;
    if (const auto* s = node->as_string()) return s->get();
    fail(source, "'" + std::string(key) + "' must be a string");
}

std::optional<double> get_number(const toml::table& t, std::string_view key, std::string_view source) {
    const auto* node = t.get(key);
    if (!node) return std::nullopt;
    if (const auto* f = node->as_floating_point()) return f->get();
    if (const auto* i = node->as_integer()) return static_cast<double>(i->get());
    fail(source, "'" + std::string(key) + "' must be a number");
}

std::optional<long long> get_integer(const toml::table& t, std::string_view key, std::string_view source) {
    const auto* node = t.get(key);
    if (!node) return std::nullopt;
    if (const auto* i = node->as_integer()) return i->get();
    fail(source, "'" + std::string(key) + "' must be an integer");
}

std::optional<std::vector<std::string>> get_strings(const toml::table& t, std::string_view key,
                                                    std::string_view source) {
    const auto* node = t.get(key);
    if (!node) return std::nullopt;
    const auto* arr = node->as_array();
    if (!arr) fail(source, "'" + std::string(key) + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& item : *arr) {
        const auto* s = item.as_string();
        if (!s) fail(source, "'" + std::string(key) + "' must be an array of strings");
        out.push_back(s->get());
    }
    return out;
}

long long positive(long long v, std::string_view key, std::string_view source) {
    if (v <= 0) fail(source, "'" + std::string(key) + "' must be positive");
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Workspace manifest
//
//   [task]       name
//   [files]      methodology, dataset, pseudocode, starter_code,
//                starter_performance, supplementary = [...]
//   [execution]  interpreter, perf_pattern, perf_direction, timeout_seconds

WorkspaceManifest WorkspaceManifest::load(const fs::path& manifest_file) {
    std::error_code ec;
    if (!fs::is_regular_file(manifest_file, ec)) {
        throw Error(ErrorKind::config, "workspace manifest not found: " + manifest_file.string());
    }
    const auto source = manifest_file.string();
    const auto root = parse_toml(text::read_file(manifest_file), source);
    reject_unknown(root, {"task", "files", "execution"}, source, "top level");

    WorkspaceManifest m;
    if (const auto* task = section(root, "task", source)) {
        reject_unknown(*task, {"name"}, source, "task");
        m.task = get_string(*task, "name", source).value_or("");
    }
    if (const auto* files = section(root, "files", source)) {
        reject_unknown(*files,
                       {"methodology", "dataset", "pseudocode", "starter_code", "starter_performance", "supplementary"},
                       source, "files");
        for (const auto role : kMandatoryRoles) {
            if (auto v = get_string(*files, to_string(role), source)) m.mandatory[role] = *v;
        }
        m.supplementary = get_strings(*files, "supplementary", source).value_or(std::vector<std::string>{});
    }
    if (const auto* exec = section(root, "execution", source)) {
        reject_unknown(*exec, {"interpreter", "perf_pattern", "perf_direction", "timeout_seconds"}, source,
                       "execution");
        if (auto v = get_string(*exec, "interpreter", source)) m.script_interpreter = *v;
        m.perf_pattern = get_string(*exec, "perf_pattern", source).value_or("");
        if (auto v = get_string(*exec, "perf_direction", source)) {
            try {
                m.perf_direction = parse_perf_direction(*v);
            } catch (const Error& e) {
                fail(source, e.what());
            }
        }
        m.timeout_seconds = get_number(*exec, "timeout_seconds", source);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Application config

void validate(const CascadeConfig& cascade) {
    if (cascade.levels.empty()) throw Error(ErrorKind::config, "cascade has no levels");
    for (const auto& level : cascade.levels) {
        if (level.budget <= 0) {
            throw Error(ErrorKind::config, "retry budget of " + std::string(to_string(level.role)) + " must be positive");
        }
    }
    if (cascade.expert_help_budget < 0) throw Error(ErrorKind::config, "expert_help_budget must not be negative");
    if (cascade.max_steps <= 0) throw Error(ErrorKind::config, "max_steps must be positive");
}

AppConfig AppConfig::defaults() {
    AppConfig config;
    for (const auto role : kAllRoles) config.roles[role] = default_role_config(role);
    config.workers.retry_budget = config.roles.at(RoleTag::worker).retry_budget;
    return config;
}

CascadeConfig AppConfig::cascade() const {
    CascadeConfig c;
    for (const auto role : {RoleTag::base_planner, RoleTag::intermediate_planner, RoleTag::expert_planner}) {
        c.levels.push_back({role, roles.at(role).retry_budget});
    }
    c.expert_help_budget = expert_help_budget;
    c.max_steps = max_steps;
    return c;
}

AppConfig AppConfig::load(const fs::path& path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) throw Error(ErrorKind::config, "config file not found: " + path.string());
    auto config = parse(text::read_file(path), path.string());
    // Response scripts are named relative to the config file.
    for (auto& [tag, role] : config.roles) {
        if (!role.script.empty() && fs::path(role.script).is_relative()) {
            role.script = (path.parent_path() / role.script).lexically_normal().string();
        }
    }
    return config;
}

AppConfig AppConfig::parse(std::string_view toml_text, std::string_view source) {
    const auto root = parse_toml(toml_text, source);
    reject_unknown(root, {"roles", "gateway", "constraints", "memory", "planner", "executor", "workers"}, source,
                   "top level");

    auto config = defaults();
    config.digest = text::sha256_hex(toml_text);

    if (const auto* roles = section(root, "roles", source)) {
        for (const auto& [key, node] : *roles) {
            RoleTag tag;
            try {
                tag = parse_role(key.str());
            } catch (const Error&) {
                fail(source, "unknown role '" + std::string(key.str()) + "' in [roles]");
            }
            const auto* t = node.as_table();
            if (!t) fail(source, "[roles." + std::string(key.str()) + "] must be a table");
            const auto name = "roles." + std::string(key.str());
            reject_unknown(*t, {"provider", "model", "endpoint", "credential_env", "script", "temperature", "retry_budget"},
                           source, name);
            auto& rc = config.roles[tag];
            if (auto v = get_string(*t, "provider", source)) rc.provider = *v;
            if (auto v = get_string(*t, "model", source)) rc.model = *v;
            if (auto v = get_string(*t, "endpoint", source)) rc.endpoint = *v;
            if (auto v = get_string(*t, "credential_env", source)) rc.credential_env = *v;
            if (auto v = get_string(*t, "script", source)) rc.script = *v;
            if (auto v = get_number(*t, "temperature", source)) rc.temperature = *v;
            if (auto v = get_integer(*t, "retry_budget", source)) {
                rc.retry_budget = static_cast<int>(positive(*v, "retry_budget", source));
            }
            static const std::set<std::string> providers = {"openai", "scripted", "sentinel", "none"};
            if (!providers.count(rc.provider)) fail(source, "unknown provider '" + rc.provider + "' in [" + name + "]");
        }
    }
    if (const auto* t = section(root, "gateway", source)) {
        reject_unknown(*t, {"transport_retries"}, source, "gateway");
        if (auto v = get_integer(*t, "transport_retries", source)) {
            if (*v < 0) fail(source, "'transport_retries' must not be negative");
            config.transport_retries = static_cast<int>(*v);
        }
    }
    if (const auto* t = section(root, "constraints", source)) {
        reject_unknown(*t, {"k0", "decay_rate", "floor"}, source, "constraints");
        if (auto v = get_integer(*t, "k0", source)) config.pool.initial_limit = static_cast<int>(*v);
        if (auto v = get_number(*t, "decay_rate", source)) config.pool.decay_rate = *v;
        if (auto v = get_integer(*t, "floor", source)) config.pool.floor = static_cast<int>(*v);
        try {
            validate(config.pool);
        } catch (const Error& e) {
            fail(source, e.what());
        }
    }
    if (const auto* t = section(root, "memory", source)) {
        reject_unknown(*t, {"window", "observation_threshold"}, source, "memory");
        if (auto v = get_integer(*t, "window", source)) config.memory.window = positive(*v, "window", source);
        if (auto v = get_integer(*t, "observation_threshold", source)) {
            config.memory.observation_threshold = positive(*v, "observation_threshold", source);
        }
    }
    if (const auto* t = section(root, "planner", source)) {
        reject_unknown(*t, {"max_steps", "expert_help_budget"}, source, "planner");
        if (auto v = get_integer(*t, "max_steps", source)) config.max_steps = static_cast<int>(positive(*v, "max_steps", source));
        if (auto v = get_integer(*t, "expert_help_budget", source)) {
            if (*v < 0) fail(source, "'expert_help_budget' must not be negative");
            config.expert_help_budget = static_cast<int>(*v);
        }
    }
    if (const auto* t = section(root, "executor", source)) {
        reject_unknown(*t, {"timeout_seconds", "backend", "trace_shim", "scrubbed_env"}, source, "executor");
        if (auto v = get_number(*t, "timeout_seconds", source)) {
            if (*v <= 0) fail(source, "'timeout_seconds' must be positive");
            config.executor.timeout_seconds = *v;
        }
        if (auto v = get_string(*t, "backend", source)) {
            try {
                config.executor.backend = parse_trace_backend(*v);
            } catch (const Error& e) {
                fail(source, e.what());
            }
        }
        if (auto v = get_string(*t, "trace_shim", source)) config.executor.trace_shim = *v;
        if (auto v = get_strings(*t, "scrubbed_env", source)) config.executor.scrubbed_env = *v;
    }
    if (const auto* t = section(root, "workers", source)) {
        reject_unknown(*t, {"chunk_chars"}, source, "workers");
        if (auto v = get_integer(*t, "chunk_chars", source)) config.workers.chunk_chars = positive(*v, "chunk_chars", source);
    }
    config.workers.retry_budget = config.roles.at(RoleTag::worker).retry_budget;
    config.workers.reflection_summary_chars = config.memory.observation_threshold;
    return config;
}

}  // namespace rca

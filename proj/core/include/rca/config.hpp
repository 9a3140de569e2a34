#pragma once

#include "rca/constraints.hpp"
#include "rca/executor.hpp"
#include "rca/gateway.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace rca {

struct MemoryConfig {
    std::size_t window = 3;
    std::size_t observation_threshold = 4000;
};

struct WorkerConfig {
    std::size_t chunk_chars = 12000;
    int retry_budget = 8;  // mirrors roles[worker].retry_budget
    std::size_t reflection_summary_chars = 4000;  // mirrors memory.observation_threshold
};

struct CascadeLevel {
    RoleTag role;
    int budget;
};

struct CascadeConfig {
    std::vector<CascadeLevel> levels;
    int expert_help_budget = 3;
    int max_steps = 50;
};

void validate(const CascadeConfig& cascade);

// Whole-application configuration. Every field has a default; a TOML file
// overrides any subset:
//
//   [roles.base_planner]   provider, model, endpoint, credential_env, script,
//                          temperature, retry_budget   (same for every role tag)
//   [gateway]              transport_retries
//   [constraints]          k0, decay_rate, floor
//   [memory]               window, observation_threshold
//   [planner]              max_steps, expert_help_budget
//   [executor]             timeout_seconds, backend, trace_shim, scrubbed_env
//   [workers]              chunk_chars
struct AppConfig {
    std::map<RoleTag, RoleConfig> roles;
    int transport_retries = 2;
    PoolPolicy pool;
    MemoryConfig memory;
    int max_steps = 50;
    int expert_help_budget = 3;
    ExecutorOptions executor;
    WorkerConfig workers;
    std::string digest = "defaults";  // sha256 of the file the config came from

    static AppConfig defaults();
    static AppConfig load(const fs::path& path);
    static AppConfig parse(std::string_view toml_text, std::string_view source_name = "config");

    // Cascade levels base -> intermediate -> expert with each role's budget.
    CascadeConfig cascade() const;
};

}  // namespace rca

#pragma once

#include "rca/error.hpp"

#include <array>
#include <atomic>
#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace rca {

namespace fs = std::filesystem;

enum class RoleTag { base_planner, intermediate_planner, expert_planner, worker };
inline constexpr std::array kAllRoles = {RoleTag::base_planner, RoleTag::intermediate_planner,
                                         RoleTag::expert_planner, RoleTag::worker};

std::string_view to_string(RoleTag role);
RoleTag parse_role(std::string_view text);

// Binding of a role tag to a concrete provider. Core code only ever names the
// tag; everything provider-specific lives here and comes from configuration.
struct RoleConfig {
    std::string provider = "none";  // openai | scripted | sentinel | none
    std::string model;
    std::string endpoint;
    std::string credential_env;
    std::string script;  // response script for the scripted provider
    double temperature = 0.2;
    int retry_budget = 8;  // validity retries granted to this role by its caller
};

// Planner roles run at 0.8, the worker at 0.2; budgets 8/4/1 for the planner
// cascade and 8 for workers.
RoleConfig default_role_config(RoleTag role);

struct ModelRequest {
    RoleTag role;
    std::string purpose;  // e.g. "planner", "edit_script"; diagnostic only
    std::string prompt;
    double temperature = 0.0;
};

class ProviderError : public Error {
public:
    ProviderError(std::string message, bool transient)
        : Error(ErrorKind::provider, std::move(message)), transient_(transient) {}
    bool transient() const noexcept { return transient_; }

private:
    bool transient_;
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string complete(const ModelRequest& request, const RoleConfig& role) = 0;
};

// Fails every call; bound to all roles during replay to prove no live traffic.
class SentinelProvider : public Provider {
public:
    std::string complete(const ModelRequest& request, const RoleConfig& role) override;
    std::size_t calls() const { return calls_.load(); }

private:
    std::atomic<std::size_t> calls_{0};
};

// Serves canned responses from per-key queues. A request is served from the
// first non-empty queue among "<role>/<purpose>", "<purpose>", "<role>", then
// from the defaults under the same keys.
class ScriptedProvider : public Provider {
public:
    ScriptedProvider() = default;
    ScriptedProvider(std::map<std::string, std::deque<std::string>> queues,
                     std::map<std::string, std::string> defaults = {});
    static std::shared_ptr<ScriptedProvider> from_file(const fs::path& script);

    void push(const std::string& key, std::string response);
    std::string complete(const ModelRequest& request, const RoleConfig& role) override;

private:
    std::mutex mutex_;
    std::map<std::string, std::deque<std::string>> queues_;
    std::map<std::string, std::string> defaults_;
};

// OpenAI-compatible chat-completions endpoint over HTTP(S).
std::shared_ptr<Provider> make_http_provider();

// Builds one provider per distinct binding in `roles`.
std::map<RoleTag, std::shared_ptr<Provider>> make_providers(const std::map<RoleTag, RoleConfig>& roles);

struct CassetteEntry {
    std::size_t sequence = 0;
    RoleTag role = RoleTag::worker;
    std::string purpose;
    std::string prompt_digest;
    std::string prompt;
    std::string response;
    double temperature = 0.0;

    bool operator==(const CassetteEntry&) const = default;
};

std::string prompt_digest(std::string_view prompt);

std::string to_cassette_line(const CassetteEntry& entry);
CassetteEntry parse_cassette_line(std::string_view line, std::size_t line_number);
std::vector<CassetteEntry> load_cassette(const fs::path& path);
void save_cassette(const fs::path& path, const std::vector<CassetteEntry>& entries);

enum class GatewayMode { live, record, replay };
std::string_view to_string(GatewayMode mode);

struct GatewayOptions {
    GatewayMode mode = GatewayMode::live;
    std::map<RoleTag, RoleConfig> roles;
    int transport_retries = 2;
    fs::path cassette_path;    // record: appended to as calls complete
    fs::path transcript_path;  // every mode: each call appended in cassette format
    std::function<void(std::chrono::milliseconds)> sleep;  // backoff hook
};

class Gateway {
public:
    // `providers` serve live and record modes; replay only consults `cassette`.
    Gateway(GatewayOptions options, std::map<RoleTag, std::shared_ptr<Provider>> providers,
            std::vector<CassetteEntry> cassette = {});

    std::string complete(RoleTag role, std::string_view purpose, const std::string& prompt);

    const RoleConfig& role(RoleTag tag) const;
    GatewayMode mode() const { return options_.mode; }
    bool allows_concurrency() const { return options_.mode != GatewayMode::replay; }

    std::size_t calls(RoleTag role) const;
    std::size_t total_calls() const;
    std::vector<CassetteEntry> transcript() const;
    std::size_t replay_remaining() const;

    static std::chrono::milliseconds backoff_delay(int attempt);

private:
    std::string call_live(const ModelRequest& request);
    std::string call_replay(const ModelRequest& request);
    void record(const ModelRequest& request, const std::string& response);

    GatewayOptions options_;
    std::map<RoleTag, std::shared_ptr<Provider>> providers_;
    std::vector<CassetteEntry> cassette_;
    std::size_t replay_cursor_ = 0;
    std::mutex replay_mutex_;

    mutable std::mutex record_mutex_;
    std::vector<CassetteEntry> transcript_;
    std::ofstream cassette_out_;
    std::ofstream transcript_out_;
    std::array<std::atomic<std::size_t>, 4> calls_{};
};

}  // namespace rca

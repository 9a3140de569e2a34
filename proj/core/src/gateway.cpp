#include "rca/gateway.hpp"

#include "rca/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <thread>

namespace rca {

using nlohmann::json;

std::string_view to_string(RoleTag role) {
    switch (role) {
        case RoleTag::base_planner: return "base_planner";
        case RoleTag::intermediate_planner: return "intermediate_planner";
        case RoleTag::expert_planner: return "expert_planner";
        case RoleTag::worker: return "worker";
    }
    return "unknown";
}

RoleTag parse_role(std::string_view text) {
    for (auto role : kAllRoles) {
        if (to_string(role) == text) return role;
    }
    throw Error(ErrorKind::config, "unknown role tag '" + std::string(text) + "'");
}

RoleConfig default_role_config(RoleTag role) {
    RoleConfig cfg;
    switch (role) {
        case RoleTag::base_planner:
            cfg.temperature = 0.8;
            cfg.retry_budget = 8;
            break;
        case RoleTag::intermediate_planner:
            cfg.temperature = 0.8;
            cfg.retry_budget = 4;
            break;
        case RoleTag::expert_planner:
            cfg.temperature = 0.8;
            cfg.retry_budget = 1;
            break;
        case RoleTag::worker:
            cfg.temperature = 0.2;
            cfg.retry_budget = 8;
            break;
    }
    return cfg;
}

std::string_view to_string(GatewayMode mode) {
    switch (mode) {
        case GatewayMode::live: return "live";
        case GatewayMode::record: return "record";
        case GatewayMode::replay: return "replay";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Providers

std::string SentinelProvider::complete(const ModelRequest& request, const RoleConfig&) {
    ++calls_;
    throw ProviderError("sentinel provider called for role " + std::string(to_string(request.role)) +
                            " (no live model access is permitted here)",
                        false);
}

ScriptedProvider::ScriptedProvider(std::map<std::string, std::deque<std::string>> queues,
                                   std::map<std::string, std::string> defaults)
    : queues_(std::move(queues)), defaults_(std::move(defaults)) {}

std::shared_ptr<ScriptedProvider> ScriptedProvider::from_file(const fs::path& script) {
    const auto doc = json::parse(text::read_file(script), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw Error(ErrorKind::config, "response script is not a JSON object: " + script.string());
    }
    std::map<std::string, std::deque<std::string>> queues;
    std::map<std::string, std::string> defaults;
    if (doc.contains("queues")) {
        for (const auto& [key, list] : doc["queues"].items()) {
            auto& q = queues[key];
            for (const auto& item : list) q.push_back(item.get<std::string>());
        }
    }
    if (doc.contains("defaults")) {
        for (const auto& [key, value] : doc["defaults"].items()) defaults[key] = value.get<std::string>();
    }
    return std::make_shared<ScriptedProvider>(std::move(queues), std::move(defaults));
}

void ScriptedProvider::push(const std::string& key, std::string response) {
    std::lock_guard lock(mutex_);
    queues_[key].push_back(std::move(response));
}

std::string ScriptedProvider::complete(const ModelRequest& request, const RoleConfig&) {
    std::lock_guard lock(mutex_);
    const std::string role(to_string(request.role));
    const std::string keys[] = {role + "/" + request.purpose, request.purpose, role};
    for (const auto& key : keys) {
        auto it = queues_.find(key);
        if (it != queues_.end() && !it->second.empty()) {
            auto response = std::move(it->second.front());
            it->second.pop_front();
            return response;
        }
    }
    for (const auto& key : keys) {
        if (auto it = defaults_.find(key); it != defaults_.end()) return it->second;
    }
    throw ProviderError("scripted provider has no response left for " + role + "/" + request.purpose, false);
}

std::map<RoleTag, std::shared_ptr<Provider>> make_providers(const std::map<RoleTag, RoleConfig>& roles) {
    std::map<RoleTag, std::shared_ptr<Provider>> out;
    std::map<std::string, std::shared_ptr<Provider>> by_binding;
    for (const auto& [tag, cfg] : roles) {
        const std::string binding = cfg.provider + "|" + cfg.script;
        auto& provider = by_binding[binding];
        if (!provider) {
            if (cfg.provider == "openai") {
                provider = make_http_provider();
            } else if (cfg.provider == "scripted") {
                if (cfg.script.empty()) {
                    throw Error(ErrorKind::config, "role " + std::string(to_string(tag)) +
                                                       ": scripted provider needs 'script'");
                }
                provider = ScriptedProvider::from_file(cfg.script);
            } else if (cfg.provider == "sentinel" || cfg.provider == "none") {
                provider = std::make_shared<SentinelProvider>();
            } else {
                throw Error(ErrorKind::config, "role " + std::string(to_string(tag)) +
                                                   ": unknown provider '" + cfg.provider + "'");
            }
        }
        out[tag] = provider;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cassettes

std::string prompt_digest(std::string_view prompt) { return text::sha256_hex(prompt); }

std::string to_cassette_line(const CassetteEntry& entry) {
    nlohmann::ordered_json j;
    j["seq"] = entry.sequence;
    j["role"] = std::string(to_string(entry.role));
    j["purpose"] = entry.purpose;
    j["temperature"] = entry.temperature;
    j["digest"] = entry.prompt_digest;
    j["prompt"] = entry.prompt;
    j["response"] = entry.response;
    return j.dump();
}

CassetteEntry parse_cassette_line(std::string_view line, std::size_t line_number) {
    const auto where = "cassette line " + std::to_string(line_number) + ": ";
    const auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorKind::parse, where + "not a JSON object");
    try {
        CassetteEntry e;
        e.sequence = j.at("seq").get<std::size_t>();
        e.role = parse_role(j.at("role").get<std::string>());
        e.purpose = j.value("purpose", "");
        e.temperature = j.at("temperature").get<double>();
        e.prompt_digest = j.at("digest").get<std::string>();
        e.prompt = j.at("prompt").get<std::string>();
        e.response = j.at("response").get<std::string>();
        return e;
    } catch (const json::exception& ex) {
        throw Error(ErrorKind::parse, where + ex.what());
    } catch (const Error& ex) {
        throw Error(ErrorKind::parse, where + ex.what());
    }
}

std::vector<CassetteEntry> load_cassette(const fs::path& path) {
    const auto content = text::read_file(path);
    std::vector<CassetteEntry> entries;
    std::size_t line_number = 0;
    for (const auto& line : text::split_lines(content)) {
        ++line_number;
        if (text::trim(line).empty()) continue;
        auto entry = parse_cassette_line(line, line_number);
        if (!entries.empty() && entry.sequence <= entries.back().sequence) {
            throw Error(ErrorKind::parse, "cassette line " + std::to_string(line_number) +
                                              ": sequence numbers must strictly increase");
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

void save_cassette(const fs::path& path, const std::vector<CassetteEntry>& entries) {
    std::string out;
    for (const auto& e : entries) {
        out += to_cassette_line(e);
        out += '\n';
    }
    text::write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// Gateway

Gateway::Gateway(GatewayOptions options, std::map<RoleTag, std::shared_ptr<Provider>> providers,
                 std::vector<CassetteEntry> cassette)
    : options_(std::move(options)), providers_(std::move(providers)), cassette_(std::move(cassette)) {
    for (auto role : kAllRoles) {
        if (!options_.roles.count(role)) options_.roles[role] = default_role_config(role);
    }
    if (!options_.sleep) {
        options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
    if (options_.mode == GatewayMode::record) {
        if (options_.cassette_path.empty()) {
            throw Error(ErrorKind::usage, "record mode needs a cassette path");
        }
        cassette_out_.open(options_.cassette_path, std::ios::binary | std::ios::trunc);
        if (!cassette_out_) throw Error(ErrorKind::io, "cannot open cassette " + options_.cassette_path.string());
    }
    if (!options_.transcript_path.empty()) {
        transcript_out_.open(options_.transcript_path, std::ios::binary | std::ios::trunc);
        if (!transcript_out_) {
            throw Error(ErrorKind::io, "cannot open transcript " + options_.transcript_path.string());
        }
    }
}

const RoleConfig& Gateway::role(RoleTag tag) const { return options_.roles.at(tag); }

std::size_t Gateway::calls(RoleTag role) const { return calls_[static_cast<std::size_t>(role)].load(); }

std::size_t Gateway::total_calls() const {
    std::size_t n = 0;
    for (const auto& c : calls_) n += c.load();
    return n;
}

std::vector<CassetteEntry> Gateway::transcript() const {
    std::lock_guard lock(record_mutex_);
    return transcript_;
}

std::size_t Gateway::replay_remaining() const { return cassette_.size() - replay_cursor_; }

std::chrono::milliseconds Gateway::backoff_delay(int attempt) {
    const long long ms = 1000LL << std::min(attempt, 5);
    return std::chrono::milliseconds(std::min(ms, 30'000LL));
}

std::string Gateway::complete(RoleTag role, std::string_view purpose, const std::string& prompt) {
    ModelRequest request{role, std::string(purpose), prompt, this->role(role).temperature};
    std::string response = options_.mode == GatewayMode::replay ? call_replay(request) : call_live(request);
    ++calls_[static_cast<std::size_t>(role)];
    record(request, response);
    return response;
}

std::string Gateway::call_live(const ModelRequest& request) {
    auto it = providers_.find(request.role);
    if (it == providers_.end() || !it->second) {
        throw Error(ErrorKind::config, "no provider bound to role " + std::string(to_string(request.role)));
    }
    const auto& cfg = role(request.role);
    for (int attempt = 0;; ++attempt) {
        try {
            return it->second->complete(request, cfg);
        } catch (const ProviderError& e) {
            if (!e.transient()) throw;
            if (attempt >= options_.transport_retries) {
                throw Error(ErrorKind::budget_exhausted,
                            "transport retries exhausted for role " + std::string(to_string(request.role)) +
                                ": " + e.what());
            }
            options_.sleep(backoff_delay(attempt));
        }
    }
}

std::string Gateway::call_replay(const ModelRequest& request) {
    std::unique_lock lock(replay_mutex_, std::try_to_lock);
    if (!lock.owns_lock()) {
        throw Error(ErrorKind::usage, "concurrent calls are not allowed in replay mode");
    }
    if (replay_cursor_ >= cassette_.size()) {
        throw Error(ErrorKind::cassette_exhausted,
                    "cassette exhausted after " + std::to_string(cassette_.size()) + " entries (next call: " +
                        std::string(to_string(request.role)) + "/" + request.purpose + ")");
    }
    const auto& entry = cassette_[replay_cursor_];
    if (entry.role != request.role) {
        throw Error(ErrorKind::role_mismatch,
                    "cassette entry " + std::to_string(entry.sequence) + " was recorded for role " +
                        std::string(to_string(entry.role)) + " but the call is for role " +
                        std::string(to_string(request.role)));
    }
    if (prompt_digest(request.prompt) != entry.prompt_digest) {
        std::size_t offset = 0;
        while (offset < entry.prompt.size() && offset < request.prompt.size() &&
               entry.prompt[offset] == request.prompt[offset]) {
            ++offset;
        }
        throw Error(ErrorKind::digest_mismatch,
                    "prompt digest mismatch at cassette entry " + std::to_string(entry.sequence) + " (" +
                        std::string(to_string(entry.role)) + "/" + entry.purpose +
                        "); prompts first differ at byte " + std::to_string(offset));
    }
    ++replay_cursor_;
    return entry.response;
}

void Gateway::record(const ModelRequest& request, const std::string& response) {
    std::lock_guard lock(record_mutex_);
    CassetteEntry entry;
    entry.sequence = transcript_.size();
    entry.role = request.role;
    entry.purpose = request.purpose;
    entry.temperature = request.temperature;
    entry.prompt_digest = prompt_digest(request.prompt);
    entry.prompt = request.prompt;
    entry.response = response;
    const auto line = to_cassette_line(entry) + "\n";
    if (cassette_out_.is_open()) cassette_out_ << line << std::flush;
    if (transcript_out_.is_open()) transcript_out_ << line << std::flush;
    transcript_.push_back(std::move(entry));
}

}  // namespace rca

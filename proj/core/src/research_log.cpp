#include "rca/research_log.hpp"

#include "rca/error.hpp"
#include "rca/templates.hpp"
#include "rca/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace rca {

using ojson = nlohmann::ordered_json;

namespace {

constexpr std::size_t kSummaryFieldChars = 300;

std::string clip(std::string_view s, std::size_t limit) {
    auto flat = text::normalize_whitespace(s);
    if (flat.size() <= limit) return flat;
    return flat.substr(0, limit - 3) + "...";
}

bool model_unavailable(const Error& e) {
    return e.kind() == ErrorKind::provider || e.kind() == ErrorKind::budget_exhausted;
}

// A backtick fence longer than any run of backticks inside `content`.
std::string fence_for(std::string_view content) {
    std::size_t longest = 0, run = 0;
    for (char c : content) {
        run = c == '`' ? run + 1 : 0;
        longest = std::max(longest, run);
    }
    return std::string(std::max<std::size_t>(3, longest + 1), '`');
}

}  // namespace

std::string make_step_summary(std::size_t index, const PlannerResponse& response,
                              const ActionInvocation& invocation, std::string_view observation_shown) {
    std::string out = "Step " + std::to_string(index) + ": ";
    if (!text::trim(response.thought).empty()) out += clip(response.thought, kSummaryFieldChars) + " ";
    out += "Action: " + invocation.name() + " " + render_invocation(invocation) + ". ";
    out += "Observation: " + clip(observation_shown, kSummaryFieldChars);
    return out;
}

ResearchLog::ResearchLog(fs::path run_dir, MemoryConfig config, Gateway* summarizer)
    : run_dir_(std::move(run_dir)), config_(config), summarizer_(summarizer) {
    if (config_.window == 0) throw Error(ErrorKind::config, "memory window must be positive");
    if (!run_dir_.empty()) fs::create_directories(run_dir_ / "steps");
}

ResearchLog ResearchLog::load(const fs::path& run_dir, MemoryConfig config, Gateway* summarizer) {
    ResearchLog log(run_dir, config, summarizer);
    for (std::size_t i = 0;; ++i) {
        const auto path = run_dir / "steps" / (std::to_string(i) + ".json");
        std::error_code ec;
        if (!fs::is_regular_file(path, ec)) break;
        std::string summary;
        auto record = step_from_json(text::read_file(path), &summary);
        if (record.index != i) {
            throw Error(ErrorKind::parse, path.string() + ": index " + std::to_string(record.index) +
                                              " does not match file position " + std::to_string(i));
        }
        log.records_.push_back(std::move(record));
        log.long_term_summary_ = std::move(summary);
    }
    return log;
}

std::string ResearchLog::summarize_observation(std::string_view action, std::string_view observation) {
    if (observation.size() <= config_.observation_threshold) return std::string(observation);
    if (summarizer_) {
        try {
            const auto prompt = templates::fill("summarize_observation",
                                                {{"action", std::string(action)}, {"observation", std::string(observation)}});
            auto reply = text::trim(summarizer_->complete(RoleTag::worker, "summarize_observation", prompt));
            if (!reply.empty()) return std::string(kLongObservationPrefix) + "\n" + reply;
        } catch (const Error& e) {
            if (!model_unavailable(e)) throw;
        }
    }
    return text::elide_middle(observation, kFallbackHead, kFallbackTail);
}

std::string ResearchLog::extend_summary(const std::string& step_summary) {
    const auto concatenated = long_term_summary_.empty() ? step_summary : long_term_summary_ + "\n" + step_summary;
    if (!summarizer_) return concatenated;
    try {
        const auto prompt = templates::fill(
            "summarize_log", {{"previous_summary", long_term_summary_.empty() ? "(none yet)" : long_term_summary_},
                              {"step_summary", step_summary}});
        auto reply = text::trim(summarizer_->complete(RoleTag::worker, "summarize_log", prompt));
        if (!reply.empty()) return reply;
    } catch (const Error& e) {
        if (!model_unavailable(e)) throw;
    }
    return concatenated;
}

void ResearchLog::append(StepRecord record) {
    if (record.index != records_.size()) {
        throw Error(ErrorKind::validation, "step index " + std::to_string(record.index) + " would leave a gap; expected " +
                                               std::to_string(records_.size()));
    }
    if (!record.invocation.spec) throw Error(ErrorKind::validation, "step record has no invocation");
    if (record.step_summary.empty()) {
        record.step_summary = make_step_summary(record.index, record.response, record.invocation, record.observation_shown);
    }
    auto summary = extend_summary(record.step_summary);
    if (!run_dir_.empty()) {
        text::write_file_atomic(run_dir_ / "steps" / (std::to_string(record.index) + ".json"),
                                step_to_json(record, summary));
    }
    long_term_summary_ = std::move(summary);
    records_.push_back(std::move(record));
}

std::span<const StepRecord> ResearchLog::short_term() const {
    const auto n = std::min(config_.window, records_.size());
    return std::span<const StepRecord>(records_).subspan(records_.size() - n);
}

std::vector<ActionInvocation> ResearchLog::accepted_actions() const {
    std::vector<ActionInvocation> out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(r.invocation);
    return out;
}

std::string ResearchLog::render() const {
    std::string out = "# Research log\n";
    for (const auto& r : records_) {
        out += "\n## Step " + std::to_string(r.index) + ": " + r.invocation.name() + "\n\n";
        out += "Summary: " + r.step_summary + "\n\n";
        out += "Action: " + r.invocation.name() + "\n";
        out += "Action Input: " + render_invocation(r.invocation) + "\n\n";
        out += "Observation:\n";
        const auto fence = fence_for(r.observation_shown);
        out += fence + "\n" + r.observation_shown;
        if (r.observation_shown.empty() || r.observation_shown.back() != '\n') out += "\n";
        out += fence + "\n";
    }
    if (!records_.empty()) out += "\n## Long-term summary\n\n" + long_term_summary_ + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Persistence

std::string step_to_json(const StepRecord& r, const std::string& long_term_summary) {
    ojson j;
    j["index"] = r.index;
    j["action"] = r.invocation.name();
    j["action_input"] = r.invocation.raw_text;
    j["raw_response"] = r.raw_response;
    j["response"] = {{"reflection", r.response.reflection},
                     {"research_plan_and_status", r.response.research_plan_and_status},
                     {"fact_check", r.response.fact_check},
                     {"thought", r.response.thought},
                     {"action", r.response.action},
                     {"action_input", r.response.action_input}};
    j["observation"] = r.observation;
    j["observation_shown"] = r.observation_shown;
    j["step_summary"] = r.step_summary;
    j["cascade_level_used"] = std::string(to_string(r.cascade_level_used));
    j["attempts_per_level"] = ojson::object();
    for (const auto& [role, n] : r.attempts_per_level) j["attempts_per_level"][std::string(to_string(role))] = n;
    j["rejections"] = ojson::array();
    for (const auto& rej : r.rejections) {
        j["rejections"].push_back({{"level", std::string(to_string(rej.level))},
                                   {"attempt", rej.attempt},
                                   {"kind", rej.kind},
                                   {"message", rej.message}});
    }
    j["long_term_summary"] = long_term_summary;
    return j.dump(2) + "\n";
}

StepRecord step_from_json(std::string_view json, std::string* long_term_summary) {
    try {
        const auto j = ojson::parse(json);
        StepRecord r;
        r.index = j.at("index").get<std::size_t>();
        const auto& spec = ActionRegistry::instance().lookup(j.at("action").get<std::string>());
        r.invocation = parse_invocation(spec, j.at("action_input").get<std::string>());
        r.raw_response = j.at("raw_response").get<std::string>();
        const auto& resp = j.at("response");
        r.response.reflection = resp.at("reflection").get<std::string>();
        r.response.research_plan_and_status = resp.at("research_plan_and_status").get<std::string>();
        r.response.fact_check = resp.at("fact_check").get<std::string>();
        r.response.thought = resp.at("thought").get<std::string>();
        r.response.action = resp.at("action").get<std::string>();
        r.response.action_input = resp.at("action_input").get<std::string>();
        r.observation = j.at("observation").get<std::string>();
        r.observation_shown = j.at("observation_shown").get<std::string>();
        r.step_summary = j.at("step_summary").get<std::string>();
        r.cascade_level_used = parse_role(j.at("cascade_level_used").get<std::string>());
        for (const auto& [role, n] : j.at("attempts_per_level").items()) r.attempts_per_level[parse_role(role)] = n.get<int>();
        for (const auto& rej : j.at("rejections")) {
            r.rejections.push_back({parse_role(rej.at("level").get<std::string>()), rej.at("attempt").get<int>(),
                                    rej.at("kind").get<std::string>(), rej.at("message").get<std::string>()});
        }
        if (long_term_summary) *long_term_summary = j.at("long_term_summary").get<std::string>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, std::string("step record: ") + e.what());
    }
}

}  // namespace rca

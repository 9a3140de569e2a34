#include "rca/constraints.hpp"

#include "rca/error.hpp"
#include "rca/text.hpp"

#include <algorithm>
#include <cmath>

namespace rca {

void validate(const PoolPolicy& policy) {
    if (policy.floor < 1 || policy.initial_limit < policy.floor || policy.decay_rate < 0.0) {
        throw Error(ErrorKind::config, "pool policy requires initial_limit >= floor >= 1 and decay_rate >= 0");
    }
}

std::string_view to_string(Violation violation) {
    switch (violation) {
        case Violation::pool_streak: return "pool_streak";
        case Violation::duplicate_action: return "duplicate_action";
        case Violation::recursive_response: return "recursive_response";
        case Violation::zero_diff: return "zero_diff";
    }
    return "unknown";
}

int max_consecutive(const PoolPolicy& policy, long step) {
    const double decayed = policy.initial_limit * std::exp(-policy.decay_rate * static_cast<double>(step));
    return std::max(policy.floor, static_cast<int>(std::floor(decayed)));
}

std::size_t trailing_streak(std::span<const ActionInvocation> history, Pool pool) {
    std::size_t n = 0;
    for (auto it = history.rbegin(); it != history.rend() && pool_of(*it) == pool; ++it) ++n;
    return n;
}

ConstraintVerdict check_pool_streak(const PoolPolicy& policy,
                                    std::span<const ActionInvocation> history,
                                    const ActionInvocation& candidate, long step) {
    const Pool pool = pool_of(candidate);
    if (pool == Pool::C) return ConstraintVerdict::allow();
    const auto limit = static_cast<std::size_t>(max_consecutive(policy, step));
    const auto streak = trailing_streak(history, pool);
    if (streak >= limit) {
        return ConstraintVerdict::reject(
            Violation::pool_streak,
            "Action '" + candidate.name() + "' belongs to pool " + std::string(to_string(pool)) +
                ", which has already been used " + std::to_string(streak) +
                " times in a row (limit " + std::to_string(limit) +
                " at this step). Choose an action from a different pool.");
    }
    return ConstraintVerdict::allow();
}

ConstraintVerdict check_duplicate(std::span<const ActionInvocation> history,
                                  const ActionInvocation& candidate) {
    if (!history.empty() && history.back().same_request(candidate)) {
        return ConstraintVerdict::reject(
            Violation::duplicate_action,
            "Action '" + candidate.name() +
                "' with identical inputs was the previous action. Do not repeat the same action; "
                "choose a different action or different inputs.");
    }
    return ConstraintVerdict::allow();
}

std::size_t count_action_headings(std::string_view response) {
    std::size_t n = 0;
    for (const auto& line : text::split_lines(response)) {
        if (text::starts_with(text::trim(line), "Action:")) ++n;
    }
    return n;
}

ConstraintVerdict check_recursive(std::string_view previous_response,
                                  std::string_view candidate_response) {
    const auto candidate = text::normalize_whitespace(candidate_response);
    if (!previous_response.empty() && candidate == text::normalize_whitespace(previous_response)) {
        return ConstraintVerdict::reject(
            Violation::recursive_response,
            "The response repeats the previous response verbatim. Produce a new response that "
            "reflects the latest observation.");
    }
    if (count_action_headings(candidate_response) > 1) {
        return ConstraintVerdict::reject(
            Violation::recursive_response,
            "The response contains more than one \"Action:\" heading. Give exactly one response "
            "with a single Action and Action Input.");
    }
    return ConstraintVerdict::allow();
}

ConstraintVerdict check_zero_diff(const DiffStats& stats) {
    if (stats.empty()) {
        return ConstraintVerdict::reject(
            Violation::zero_diff,
            "The edit produced no changes (zero-diff); it was rolled back. Give more specific "
            "edit instructions that change the script.");
    }
    return ConstraintVerdict::allow();
}

}  // namespace rca

#pragma once

#include "rca/actions.hpp"
#include "rca/diff.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace rca {

// Decaying cap on consecutive same-pool actions for pools A and B.
struct PoolPolicy {
    int initial_limit = 15;
    double decay_rate = 0.01;
    int floor = 1;
};

void validate(const PoolPolicy& policy);

enum class Violation { pool_streak, duplicate_action, recursive_response, zero_diff };
std::string_view to_string(Violation violation);

struct ConstraintVerdict {
    bool allowed = true;
    std::optional<Violation> violation;
    std::string message;

    static ConstraintVerdict allow() { return {}; }
    static ConstraintVerdict reject(Violation v, std::string message) {
        return {false, v, std::move(message)};
    }
};

// max(floor, floor(k0 * exp(-decay * step))), step being the 0-based planner step.
int max_consecutive(const PoolPolicy& policy, long step);

// Length of the run of actions at the end of `history` sharing `pool`.
std::size_t trailing_streak(std::span<const ActionInvocation> history, Pool pool);

ConstraintVerdict check_pool_streak(const PoolPolicy& policy,
                                    std::span<const ActionInvocation> history,
                                    const ActionInvocation& candidate, long step);

ConstraintVerdict check_duplicate(std::span<const ActionInvocation> history,
                                  const ActionInvocation& candidate);

// Rejects a response that repeats the previous accepted one (modulo
// whitespace) or nests more than one "Action:" heading.
ConstraintVerdict check_recursive(std::string_view previous_response,
                                  std::string_view candidate_response);

ConstraintVerdict check_zero_diff(const DiffStats& stats);

// Number of lines whose trimmed form starts with "Action:".
std::size_t count_action_headings(std::string_view response);

}  // namespace rca

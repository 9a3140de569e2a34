#pragma once

#include <array>
#include <string>
#include <string_view>

namespace rca {

// One planning step's structured output.
struct PlannerResponse {
    std::string reflection;
    std::string research_plan_and_status;
    std::string fact_check;
    std::string thought;
    std::string action;
    std::string action_input;

    bool operator==(const PlannerResponse&) const = default;
};

inline constexpr std::array<std::string_view, 6> kResponseHeadings = {
    "Reflection:", "Research Plan and Status:", "Fact Check:", "Thought:", "Action:", "Action Input:",
};

// Splits `text` on the six headings, which must each appear once and in order
// at the start of a line. Everything after "Action Input:" belongs to it.
// Throws Error(parse) naming the offending section.
PlannerResponse parse_planner_response(std::string_view text);

std::string render_planner_response(const PlannerResponse& response);

}  // namespace rca

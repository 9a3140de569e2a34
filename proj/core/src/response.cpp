#include "rca/response.hpp"

#include "rca/error.hpp"
#include "rca/text.hpp"

#include <optional>
#include <vector>

namespace rca {

namespace {

std::string_view heading_name(std::size_t i) {
    auto h = kResponseHeadings[i];
    h.remove_suffix(1);
    return h;
}

// Index of the heading this line opens, with `rest` set to the text that
// follows it. Leading markdown emphasis and header marks are tolerated.
std::optional<std::size_t> match_heading(std::string_view line, std::string_view& rest) {
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '*' || line[i] == '#')) ++i;
    line.remove_prefix(i);
    // Longest headings first so "Action Input:" is not read as "Action:".
    static constexpr std::size_t order[] = {1, 5, 0, 2, 3, 4};
    for (auto h : order) {
        const auto heading = kResponseHeadings[h];
        if (text::starts_with(line, heading)) {
            rest = line.substr(heading.size());
            while (!rest.empty() && rest.front() == '*') rest.remove_prefix(1);
            return h;
        }
        // "**Reflection**:" style
        const auto bare = heading.substr(0, heading.size() - 1);
        if (text::starts_with(line, bare) && text::starts_with(line.substr(bare.size()), "**:")) {
            rest = line.substr(bare.size() + 3);
            return h;
        }
    }
    return std::nullopt;
}

}  // namespace

PlannerResponse parse_planner_response(std::string_view input) {
    struct Found {
        std::size_t heading;
        std::string body;
    };
    std::vector<Found> found;
    for (auto raw : text::split_lines_keep(input)) {
        std::string_view line = raw;
        std::string_view rest;
        if (auto h = match_heading(line, rest)) {
            for (const auto& f : found) {
                if (f.heading == *h) {
                    throw Error(ErrorKind::parse, "duplicate heading '" + std::string(kResponseHeadings[*h]) +
                                                      "'; give each section exactly once");
                }
            }
            if (!found.empty() && found.back().heading > *h) {
                throw Error(ErrorKind::parse, "heading '" + std::string(kResponseHeadings[*h]) + "' is out of order; '" +
                                                  std::string(kResponseHeadings[found.back().heading]) +
                                                  "' must come after it");
            }
            found.push_back({*h, std::string(rest)});
        } else if (!found.empty()) {
            found.back().body += line;
        }
    }
    std::array<std::optional<std::string>, 6> sections;
    for (auto& f : found) sections[f.heading] = text::trim(f.body);
    for (std::size_t i = 0; i < sections.size(); ++i) {
        if (!sections[i]) {
            throw Error(ErrorKind::parse, "missing section '" + std::string(heading_name(i)) +
                                              "'; the response must contain all six headings");
        }
    }
    PlannerResponse r{*sections[0], *sections[1], *sections[2], *sections[3], *sections[4], *sections[5]};
    if (r.action.empty()) throw Error(ErrorKind::parse, "section 'Action' is empty");
    return r;
}

std::string render_planner_response(const PlannerResponse& r) {
    const std::string* bodies[] = {&r.reflection, &r.research_plan_and_status, &r.fact_check,
                                   &r.thought,    &r.action,                   &r.action_input};
    std::string out;
    for (std::size_t i = 0; i < kResponseHeadings.size(); ++i) {
        out += kResponseHeadings[i];
        out += ' ';
        out += *bodies[i];
        out += '\n';
    }
    return out;
}

}  // namespace rca

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace rca {

struct DiffStats {
    std::size_t additions = 0;
    std::size_t deletions = 0;

    bool empty() const { return additions == 0 && deletions == 0; }
    std::size_t total() const { return additions + deletions; }
    bool operator==(const DiffStats&) const = default;
};

enum class DiffOp { keep, remove, insert };

// Minimal line-level edit script (Myers). Lines compare including their
// terminator, so a missing final newline counts as a change.
std::vector<DiffOp> diff_lines(const std::vector<std::string_view>& a,
                               const std::vector<std::string_view>& b);

DiffStats diff_stats(std::string_view a, std::string_view b);

struct UnifiedDiff {
    std::string text;  // empty when the inputs are identical
    DiffStats stats;
};

UnifiedDiff unified_diff(std::string_view a, std::string_view b,
                         std::string_view a_label, std::string_view b_label,
                         std::size_t context = 3);

}  // namespace rca

#include "rca/diff.hpp"

#include "rca/text.hpp"

#include <algorithm>

namespace rca {

namespace {

using Lines = std::vector<std::string_view>;

// Myers' greedy forward search over the trimmed middle section, keeping one
// V snapshot per edit distance for the backtrack.
std::vector<DiffOp> myers(const Lines& a, std::size_t a0, std::size_t a1,
                          const Lines& b, std::size_t b0, std::size_t b1) {
    const long n = static_cast<long>(a1 - a0);
    const long m = static_cast<long>(b1 - b0);
    std::vector<DiffOp> ops;
    if (n == 0 && m == 0) return ops;
    if (n == 0) return std::vector<DiffOp>(static_cast<std::size_t>(m), DiffOp::insert);
    if (m == 0) return std::vector<DiffOp>(static_cast<std::size_t>(n), DiffOp::remove);

    const long max_d = n + m;
    const long offset = max_d;
    std::vector<long> v(static_cast<std::size_t>(2 * max_d + 2), 0);
    std::vector<std::vector<long>> trace;

    long found_d = -1;
    for (long d = 0; d <= max_d && found_d < 0; ++d) {
        trace.push_back(v);
        for (long k = -d; k <= d; k += 2) {
            long x;
            if (k == -d || (k != d && v[offset + k - 1] < v[offset + k + 1])) {
                x = v[offset + k + 1];
            } else {
                x = v[offset + k - 1] + 1;
            }
            long y = x - k;
            while (x < n && y < m && a[a0 + x] == b[b0 + y]) {
                ++x;
                ++y;
            }
            v[offset + k] = x;
            if (x >= n && y >= m) {
                found_d = d;
                break;
            }
        }
    }

    long x = n;
    long y = m;
    for (long d = found_d; d > 0; --d) {
        const auto& vd = trace[static_cast<std::size_t>(d)];
        const long k = x - y;
        long prev_k;
        if (k == -d || (k != d && vd[offset + k - 1] < vd[offset + k + 1])) {
            prev_k = k + 1;
        } else {
            prev_k = k - 1;
        }
        const long prev_x = vd[offset + prev_k];
        const long prev_y = prev_x - prev_k;
        while (x > prev_x && y > prev_y) {
            ops.push_back(DiffOp::keep);
            --x;
            --y;
        }
        ops.push_back(x == prev_x ? DiffOp::insert : DiffOp::remove);
        x = prev_x;
        y = prev_y;
    }
    while (x > 0 && y > 0) {
        ops.push_back(DiffOp::keep);
        --x;
        --y;
    }
    std::reverse(ops.begin(), ops.end());
    return ops;
}

}  // namespace

std::vector<DiffOp> diff_lines(const Lines& a, const Lines& b) {
    std::size_t prefix = 0;
    while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
    std::size_t suffix = 0;
    while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
           a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix]) {
        ++suffix;
    }
    std::vector<DiffOp> ops(prefix, DiffOp::keep);
    auto middle = myers(a, prefix, a.size() - suffix, b, prefix, b.size() - suffix);
    ops.insert(ops.end(), middle.begin(), middle.end());
    ops.insert(ops.end(), suffix, DiffOp::keep);
    return ops;
}

DiffStats diff_stats(std::string_view a, std::string_view b) {
    DiffStats stats;
    for (auto op : diff_lines(text::split_lines_keep(a), text::split_lines_keep(b))) {
        if (op == DiffOp::insert) ++stats.additions;
        if (op == DiffOp::remove) ++stats.deletions;
    }
    return stats;
}

namespace {

void append_line(std::string& out, char tag, std::string_view line) {
    out.push_back(tag);
    out.append(line);
    if (line.empty() || line.back() != '\n') {
        out += "\n\\ No newline at end of file\n";
    }
}

std::string range(std::size_t start, std::size_t len) {
    // Unified format: an empty range points at the line before it.
    if (len == 0) return std::to_string(start) + ",0";
    if (len == 1) return std::to_string(start + 1);
    return std::to_string(start + 1) + "," + std::to_string(len);
}

}  // namespace

UnifiedDiff unified_diff(std::string_view a_text, std::string_view b_text,
                         std::string_view a_label, std::string_view b_label,
                         std::size_t context) {
    const auto a = text::split_lines_keep(a_text);
    const auto b = text::split_lines_keep(b_text);
    const auto ops = diff_lines(a, b);

    UnifiedDiff result;
    for (auto op : ops) {
        if (op == DiffOp::insert) ++result.stats.additions;
        if (op == DiffOp::remove) ++result.stats.deletions;
    }
    if (result.stats.empty()) return result;

    // Positions in a/b before each op.
    std::vector<std::size_t> ai(ops.size() + 1), bi(ops.size() + 1);
    for (std::size_t i = 0; i < ops.size(); ++i) {
        ai[i + 1] = ai[i] + (ops[i] != DiffOp::insert ? 1 : 0);
        bi[i + 1] = bi[i] + (ops[i] != DiffOp::remove ? 1 : 0);
    }

    std::string& out = result.text;
    out += "--- ";
    out += a_label;
    out += "\n+++ ";
    out += b_label;
    out += "\n";

    std::size_t i = 0;
    while (i < ops.size()) {
        while (i < ops.size() && ops[i] == DiffOp::keep) ++i;
        if (i == ops.size()) break;
        const std::size_t hunk_begin = i >= context ? i - context : 0;
        // Extend the hunk while the next change is within 2*context keeps.
        std::size_t end = i;
        while (true) {
            while (end < ops.size() && ops[end] != DiffOp::keep) ++end;
            std::size_t keeps = 0;
            std::size_t probe = end;
            while (probe < ops.size() && ops[probe] == DiffOp::keep) {
                ++keeps;
                ++probe;
            }
            if (probe < ops.size() && keeps <= 2 * context) {
                end = probe;
                continue;
            }
            end = std::min(ops.size(), end + context);
            break;
        }
        out += "@@ -" + range(ai[hunk_begin], ai[end] - ai[hunk_begin]) + " +" +
               range(bi[hunk_begin], bi[end] - bi[hunk_begin]) + " @@\n";
        for (std::size_t j = hunk_begin; j < end; ++j) {
            switch (ops[j]) {
                case DiffOp::keep: append_line(out, ' ', a[ai[j]]); break;
                case DiffOp::remove: append_line(out, '-', a[ai[j]]); break;
                case DiffOp::insert: append_line(out, '+', b[bi[j]]); break;
            }
        }
        i = end;
    }
    return result;
}

}  // namespace rca

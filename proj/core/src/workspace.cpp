#include "rca/workspace.hpp"

#include "rca/error.hpp"
#include "rca/text.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <regex>
#include <sstream>

namespace rca {

std::string_view to_string(FileRole role) {
    switch (role) {
        case FileRole::methodology: return "methodology";
        case FileRole::dataset: return "dataset";
        case FileRole::pseudocode: return "pseudocode";
        case FileRole::starter_code: return "starter_code";
        case FileRole::starter_performance: return "starter_performance";
        case FileRole::subpart: return "subpart";
        case FileRole::supplementary: return "supplementary";
        case FileRole::generated: return "generated";
    }
    return "unknown";
}

std::string_view to_string(PerfDirection direction) {
    return direction == PerfDirection::higher_better ? "higher_better" : "lower_better";
}

PerfDirection parse_perf_direction(std::string_view text) {
    if (text == "higher_better") return PerfDirection::higher_better;
    if (text == "lower_better") return PerfDirection::lower_better;
    throw Error(ErrorKind::config, "perf_direction must be higher_better or lower_better, got '" +
                                       std::string(text) + "'");
}

std::vector<double> match_performance(const std::string& pattern, std::string_view text) {
    std::regex re;
    try {
        re = std::regex(pattern, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
        throw Error(ErrorKind::config, "invalid perf_pattern '" + pattern + "': " + e.what());
    }
    if (re.mark_count() != 1) {
        throw Error(ErrorKind::config, "perf_pattern must have exactly one capture group: " + pattern);
    }
    std::vector<double> values;
    const std::string haystack(text);
    for (auto it = std::sregex_iterator(haystack.begin(), haystack.end(), re);
         it != std::sregex_iterator(); ++it) {
        const std::string captured = (*it)[1].str();
        double value = 0.0;
        const auto* first = captured.data();
        const auto* last = first + captured.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last) {
            throw Error(ErrorKind::extraction,
                        "perf_pattern captured a non-numeric value: '" + captured + "'");
        }
        values.push_back(value);
    }
    return values;
}

namespace {

const std::regex& subpart_regex() {
    static const std::regex re(R"(subpart_(\d+)_([A-Za-z0-9]+)\.[A-Za-z0-9]+)");
    return re;
}

bool path_within(const fs::path& root, const fs::path& candidate) {
    auto r = root.begin();
    auto c = candidate.begin();
    for (; r != root.end(); ++r, ++c) {
        if (r->empty()) continue;
        if (c == candidate.end() || *r != *c) return false;
    }
    return true;
}

std::string encode_script_key(const std::string& script) {
    std::string out;
    for (char ch : script) {
        if (ch == '/') {
            out += "%2F";
        } else if (ch == '%') {
            out += "%25";
        } else {
            out.push_back(ch);
        }
    }
    return out;
}

std::string entry_name(std::size_t index, bool absent) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06zu.%s", index, absent ? "absent" : "txt");
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// EditHistory

EditHistory::EditHistory(fs::path storage_dir) : storage_dir_(std::move(storage_dir)) {
    if (storage_dir_.empty()) return;
    fs::create_directories(storage_dir_);
    for (const auto& script_dir : fs::directory_iterator(storage_dir_)) {
        if (!script_dir.is_directory()) continue;
        std::string key = script_dir.path().filename().string();
        std::string script;
        for (std::size_t i = 0; i < key.size(); ++i) {
            if (key.compare(i, 3, "%2F") == 0) {
                script.push_back('/');
                i += 2;
            } else if (key.compare(i, 3, "%25") == 0) {
                script.push_back('%');
                i += 2;
            } else {
                script.push_back(key[i]);
            }
        }
        std::vector<fs::path> entries;
        for (const auto& e : fs::directory_iterator(script_dir.path())) entries.push_back(e.path());
        std::sort(entries.begin(), entries.end());
        auto& stack = stacks_[script];
        for (const auto& e : entries) {
            if (e.extension() == ".absent") {
                stack.emplace_back(std::nullopt);
            } else if (e.extension() == ".txt") {
                stack.emplace_back(text::read_file(e));
            }
        }
    }
}

fs::path EditHistory::dir_for(const std::string& script) const {
    return storage_dir_ / encode_script_key(script);
}

void EditHistory::push(const std::string& script, std::optional<std::string> prior) {
    auto& stack = stacks_[script];
    if (!storage_dir_.empty()) {
        const auto dir = dir_for(script);
        fs::create_directories(dir);
        text::write_file_atomic(dir / entry_name(stack.size(), !prior), prior.value_or(""));
    }
    stack.push_back(std::move(prior));
}

std::optional<std::string> EditHistory::pop(const std::string& script) {
    auto it = stacks_.find(script);
    if (it == stacks_.end() || it->second.empty()) {
        throw Error(ErrorKind::nothing_to_undo, "no edits recorded for " + script);
    }
    auto prior = std::move(it->second.back());
    it->second.pop_back();
    if (!storage_dir_.empty()) {
        const auto dir = dir_for(script);
        const auto index = it->second.size();
        std::error_code ec;
        fs::remove(dir / entry_name(index, true), ec);
        fs::remove(dir / entry_name(index, false), ec);
    }
    return prior;
}

std::size_t EditHistory::depth(const std::string& script) const {
    auto it = stacks_.find(script);
    return it == stacks_.end() ? 0 : it->second.size();
}

// ---------------------------------------------------------------------------
// Validation

std::vector<std::string> validate_workspace(const fs::path& root) {
    std::vector<std::string> issues;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        issues.push_back("workspace root is not a directory: " + root.string());
        return issues;
    }
    const auto manifest_path = root / kManifestFile;
    if (!fs::is_regular_file(manifest_path, ec)) {
        issues.push_back("missing manifest " + std::string(kManifestFile));
        return issues;
    }
    WorkspaceManifest manifest;
    try {
        manifest = WorkspaceManifest::load(manifest_path);
    } catch (const Error& e) {
        issues.push_back(e.what());
        return issues;
    }

    const auto canonical_root = fs::weakly_canonical(root);
    auto check_path = [&](std::string_view what, const std::string& rel) {
        const auto resolved = fs::weakly_canonical(canonical_root / rel);
        if (!path_within(canonical_root, resolved)) {
            issues.push_back(std::string(what) + ": path escapes the workspace: " + rel);
            return false;
        }
        if (!fs::is_regular_file(resolved, ec)) {
            issues.push_back(std::string(what) + ": file not found: " + rel);
            return false;
        }
        return true;
    };

    for (FileRole role : kMandatoryRoles) {
        auto it = manifest.mandatory.find(role);
        if (it == manifest.mandatory.end()) {
            issues.push_back("missing mandatory role '" + std::string(to_string(role)) + "' in manifest");
            continue;
        }
        check_path("role '" + std::string(to_string(role)) + "'", it->second);
    }
    for (const auto& extra : manifest.supplementary) check_path("supplementary file", extra);

    auto perf = manifest.mandatory.find(FileRole::starter_performance);
    if (perf != manifest.mandatory.end() && fs::is_regular_file(root / perf->second, ec)) {
        try {
            const auto values = match_performance(manifest.perf_pattern,
                                                  text::read_file(root / perf->second));
            if (values.empty()) {
                issues.push_back("perf_pattern matches no value in " + perf->second);
            } else if (values.size() > 1) {
                issues.push_back("perf_pattern is ambiguous: " + std::to_string(values.size()) +
                                 " values matched in " + perf->second);
            }
        } catch (const Error& e) {
            issues.push_back(e.what());
        }
    }
    if (manifest.timeout_seconds && *manifest.timeout_seconds <= 0) {
        issues.push_back("timeout_seconds must be positive");
    }
    return issues;
}

// ---------------------------------------------------------------------------
// Workspace

Workspace::Workspace(fs::path root, WorkspaceManifest manifest, EditHistory history)
    : root_(std::move(root)), manifest_(std::move(manifest)), history_(std::move(history)) {}

Workspace Workspace::open(const fs::path& root, const fs::path& history_dir) {
    std::error_code ec;
    if (!fs::exists(root, ec)) throw Error(ErrorKind::not_found, "workspace not found: " + root.string());
    const auto issues = validate_workspace(root);
    if (!issues.empty()) {
        throw Error(ErrorKind::config, "invalid workspace " + root.string() + ":\n  " +
                                           text::join(issues, "\n  "));
    }
    auto manifest = WorkspaceManifest::load(root / kManifestFile);
    return Workspace(fs::canonical(root), std::move(manifest),
                     history_dir.empty() ? EditHistory() : EditHistory(history_dir));
}

const std::string& Workspace::path_of(FileRole role) const {
    auto it = manifest_.mandatory.find(role);
    if (it == manifest_.mandatory.end()) {
        throw Error(ErrorKind::not_found, "no file declared for role " + std::string(to_string(role)));
    }
    return it->second;
}

std::vector<KnownFile> Workspace::files() const {
    std::vector<KnownFile> out;
    std::set<std::string> seen;
    auto add = [&](KnownFile f) {
        if (seen.insert(f.relative_path).second) out.push_back(std::move(f));
    };
    for (FileRole role : kMandatoryRoles) add({path_of(role), role, std::nullopt});
    for (const auto& extra : manifest_.supplementary) {
        std::smatch m;
        const auto name = fs::path(extra).filename().string();
        if (std::regex_match(name, m, subpart_regex())) {
            add({extra, FileRole::subpart, SubpartIndex{std::stoi(m[1].str()), m[2].str()}});
        } else {
            add({extra, FileRole::supplementary, std::nullopt});
        }
    }
    std::vector<fs::path> discovered;
    for (const auto& entry : fs::recursive_directory_iterator(root_)) {
        if (entry.is_regular_file()) discovered.push_back(entry.path());
    }
    std::sort(discovered.begin(), discovered.end());
    for (const auto& p : discovered) {
        std::smatch m;
        const auto name = p.filename().string();
        if (std::regex_match(name, m, subpart_regex())) {
            add({fs::relative(p, root_).generic_string(), FileRole::subpart,
                 SubpartIndex{std::stoi(m[1].str()), m[2].str()}});
        }
    }
    for (const auto& g : generated_) add({g, FileRole::generated, std::nullopt});
    return out;
}

fs::path Workspace::resolve(std::string_view relative) const {
    const fs::path requested{std::string(relative)};
    const fs::path candidate = requested.is_absolute() ? requested : root_ / requested;
    const auto resolved = fs::weakly_canonical(candidate);
    if (!path_within(root_, resolved)) {
        throw Error(ErrorKind::sandbox_violation,
                    "path '" + std::string(relative) + "' is outside the workspace");
    }
    return resolved;
}

std::string Workspace::relative_key(std::string_view relative) const {
    const auto resolved = resolve(relative);
    auto rel = fs::relative(resolved, root_).generic_string();
    return rel.empty() ? "." : rel;
}

bool Workspace::exists(std::string_view relative) const {
    std::error_code ec;
    return fs::exists(resolve(relative), ec);
}

std::string Workspace::read(std::string_view relative) const {
    const auto path = resolve(relative);
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) {
        throw Error(ErrorKind::not_found, "file not found: " + std::string(relative));
    }
    return text::read_file(path);
}

std::vector<std::string> Workspace::list_files(std::string_view directory) const {
    const auto path = resolve(directory.empty() ? std::string_view(".") : directory);
    std::error_code ec;
    if (!fs::is_directory(path, ec)) {
        throw Error(ErrorKind::not_found, "directory not found: " + std::string(directory));
    }
    const bool at_root = path == root_;
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(path)) {
        auto name = entry.path().filename().string();
        if (at_root && (name == kManifestFile || name == kLockFile)) continue;
        if (entry.is_directory()) name += "/";
        names.push_back(std::move(name));
    }
    std::sort(names.begin(), names.end());
    return names;
}

void Workspace::copy_file(std::string_view source, std::string_view destination) {
    const auto src = resolve(source);
    const auto dst = resolve(destination);
    std::error_code ec;
    if (!fs::is_regular_file(src, ec)) {
        throw Error(ErrorKind::not_found, "source file not found: " + std::string(source));
    }
    if (!fs::is_directory(dst.parent_path(), ec)) {
        throw Error(ErrorKind::missing_parent,
                    "destination directory does not exist: " + std::string(destination));
    }
    if (fs::is_directory(dst, ec)) {
        throw Error(ErrorKind::validation, "destination is a directory: " + std::string(destination));
    }
    fs::copy_file(src, dst, fs::copy_options::overwrite_existing, ec);
    if (ec) throw Error(ErrorKind::io, "copy failed: " + ec.message());
    generated_.insert(relative_key(destination));
}

std::string Workspace::inspect_lines(std::string_view script, long start, long end) const {
    if (start < 1) throw Error(ErrorKind::invalid_range, "start line must be >= 1");
    if (start > end) {
        throw Error(ErrorKind::invalid_range, "start line " + std::to_string(start) +
                                                  " is after end line " + std::to_string(end));
    }
    const auto content = read(script);
    const auto lines = text::split_lines_keep(content);
    const long total = static_cast<long>(lines.size());
    if (start > total) {
        throw Error(ErrorKind::invalid_range, "start line " + std::to_string(start) +
                                                  " is beyond the end of " + std::string(script) +
                                                  " (" + std::to_string(total) + " lines)");
    }
    const long last = std::min(end, total);
    if (last - start + 1 > static_cast<long>(kMaxInspectLines)) {
        throw Error(ErrorKind::span_too_large,
                    "requested " + std::to_string(last - start + 1) + " lines; at most " +
                        std::to_string(kMaxInspectLines) +
                        " lines can be inspected per call, narrow the span");
    }
    std::string out;
    for (long n = start; n <= last; ++n) {
        out += std::to_string(n);
        out += ": ";
        out += lines[static_cast<std::size_t>(n - 1)];
    }
    return out;
}

UnifiedDiff Workspace::get_diff(std::string_view script_a, std::string_view script_b) const {
    const auto a = read(script_a);
    const auto b = read(script_b);
    return unified_diff(a, b, script_a, script_b);
}

UnifiedDiff Workspace::apply_edit(std::string_view script, std::string_view new_content) {
    const auto path = resolve(script);
    const auto key = relative_key(script);
    std::error_code ec;
    if (fs::is_directory(path, ec)) throw Error(ErrorKind::validation, "cannot edit a directory: " + key);
    if (!fs::is_directory(path.parent_path(), ec)) {
        throw Error(ErrorKind::missing_parent, "directory does not exist for " + key);
    }
    std::optional<std::string> prior;
    if (fs::is_regular_file(path, ec)) prior = text::read_file(path);
    auto diff = unified_diff(prior.value_or(""), new_content, key, key);
    history_.push(key, prior);
    text::write_file_atomic(path, new_content);
    if (!prior) generated_.insert(key);
    return diff;
}

void Workspace::undo_edit(std::string_view script) {
    const auto path = resolve(script);
    const auto key = relative_key(script);
    auto prior = history_.pop(key);
    if (prior) {
        text::write_file_atomic(path, *prior);
    } else {
        std::error_code ec;
        fs::remove(path, ec);
        generated_.erase(key);
    }
}

std::size_t Workspace::edit_depth(std::string_view script) const {
    return history_.depth(relative_key(script));
}

Performance Workspace::read_baseline_performance() const {
    const auto& file = path_of(FileRole::starter_performance);
    const auto values = match_performance(manifest_.perf_pattern, read(file));
    if (values.empty()) {
        throw Error(ErrorKind::extraction, "perf_pattern matches no value in " + file);
    }
    if (values.size() > 1) {
        throw Error(ErrorKind::ambiguity, "perf_pattern matched " + std::to_string(values.size()) +
                                              " values in " + file);
    }
    return {values.front(), manifest_.perf_direction};
}

}  // namespace rca

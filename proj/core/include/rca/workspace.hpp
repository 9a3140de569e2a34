#pragma once

#include "rca/diff.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace rca {

namespace fs = std::filesystem;

enum class FileRole {
    methodology,
    dataset,
    pseudocode,
    starter_code,
    starter_performance,
    subpart,
    supplementary,
    generated,
};

std::string_view to_string(FileRole role);

enum class PerfDirection { higher_better, lower_better };

std::string_view to_string(PerfDirection direction);
PerfDirection parse_perf_direction(std::string_view text);

// subpart_[i]_[j]: the j'th script related to the i'th methodology subpart.
struct SubpartIndex {
    int subpart = 0;
    std::string variant;
    bool operator==(const SubpartIndex&) const = default;
};

struct KnownFile {
    std::string relative_path;
    FileRole role = FileRole::supplementary;
    std::optional<SubpartIndex> subpart_index;
};

struct Performance {
    double value = 0.0;
    PerfDirection direction = PerfDirection::higher_better;
};

inline constexpr std::string_view kManifestFile = "workspace.toml";
inline constexpr std::string_view kLockFile = ".rca.lock";
inline constexpr std::size_t kMaxInspectLines = 100;

inline constexpr FileRole kMandatoryRoles[] = {
    FileRole::methodology, FileRole::dataset, FileRole::pseudocode,
    FileRole::starter_code, FileRole::starter_performance,
};

// Parsed workspace.toml.
struct WorkspaceManifest {
    std::string task;
    std::map<FileRole, std::string> mandatory;
    std::vector<std::string> supplementary;
    std::string script_interpreter = "python3";
    std::string perf_pattern;
    PerfDirection perf_direction = PerfDirection::higher_better;
    std::optional<double> timeout_seconds;

    static WorkspaceManifest load(const fs::path& manifest_file);
};

// Every numeric value captured by `pattern` (which must have exactly one
// capture group) in `text`, in order of appearance.
std::vector<double> match_performance(const std::string& pattern, std::string_view text);

// All problems that would prevent Workspace::open from succeeding. Each entry
// is a single human-readable line; an empty result means the workspace is valid.
std::vector<std::string> validate_workspace(const fs::path& root);

// Per-script stack of prior contents. A stored nullopt means the script did
// not exist before the edit. When a storage directory is given every push and
// pop is mirrored to disk and an existing directory is reloaded.
class EditHistory {
public:
    EditHistory() = default;
    explicit EditHistory(fs::path storage_dir);

    void push(const std::string& script, std::optional<std::string> prior);
    std::optional<std::string> pop(const std::string& script);
    std::size_t depth(const std::string& script) const;
    bool empty(const std::string& script) const { return depth(script) == 0; }

private:
    fs::path dir_for(const std::string& script) const;

    fs::path storage_dir_;
    std::map<std::string, std::vector<std::optional<std::string>>> stacks_;
};

class Workspace {
public:
    // Validates root and its manifest; throws rca::Error(config) listing every
    // problem found. Edit history lives under `history_dir` (memory only when empty).
    static Workspace open(const fs::path& root, const fs::path& history_dir = {});

    const fs::path& root() const { return root_; }
    const WorkspaceManifest& manifest() const { return manifest_; }
    const std::string& path_of(FileRole mandatory_role) const;
    std::vector<KnownFile> files() const;

    // Resolves a workspace-relative path, rejecting anything that escapes root.
    fs::path resolve(std::string_view relative) const;
    bool exists(std::string_view relative) const;
    std::string read(std::string_view relative) const;

    std::vector<std::string> list_files(std::string_view directory) const;
    void copy_file(std::string_view source, std::string_view destination);
    std::string inspect_lines(std::string_view script, long start, long end) const;
    UnifiedDiff get_diff(std::string_view script_a, std::string_view script_b) const;

    // Commit point for both edit actions: records the prior content (or its
    // absence) and writes `new_content`. Returns the diff against the prior content.
    UnifiedDiff apply_edit(std::string_view script, std::string_view new_content);
    void undo_edit(std::string_view script);
    std::size_t edit_depth(std::string_view script) const;

    Performance read_baseline_performance() const;

private:
    Workspace(fs::path root, WorkspaceManifest manifest, EditHistory history);

    std::string relative_key(std::string_view relative) const;

    fs::path root_;
    WorkspaceManifest manifest_;
    EditHistory history_;
    std::set<std::string> generated_;
};

}  // namespace rca

#pragma once

// Builds line-level labels from bug-fixing commits: commits whose message
// cites a known bug report id mark the pre-change lines they modified or
// deleted as defective.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linedp/corpus.hpp"

namespace linedp {

struct RemovedLine {
    int line = 0;  // 1-based, in the pre-change revision
    std::string content;
};

struct FileChange {
    std::string path;  // repo-relative, forward slashes
    std::vector<RemovedLine> removed;
};

struct CommitRecord {
    std::string commit_id;
    std::string message;
    std::vector<FileChange> changes;
};

// One JSON object per line:
// {"commit_id": "...", "message": "...", "changes": [{"path": "...", "removed": [{"line": N, "content": "..."}]}]}
// Blank lines are skipped.  Throws DataError naming the line on bad records.
std::vector<CommitRecord> read_commits_jsonl(std::istream& in, std::string_view source_name = "<input>");
std::vector<CommitRecord> load_commits_jsonl(const std::filesystem::path& path);

// Backslashes become '/', leading "./" and "/" are dropped, repeated slashes collapse.
std::string normalize_path(std::string_view path);

struct IssueKeySet {
    std::string project_key;  // shared prefix, or "" when ids span several projects
    std::set<std::string, std::less<>> bug_ids;
};

bool is_issue_id(std::string_view id);

// Newline-delimited ids; '#' starts a comment.  Throws DataError on ids not of
// the form KEY-<digits> or on an empty set.
IssueKeySet read_issue_keys(std::istream& in, std::string_view source_name = "<input>");
IssueKeySet load_issue_keys(const std::filesystem::path& path);

// A commit qualifies when some id appears in its message as a whole token,
// i.e. not preceded or followed by a letter, digit or '_'.
std::vector<CommitRecord> find_bugfix_commits(std::span<const CommitRecord> commits, const IssueKeySet& issues);

inline constexpr int kLineMatchWindow = 20;

struct LabelStats {
    std::size_t matched_lines = 0;     // pre-image lines resolved to a snapshot line
    std::size_t unresolved_lines = 0;  // no identical line within the window
    std::size_t ignored_changes = 0;   // file changes naming paths absent from the snapshot
};

// Resets every label of `snapshot`, then marks the lines touched by the
// fixes.  A removed line resolves to the snapshot line with the same number
// if the content matches, otherwise to the nearest identical line within
// +-kLineMatchWindow (the lower number wins a tie).
ReleaseDataset label_defective_lines(ReleaseDataset snapshot, std::span<const CommitRecord> bugfix_commits,
                                     LabelStats* stats = nullptr);

// Writes the canonical dataset CSV atomically.
void export_dataset(const ReleaseDataset& labeled, const std::filesystem::path& out_path);

}  // namespace linedp

#include "linedp/miner.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "linedp/error.hpp"
#include "linedp/io.hpp"

namespace linedp {

namespace {

using nlohmann::json;

bool is_word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

std::string where(std::string_view source, std::size_t line) {
    return std::string(source) + ":" + std::to_string(line) + ": ";
}

const std::string& require_string(const json& obj, const char* key, const std::string& ctx) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) throw DataError(ctx + "missing string field '" + key + "'");
    return it->get_ref<const std::string&>();
}

CommitRecord parse_commit(const json& j, const std::string& ctx) {
    if (!j.is_object()) throw DataError(ctx + "record is not a JSON object");
    CommitRecord c;
    c.commit_id = require_string(j, "commit_id", ctx);
    c.message = require_string(j, "message", ctx);
    auto changes = j.find("changes");
    if (changes == j.end()) return c;
    if (!changes->is_array()) throw DataError(ctx + "'changes' is not an array");
    for (const auto& ch : *changes) {
        if (!ch.is_object()) throw DataError(ctx + "change entry is not an object");
        FileChange fc;
        fc.path = normalize_path(require_string(ch, "path", ctx));
        if (fc.path.empty()) throw DataError(ctx + "empty change path");
        auto removed = ch.find("removed");
        if (removed != ch.end()) {
            if (!removed->is_array()) throw DataError(ctx + "'removed' is not an array");
            for (const auto& r : *removed) {
                auto line = r.find("line");
                if (!r.is_object() || line == r.end() || !line->is_number_integer())
                    throw DataError(ctx + "removed entry needs an integer 'line'");
                const auto n = line->get<long long>();
                if (n < 1 || n > std::numeric_limits<int>::max())
                    throw DataError(ctx + "removed line number " + std::to_string(n) + " out of range in " + fc.path);
                fc.removed.push_back(RemovedLine{static_cast<int>(n), require_string(r, "content", ctx)});
            }
        }
        c.changes.push_back(std::move(fc));
    }
    return c;
}

}  // namespace

std::string normalize_path(std::string_view path) {
    std::string s(path);
    std::replace(s.begin(), s.end(), '\\', '/');
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '/' && !out.empty() && out.back() == '/') continue;
        out.push_back(c);
    }
    for (;;) {
        if (out.starts_with("./")) out.erase(0, 2);
        else if (out.starts_with("/")) out.erase(0, 1);
        else break;
    }
    return out;
}

std::vector<CommitRecord> read_commits_jsonl(std::istream& in, std::string_view source_name) {
    std::vector<CommitRecord> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const std::string ctx = where(source_name, number);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError(ctx + "invalid JSON: " + e.what());
        }
        out.push_back(parse_commit(j, ctx));
    }
    return out;
}

std::vector<CommitRecord> load_commits_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return read_commits_jsonl(in, path.string());
}

bool is_issue_id(std::string_view id) {
    static const std::regex pattern("[A-Za-z][A-Za-z0-9_]*-[0-9]+");
    return std::regex_match(id.begin(), id.end(), pattern);
}

IssueKeySet read_issue_keys(std::istream& in, std::string_view source_name) {
    IssueKeySet keys;
    std::set<std::string> prefixes;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t\r");
        std::string id = line.substr(b, e - b + 1);
        if (!is_issue_id(id)) throw DataError(where(source_name, number) + "not an issue id: '" + id + "'");
        prefixes.insert(id.substr(0, id.rfind('-')));
        keys.bug_ids.insert(std::move(id));
    }
    if (keys.bug_ids.empty()) throw DataError(std::string(source_name) + ": no issue ids");
    if (prefixes.size() == 1) keys.project_key = *prefixes.begin();
    return keys;
}

IssueKeySet load_issue_keys(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return read_issue_keys(in, path.string());
}

namespace {

bool mentions(std::string_view message, std::string_view id) {
    for (std::size_t pos = message.find(id); pos != std::string_view::npos; pos = message.find(id, pos + 1)) {
        const bool left = pos == 0 || !is_word_char(message[pos - 1]);
        const std::size_t end = pos + id.size();
        const bool right = end == message.size() || !is_word_char(message[end]);
        if (left && right) return true;
    }
    return false;
}

}  // namespace

std::vector<CommitRecord> find_bugfix_commits(std::span<const CommitRecord> commits, const IssueKeySet& issues) {
    std::vector<CommitRecord> out;
    for (const auto& c : commits) {
        const bool hit = std::any_of(issues.bug_ids.begin(), issues.bug_ids.end(),
                                     [&](const std::string& id) { return mentions(c.message, id); });
        if (hit) out.push_back(c);
    }
    return out;
}

ReleaseDataset label_defective_lines(ReleaseDataset snapshot, std::span<const CommitRecord> bugfix_commits,
                                     LabelStats* stats) {
    LabelStats local;
    std::map<std::string, SourceFile*, std::less<>> by_path;
    for (auto& f : snapshot.files) {
        for (auto& l : f.lines) l.is_defective = false;
        f.file_label = false;
        by_path.emplace(normalize_path(f.path), &f);
    }

    for (const auto& commit : bugfix_commits) {
        for (const auto& change : commit.changes) {
            auto it = by_path.find(normalize_path(change.path));
            if (it == by_path.end()) {
                ++local.ignored_changes;
                continue;
            }
            auto& lines = it->second->lines;
            const int n = static_cast<int>(lines.size());
            for (const auto& r : change.removed) {
                int found = -1;
                for (int d = 0; d <= kLineMatchWindow && found < 0; ++d) {
                    for (int cand : {r.line - d, r.line + d}) {
                        if (cand >= 1 && cand <= n && lines[cand - 1].content == r.content) {
                            found = cand;
                            break;
                        }
                    }
                }
                if (found < 0) {
                    ++local.unresolved_lines;
                    continue;
                }
                lines[found - 1].is_defective = true;
                ++local.matched_lines;
            }
        }
    }
    for (auto& f : snapshot.files) f.file_label = f.defective_line_count() > 0;
    if (stats) *stats = local;
    return snapshot;
}

void export_dataset(const ReleaseDataset& labeled, const std::filesystem::path& out_path) {
    save_dataset(out_path, std::span<const ReleaseDataset>(&labeled, 1));
}

}  // namespace linedp

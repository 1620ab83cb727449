#pragma once

// Line-level defect datasets, tokenisation, vocabularies and bag-of-tokens
// feature vectors.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace linedp {

struct LineRecord {
    int number = 0;  // 1-based
    std::string content;
    bool is_defective = false;

    bool operator==(const LineRecord&) const = default;
};

struct SourceFile {
    std::string release_id;
    std::string path;
    std::vector<LineRecord> lines;
    bool file_label = false;

    std::size_t loc() const noexcept { return lines.size(); }
    std::size_t defective_line_count() const noexcept;

    bool operator==(const SourceFile&) const = default;
};

using Date = std::chrono::year_month_day;

// Parses YYYY-MM-DD.  Throws DataError on anything else.
Date parse_date(std::string_view iso);
std::string format_date(const Date& d);

struct ReleaseDataset {
    std::string release_id;
    std::optional<Date> release_date;
    // Releases of one software system share a system id; cross-release pairs
    // never span systems.
    std::string system;
    std::vector<SourceFile> files;

    bool operator==(const ReleaseDataset&) const = default;
};

// Maximal runs of [A-Za-z0-9_]; everything else separates.  Case is kept.
std::vector<std::string> tokenize(std::string_view text);

template <typename Fn>
void for_each_token(std::string_view text, Fn&& fn) {
    auto is_token_char = [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '_';
    };
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && !is_token_char(text[i])) ++i;
        const std::size_t start = i;
        while (i < n && is_token_char(text[i])) ++i;
        if (i > start) fn(text.substr(start, i - start));
    }
}

struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
        return std::hash<std::string_view>{}(s);
    }
};

class Vocabulary {
public:
    Vocabulary() = default;

    // Counts every token occurrence across all lines of `files`, drops tokens
    // seen exactly once, and indexes the rest in lexicographic order.
    // Throws ModelError if nothing survives the filter.
    static Vocabulary build(std::span<const SourceFile> files);

    // Rebuilds a vocabulary from tokens already in index order (model
    // persistence).  Counts are optional.
    static Vocabulary from_tokens(std::vector<std::string> tokens,
                                  std::vector<std::uint64_t> counts = {});

    std::size_t size() const noexcept { return tokens_.size(); }
    bool empty() const noexcept { return tokens_.empty(); }
    std::optional<std::uint32_t> index_of(std::string_view token) const;
    const std::string& token(std::uint32_t index) const { return tokens_.at(index); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    // Corpus frequency per index; empty if the vocabulary was rebuilt without counts.
    const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
    std::uint64_t fingerprint() const noexcept { return fingerprint_; }

private:
    std::vector<std::string> tokens_;
    std::vector<std::uint64_t> counts_;
    std::unordered_map<std::string, std::uint32_t, StringHash, std::equal_to<>> index_;
    std::uint64_t fingerprint_ = 0;

    void reindex();
};

inline Vocabulary build_vocabulary(std::span<const SourceFile> files) {
    return Vocabulary::build(files);
}

// Sparse token-count vector.  Entries are sorted by index and every stored
// count is >= 1.
struct FeatureVector {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;
    std::size_t dimension = 0;
    std::uint64_t vocab_fingerprint = 0;

    bool empty() const noexcept { return entries.empty(); }
    std::uint64_t total_count() const noexcept;
    std::uint32_t count(std::uint32_t index) const noexcept;
};

FeatureVector vectorize(const SourceFile& file, const Vocabulary& vocab);

// Canonical CSV: release,file_path,line_number,line_content,file_label,line_label.
// Files come back sorted by path within each release; releases keep their
// first-appearance order.  Throws DataError naming the offending record.
std::vector<ReleaseDataset> read_dataset(std::istream& in, std::string_view source_name = "<input>");
std::vector<ReleaseDataset> load_dataset(const std::filesystem::path& path);

// Rows are written per release, files by path, lines by number.
void write_dataset(std::ostream& out, std::span<const ReleaseDataset> releases);
void save_dataset(const std::filesystem::path& path, std::span<const ReleaseDataset> releases);

struct ReleaseMetadata {
    std::string release_id;
    Date release_date;
    std::string system;  // empty unless given in a `system` column
};

// Sidecar CSV `release,release_date[,system]`.
std::vector<ReleaseMetadata> load_release_metadata(const std::filesystem::path& path);
std::vector<ReleaseMetadata> read_release_metadata(std::istream& in,
                                                   std::string_view source_name = "<input>");

// Attaches dates (and systems) to the matching releases.  Releases without a
// `system` value get the release id up to its last '-' (e.g. "activemq" for
// "activemq-5.0.0"), or "" when there is no '-'.
void apply_release_metadata(std::vector<ReleaseDataset>& releases,
                            std::span<const ReleaseMetadata> metadata);
std::string default_system_of(std::string_view release_id);

// Ratio of defective lines to all lines.  Throws DataError on an empty file.
double defect_density(const SourceFile& file);

// Converts one release of the publicly released line-level dataset layout:
// a file-level CSV (File,Bug,SRC with the full source text in SRC) and a
// line-level CSV (File,Commit,Line_number,Line listing defective lines).
// File labels are derived from the line labels.
struct PublishedImportStats {
    std::size_t files = 0;
    std::size_t defective_lines = 0;
    std::size_t unmatched_line_rows = 0;  // rows naming unknown files or out-of-range lines
    std::size_t label_disagreements = 0;  // Bug column vs derived file label
};
ReleaseDataset import_published_release(std::istream& file_level, std::istream& line_level,
                                        std::string release_id,
                                        PublishedImportStats* stats = nullptr);

}  // namespace linedp

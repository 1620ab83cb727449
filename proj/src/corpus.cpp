#include "linedp/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "linedp/csv.hpp"
#include "linedp/error.hpp"
#include "linedp/io.hpp"
#include "linedp/random.hpp"

namespace linedp {

std::size_t SourceFile::defective_line_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(lines.begin(), lines.end(), [](const LineRecord& l) { return l.is_defective; }));
}

Date parse_date(std::string_view iso) {
    auto fail = [&]() -> Date {
        throw DataError("invalid date '" + std::string{iso} + "' (expected YYYY-MM-DD)");
    };
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return fail();
    int y = 0;
    unsigned m = 0, d = 0;
    auto parse = [&](std::string_view s, auto& out) {
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc{} && p == s.data() + s.size();
    };
    if (!parse(iso.substr(0, 4), y) || !parse(iso.substr(5, 2), m) || !parse(iso.substr(8, 2), d))
        return fail();
    Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) return fail();
    return date;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    for_each_token(text, [&](std::string_view tok) { out.emplace_back(tok); });
    return out;
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary Vocabulary::build(std::span<const SourceFile> files) {
    if (files.empty()) throw ModelError("cannot build a vocabulary from an empty training set");
    std::unordered_map<std::string, std::uint64_t, StringHash, std::equal_to<>> freq;
    for (const auto& f : files) {
        for (const auto& line : f.lines) {
            for_each_token(line.content, [&](std::string_view tok) {
                auto it = freq.find(tok);
                if (it == freq.end()) freq.emplace(std::string{tok}, 1);
                else ++it->second;
            });
        }
    }
    std::vector<std::pair<std::string, std::uint64_t>> kept;
    kept.reserve(freq.size());
    for (auto& [tok, n] : freq) {
        if (n >= 2) kept.emplace_back(tok, n);
    }
    if (kept.empty())
        throw ModelError("degenerate corpus: every token occurs only once, vocabulary is empty");
    std::sort(kept.begin(), kept.end());

    Vocabulary v;
    v.tokens_.reserve(kept.size());
    v.counts_.reserve(kept.size());
    for (auto& [tok, n] : kept) {
        v.tokens_.push_back(std::move(tok));
        v.counts_.push_back(n);
    }
    v.reindex();
    return v;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens, std::vector<std::uint64_t> counts) {
    if (!counts.empty() && counts.size() != tokens.size())
        throw ModelError("vocabulary counts do not match token list");
    Vocabulary v;
    v.tokens_ = std::move(tokens);
    v.counts_ = std::move(counts);
    v.reindex();
    if (v.index_.size() != v.tokens_.size()) throw ModelError("vocabulary contains duplicate tokens");
    return v;
}

void Vocabulary::reindex() {
    index_.clear();
    index_.reserve(tokens_.size());
    std::uint64_t h = fnv1a("linedp-vocab");
    for (std::uint32_t i = 0; i < tokens_.size(); ++i) {
        index_.emplace(tokens_[i], i);
        h = fnv1a(tokens_[i], h);
        h = fnv1a(std::string_view{"\0", 1}, h);
    }
    fingerprint_ = h;
}

std::optional<std::uint32_t> Vocabulary::index_of(std::string_view token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

// ---------------------------------------------------------------------------
// Feature vectors

std::uint64_t FeatureVector::total_count() const noexcept {
    std::uint64_t t = 0;
    for (const auto& e : entries) t += e.second;
    return t;
}

std::uint32_t FeatureVector::count(std::uint32_t index) const noexcept {
    auto it = std::lower_bound(entries.begin(), entries.end(), index,
                               [](const auto& e, std::uint32_t i) { return e.first < i; });
    return (it != entries.end() && it->first == index) ? it->second : 0;
}

FeatureVector vectorize(const SourceFile& file, const Vocabulary& vocab) {
    std::vector<std::uint32_t> hits;
    for (const auto& line : file.lines) {
        for_each_token(line.content, [&](std::string_view tok) {
            if (auto idx = vocab.index_of(tok)) hits.push_back(*idx);
        });
    }
    std::sort(hits.begin(), hits.end());
    FeatureVector fv;
    fv.dimension = vocab.size();
    fv.vocab_fingerprint = vocab.fingerprint();
    for (std::size_t i = 0; i < hits.size();) {
        std::size_t j = i;
        while (j < hits.size() && hits[j] == hits[i]) ++j;
        fv.entries.emplace_back(hits[i], static_cast<std::uint32_t>(j - i));
        i = j;
    }
    return fv;
}

// ---------------------------------------------------------------------------
// Canonical CSV

namespace {

constexpr std::string_view kDatasetColumns[] = {"release",      "file_path",  "line_number",
                                                "line_content", "file_label", "line_label"};

bool parse_bool(std::string_view s, const std::string& where) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw DataError(where + ": expected true/false, got '" + std::string{s} + "'");
}

int parse_line_number(std::string_view s, const std::string& where) {
    int n = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec != std::errc{} || p != s.data() + s.size() || n < 1)
        throw DataError(where + ": line_number must be a positive integer, got '" + std::string{s} + "'");
    return n;
}

struct PendingFile {
    bool file_label = false;
    std::size_t first_row = 0;
    std::vector<LineRecord> lines;
};

}  // namespace

std::vector<ReleaseDataset> read_dataset(std::istream& in, std::string_view source_name) {
    csv::Reader reader(in);
    const std::string src{source_name};
    std::optional<csv::Row> header_row;
    try {
        header_row = reader.next();
    } catch (const std::runtime_error& e) {
        throw DataError(src + ": " + e.what());
    }
    if (!header_row) throw DataError(src + ": empty file (missing header)");
    std::optional<csv::Header> header;
    try {
        header.emplace(*header_row, kDatasetColumns);
    } catch (const std::runtime_error& e) {
        throw DataError(src + ": " + e.what());
    }
    const auto c_release = (*header)["release"], c_path = (*header)["file_path"],
               c_line = (*header)["line_number"], c_content = (*header)["line_content"],
               c_flabel = (*header)["file_label"], c_llabel = (*header)["line_label"];
    const std::size_t width = header_row->size();

    std::vector<std::string> release_order;
    std::map<std::string, std::map<std::string, PendingFile>> pending;
    std::size_t rows = 0;
    for (;;) {
        std::optional<csv::Row> row;
        try {
            row = reader.next();
        } catch (const std::runtime_error& e) {
            throw DataError(src + ": " + e.what());
        }
        if (!row) break;
        const std::string where = src + ":" + std::to_string(reader.record_line());
        if (row->size() == 1 && row->front().empty()) continue;  // blank trailing line
        if (row->size() != width)
            throw DataError(where + ": expected " + std::to_string(width) + " fields, got " +
                            std::to_string(row->size()));
        ++rows;
        const auto& release = (*row)[c_release];
        const auto& path = (*row)[c_path];
        if (release.empty()) throw DataError(where + ": empty release id");
        if (path.empty()) throw DataError(where + ": empty file_path");
        const int number = parse_line_number((*row)[c_line], where);
        const bool flabel = parse_bool((*row)[c_flabel], where);
        const bool llabel = parse_bool((*row)[c_llabel], where);

        auto [rit, new_release] = pending.try_emplace(release);
        if (new_release) release_order.push_back(release);
        auto [fit, new_file] = rit->second.try_emplace(path);
        PendingFile& pf = fit->second;
        if (new_file) {
            pf.file_label = flabel;
            pf.first_row = reader.record_line();
        } else if (pf.file_label != flabel) {
            throw DataError(where + ": file_label of " + release + "/" + path +
                            " differs from its earlier rows");
        }
        pf.lines.push_back(LineRecord{number, (*row)[c_content], llabel});
    }
    if (rows == 0) throw DataError(src + ": no data rows");

    std::vector<ReleaseDataset> out;
    out.reserve(release_order.size());
    for (const auto& release : release_order) {
        ReleaseDataset ds;
        ds.release_id = release;
        ds.system = default_system_of(release);
        for (auto& [path, pf] : pending[release]) {
            const std::string where = src + ":" + std::to_string(pf.first_row) + " (" + release + "/" + path + ")";
            std::stable_sort(pf.lines.begin(), pf.lines.end(),
                             [](const LineRecord& a, const LineRecord& b) { return a.number < b.number; });
            bool any_defective = false;
            for (std::size_t i = 0; i < pf.lines.size(); ++i) {
                if (pf.lines[i].number != static_cast<int>(i + 1)) {
                    throw DataError(where + ": line numbers are not contiguous from 1 (expected " +
                                    std::to_string(i + 1) + ", found " +
                                    std::to_string(pf.lines[i].number) + ")");
                }
                any_defective = any_defective || pf.lines[i].is_defective;
            }
            if (any_defective != pf.file_label) {
                throw DataError(where + ": file_label=" + (pf.file_label ? "true" : "false") +
                                " is inconsistent with its line labels");
            }
            ds.files.push_back(SourceFile{release, path, std::move(pf.lines), pf.file_label});
        }
        out.push_back(std::move(ds));
    }
    return out;
}

std::vector<ReleaseDataset> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
    return read_dataset(in, path.string());
}

void write_dataset(std::ostream& out, std::span<const ReleaseDataset> releases) {
    csv::write_row(out, {"release", "file_path", "line_number", "line_content", "file_label", "line_label"});
    for (const auto& rel : releases) {
        std::vector<const SourceFile*> files;
        for (const auto& f : rel.files) files.push_back(&f);
        std::sort(files.begin(), files.end(),
                  [](const SourceFile* a, const SourceFile* b) { return a->path < b->path; });
        for (const SourceFile* f : files) {
            std::vector<const LineRecord*> lines;
            for (const auto& l : f->lines) lines.push_back(&l);
            std::stable_sort(lines.begin(), lines.end(),
                             [](const LineRecord* a, const LineRecord* b) { return a->number < b->number; });
            const std::string_view flabel = f->file_label ? "true" : "false";
            for (const LineRecord* l : lines) {
                const std::string num = std::to_string(l->number);
                csv::write_row(out, {rel.release_id, f->path, num, l->content, flabel,
                                     l->is_defective ? "true" : "false"});
            }
        }
    }
}

void save_dataset(const std::filesystem::path& path, std::span<const ReleaseDataset> releases) {
    write_atomically(path, [&](std::ostream& out) { write_dataset(out, releases); });
}

// ---------------------------------------------------------------------------
// Release metadata

std::vector<ReleaseMetadata> read_release_metadata(std::istream& in, std::string_view source_name) {
    csv::Reader reader(in);
    const std::string src{source_name};
    auto header_row = reader.next();
    if (!header_row) throw DataError(src + ": empty metadata file");
    constexpr std::string_view required[] = {"release", "release_date"};
    std::optional<csv::Header> header;
    try {
        header.emplace(*header_row, required);
    } catch (const std::runtime_error& e) {
        throw DataError(src + ": " + e.what());
    }
    const auto c_rel = (*header)["release"], c_date = (*header)["release_date"];
    const bool has_system = header->has("system");
    const auto c_sys = has_system ? (*header)["system"] : 0;

    std::vector<ReleaseMetadata> out;
    while (auto row = reader.next()) {
        if (row->size() == 1 && row->front().empty()) continue;
        const std::string where = src + ":" + std::to_string(reader.record_line());
        if (row->size() != header_row->size()) throw DataError(where + ": wrong number of fields");
        ReleaseMetadata m;
        m.release_id = (*row)[c_rel];
        try {
            m.release_date = parse_date((*row)[c_date]);
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
        if (has_system) m.system = (*row)[c_sys];
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<ReleaseMetadata> load_release_metadata(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open release metadata '" + path.string() + "'");
    return read_release_metadata(in, path.string());
}

std::string default_system_of(std::string_view release_id) {
    const auto dash = release_id.rfind('-');
    return dash == std::string_view::npos ? std::string{} : std::string{release_id.substr(0, dash)};
}

void apply_release_metadata(std::vector<ReleaseDataset>& releases,
                            std::span<const ReleaseMetadata> metadata) {
    for (auto& rel : releases) {
        auto it = std::find_if(metadata.begin(), metadata.end(),
                               [&](const ReleaseMetadata& m) { return m.release_id == rel.release_id; });
        if (it == metadata.end()) continue;
        rel.release_date = it->release_date;
        rel.system = it->system.empty() ? default_system_of(rel.release_id) : it->system;
    }
}

double defect_density(const SourceFile& file) {
    if (file.lines.empty())
        throw DataError("defect density undefined for empty file '" + file.path + "'");
    return static_cast<double>(file.defective_line_count()) / static_cast<double>(file.lines.size());
}

// ---------------------------------------------------------------------------
// Published dataset layout

ReleaseDataset import_published_release(std::istream& file_level, std::istream& line_level,
                                        std::string release_id, PublishedImportStats* stats) {
    PublishedImportStats local;
    PublishedImportStats& st = stats ? *stats : local;
    st = {};

    ReleaseDataset ds;
    ds.release_id = std::move(release_id);
    ds.system = default_system_of(ds.release_id);
    std::map<std::string, std::size_t> by_path;
    std::vector<bool> bug_column;

    {
        csv::Reader reader(file_level);
        auto header_row = reader.next();
        if (!header_row) throw DataError("file-level CSV is empty");
        constexpr std::string_view required[] = {"File", "Bug", "SRC"};
        std::optional<csv::Header> header;
        try {
            header.emplace(*header_row, required);
        } catch (const std::runtime_error& e) {
            throw DataError(std::string{"file-level CSV: "} + e.what());
        }
        const auto c_file = (*header)["File"], c_bug = (*header)["Bug"], c_src = (*header)["SRC"];
        while (auto row = reader.next()) {
            if (row->size() == 1 && row->front().empty()) continue;
            if (row->size() != header_row->size())
                throw DataError("file-level CSV:" + std::to_string(reader.record_line()) +
                                ": wrong number of fields");
            SourceFile f;
            f.release_id = ds.release_id;
            f.path = (*row)[c_file];
            const std::string& src = (*row)[c_src];
            std::istringstream body(src);
            std::string content;
            int number = 1;
            while (std::getline(body, content)) {
                if (!content.empty() && content.back() == '\r') content.pop_back();
                f.lines.push_back(LineRecord{number++, std::move(content), false});
            }
            const std::string& bug = (*row)[c_bug];
            if (by_path.contains(f.path))
                throw DataError("file-level CSV: duplicate path '" + f.path + "'");
            by_path.emplace(f.path, ds.files.size());
            bug_column.push_back(bug == "True" || bug == "true" || bug == "1");
            ds.files.push_back(std::move(f));
        }
    }
    {
        csv::Reader reader(line_level);
        auto header_row = reader.next();
        if (!header_row) throw DataError("line-level CSV is empty");
        constexpr std::string_view required[] = {"File", "Line_number"};
        std::optional<csv::Header> header;
        try {
            header.emplace(*header_row, required);
        } catch (const std::runtime_error& e) {
            throw DataError(std::string{"line-level CSV: "} + e.what());
        }
        const auto c_file = (*header)["File"], c_num = (*header)["Line_number"];
        while (auto row = reader.next()) {
            if (row->size() == 1 && row->front().empty()) continue;
            if (row->size() != header_row->size()) {
                ++st.unmatched_line_rows;
                continue;
            }
            auto it = by_path.find((*row)[c_file]);
            int number = 0;
            const auto& s = (*row)[c_num];
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), number);
            if (it == by_path.end() || ec != std::errc{} || number < 1) {
                ++st.unmatched_line_rows;
                continue;
            }
            auto& file = ds.files[it->second];
            if (static_cast<std::size_t>(number) > file.lines.size()) {
                ++st.unmatched_line_rows;
                continue;
            }
            file.lines[number - 1].is_defective = true;
        }
    }
    for (std::size_t i = 0; i < ds.files.size(); ++i) {
        auto& f = ds.files[i];
        const auto n = f.defective_line_count();
        f.file_label = n > 0;
        st.defective_lines += n;
        if (f.file_label != bug_column[i]) ++st.label_disagreements;
    }
    std::sort(ds.files.begin(), ds.files.end(),
              [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; });
    st.files = ds.files.size();
    if (ds.files.empty()) throw DataError("file-level CSV has no files");
    return ds;
}

}  // namespace linedp

#include <algorithm>
#include <cmath>
#include <numeric>

#include "linedp/eval.hpp"

namespace linedp {

std::optional<double> recall(const ConfusionCounts& c) {
    if (c.tp + c.fn == 0) return std::nullopt;
    return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

std::optional<double> false_alarm_rate(const ConfusionCounts& c) {
    if (c.fp + c.tn == 0) return std::nullopt;
    return static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
}

double d2h(double recall, double far) {
    const double miss = 1.0 - recall;
    return std::sqrt((miss * miss + far * far) / 2.0);
}

double mcc(const ConfusionCounts& c) {
    const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
    const double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
    const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (denom == 0.0) return 0.0;
    return (tp * tn - fp * fn) / std::sqrt(denom);
}

// ---------------------------------------------------------------------------

namespace {
std::string file_key(std::string_view release, std::string_view path) {
    std::string k;
    k.reserve(release.size() + path.size() + 1);
    k.append(release);
    k.push_back('\0');
    k.append(path);
    return k;
}
}  // namespace

LineUniverse::LineUniverse(std::span<const SourceFile> test_files, std::span<const double> file_probabilities) {
    files_.reserve(test_files.size());
    for (std::size_t f = 0; f < test_files.size(); ++f) {
        const SourceFile& src = test_files[f];
        const double p = f < file_probabilities.size() ? file_probabilities[f] : 0.0;
        files_.push_back(FileInfo{src.release_id, src.path, p, lines_.size(), src.lines.size()});
        file_index_.emplace(file_key(src.release_id, src.path), static_cast<std::uint32_t>(f));
        for (const auto& l : src.lines) {
            lines_.push_back(Line{static_cast<std::uint32_t>(f), l.number, l.is_defective});
            defective_ += l.is_defective ? 1 : 0;
        }
    }
    padding_.resize(lines_.size());
    std::iota(padding_.begin(), padding_.end(), std::size_t{0});
    std::sort(padding_.begin(), padding_.end(), [&](std::size_t a, std::size_t b) {
        const auto& fa = files_[lines_[a].file];
        const auto& fb = files_[lines_[b].file];
        if (fa.probability != fb.probability) return fa.probability > fb.probability;
        if (fa.path != fb.path) return fa.path < fb.path;
        if (fa.release != fb.release) return fa.release < fb.release;
        return lines_[a].number < lines_[b].number;
    });
}

std::optional<std::size_t> LineUniverse::line_index(std::string_view release, std::string_view path,
                                                    int line) const {
    auto it = file_index_.find(file_key(release, path));
    if (it == file_index_.end()) return std::nullopt;
    const FileInfo& f = files_[it->second];
    if (line < 1 || static_cast<std::size_t>(line) > f.line_count) return std::nullopt;
    const std::size_t idx = f.first_line + static_cast<std::size_t>(line - 1);
    // Files loaded through the corpus module are numbered 1..N in order.
    if (lines_[idx].number != line) {
        for (std::size_t i = f.first_line; i < f.first_line + f.line_count; ++i) {
            if (lines_[i].number == line) return i;
        }
        return std::nullopt;
    }
    return idx;
}

std::optional<bool> LineUniverse::is_defective(std::string_view release, std::string_view path, int line) const {
    auto idx = line_index(release, path, line);
    if (!idx) return std::nullopt;
    return lines_[*idx].defective;
}

ConfusionCounts confusion(const LineUniverse& universe, std::span<const RankedLine> flagged) {
    std::vector<char> predicted(universe.total_lines(), 0);
    for (const auto& r : flagged) {
        if (auto idx = universe.line_index(r.release_id, r.file_path, r.line_number)) predicted[*idx] = 1;
    }
    ConfusionCounts c;
    const auto lines = universe.lines();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const bool p = predicted[i] != 0;
        if (lines[i].defective) (p ? c.tp : c.fn)++;
        else (p ? c.fp : c.tn)++;
    }
    return c;
}

std::optional<double> recall_at_top_kloc(std::span<const RankedLine> ranked, const LineUniverse& universe,
                                         double k_pct) {
    if (universe.defective_lines() == 0) return std::nullopt;
    const double raw = k_pct * static_cast<double>(universe.total_lines()) / 100.0;
    const std::size_t budget = static_cast<std::size_t>(std::floor(raw + 1e-9));
    std::vector<char> seen(universe.total_lines(), 0);
    const auto lines = universe.lines();
    std::size_t inspected = 0, found = 0;
    for (const auto& r : ranked) {
        if (inspected >= budget) break;
        auto idx = universe.line_index(r.release_id, r.file_path, r.line_number);
        if (!idx || seen[*idx]) continue;
        seen[*idx] = 1;
        ++inspected;
        found += lines[*idx].defective ? 1 : 0;
    }
    for (std::size_t idx : universe.padding_order()) {
        if (inspected >= budget) break;
        if (seen[idx]) continue;
        seen[idx] = 1;
        ++inspected;
        found += lines[idx].defective ? 1 : 0;
    }
    return static_cast<double>(found) / static_cast<double>(universe.defective_lines());
}

std::optional<IfaResult> initial_false_alarm(std::span<const RankedLine> ranked, const LineUniverse& universe) {
    if (ranked.empty()) return std::nullopt;
    IfaResult r;
    for (const auto& line : ranked) {
        if (universe.is_defective(line.release_id, line.file_path, line.line_number).value_or(false)) return r;
        ++r.count;
    }
    r.saturated = true;
    return r;
}

MetricsReport evaluate_ranking(const LineUniverse& universe, std::span<const RankedLine> ranked) {
    MetricsReport m;
    m.counts = confusion(universe, ranked);
    m.recall = recall(m.counts);
    m.far = false_alarm_rate(m.counts);
    if (m.recall && m.far) m.d2h = d2h(*m.recall, *m.far);
    m.mcc = mcc(m.counts);
    m.recall_top20loc = recall_at_top_kloc(ranked, universe, 20.0);
    m.ifa = initial_false_alarm(ranked, universe);
    return m;
}

}  // namespace linedp

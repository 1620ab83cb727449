#pragma once

// Line-level evaluation measures, validation splits and paired statistics.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "linedp/corpus.hpp"
#include "linedp/ranking.hpp"

namespace linedp {

struct ConfusionCounts {
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
    bool operator==(const ConfusionCounts&) const = default;
};

// Missing (std::nullopt) when there are no actual defective lines.
std::optional<double> recall(const ConfusionCounts& c);
// Missing when there are no actual clean lines.
std::optional<double> false_alarm_rate(const ConfusionCounts& c);
inline std::optional<double> far(const ConfusionCounts& c) { return false_alarm_rate(c); }
// sqrt(((1 - recall)^2 + far^2) / 2)
double d2h(double recall, double far);
// 0 when any marginal is empty.
double mcc(const ConfusionCounts& c);

// Every line of every test file, with its truth label and the file-level
// probability used to order unranked lines when padding an effort budget.
class LineUniverse {
public:
    LineUniverse(std::span<const SourceFile> test_files, std::span<const double> file_probabilities);

    std::size_t total_lines() const noexcept { return lines_.size(); }
    std::size_t defective_lines() const noexcept { return defective_; }
    // nullopt if the line is not part of the universe.
    std::optional<bool> is_defective(std::string_view release, std::string_view path, int line) const;

    struct Line {
        std::uint32_t file;
        int number;
        bool defective;
    };
    std::span<const Line> lines() const noexcept { return lines_; }
    // Indices into lines(), ordered by (file probability desc, path, line).
    std::span<const std::size_t> padding_order() const noexcept { return padding_; }
    std::optional<std::size_t> line_index(std::string_view release, std::string_view path, int line) const;

private:
    struct FileInfo {
        std::string release;
        std::string path;
        double probability;
        std::size_t first_line;
        std::size_t line_count;
    };
    std::vector<FileInfo> files_;
    std::vector<Line> lines_;
    std::vector<std::size_t> padding_;
    std::unordered_map<std::string, std::uint32_t> file_index_;
    std::size_t defective_ = 0;
};

// Flagged = every line present in `flagged`; everything else in the universe
// counts as predicted clean.  Lines outside the universe are ignored.
ConfusionCounts confusion(const LineUniverse& universe, std::span<const RankedLine> flagged);

// Fraction of all defective lines found within the first
// floor(k_pct/100 * total_lines) lines inspected: the ranking first, then
// unranked lines in padding order.  Missing when there are no defective lines.
std::optional<double> recall_at_top_kloc(std::span<const RankedLine> ranked, const LineUniverse& universe,
                                         double k_pct = 20.0);

struct IfaResult {
    std::size_t count = 0;
    bool saturated = false;  // no defective line in the ranking; count = ranking length
};
// Clean lines ranked before the first defective one.  Missing for an empty ranking.
std::optional<IfaResult> initial_false_alarm(std::span<const RankedLine> ranked, const LineUniverse& universe);

struct MetricsReport {
    std::string setting;
    std::string method;
    std::string unit_id;
    std::optional<double> recall;
    std::optional<double> far;
    std::optional<double> d2h;
    double mcc = 0.0;
    std::optional<double> recall_top20loc;
    std::optional<IfaResult> ifa;
    ConfusionCounts counts;
};

MetricsReport evaluate_ranking(const LineUniverse& universe, std::span<const RankedLine> ranked);

// ---------------------------------------------------------------------------
// Validation splits

struct FoldSplit {
    int repeat = 0;
    int fold = 0;
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Stratified repeated k-fold over item labels.  Throws DataError when a class
// has fewer than `folds` members or folds < 2.
std::vector<FoldSplit> stratified_kfold(const std::vector<bool>& labels, int folds, int repeats,
                                        std::uint64_t seed);

// (train index, test index) for each consecutive release pair of a system,
// releases ordered by release date (input order when no release of the
// system carries a date).  Throws DataError when dates are partially missing.
std::vector<std::pair<std::size_t, std::size_t>> cross_release_pairs(std::span<const ReleaseDataset> releases);

// ---------------------------------------------------------------------------
// Paired comparison

// 100 * sum(ours - base) / sum(base).  Missing when sum(base) == 0; throws
// std::invalid_argument on a length mismatch.
std::optional<double> performance_diff(std::span<const double> ours, std::span<const double> base);

enum class Alternative { greater, less };
enum class EffectMagnitude { negligible, small, medium, large };

std::string_view magnitude_name(EffectMagnitude m);
EffectMagnitude effect_magnitude(double r);

struct StatTestResult {
    double p_value = 1.0;
    double z_score = 0.0;
    double effect_r = 0.0;
    EffectMagnitude magnitude = EffectMagnitude::negligible;
    std::size_t n = 0;  // pairs with a non-zero difference
    bool exact = false;
};

// One-sided Wilcoxon signed-rank test of a against b (alternative: a > b or
// a < b).  Zero differences are dropped, ties get average ranks.  Exact null
// distribution for n <= 15, tie-corrected normal approximation above.
// Missing when every difference is zero.
std::optional<StatTestResult> wilcoxon_one_sided(std::span<const double> a, std::span<const double> b,
                                                 Alternative alternative);

}  // namespace linedp

#pragma once

// Within-release and cross-release experiment harness and its CSV reports.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linedp/config.hpp"
#include "linedp/corpus.hpp"
#include "linedp/eval.hpp"
#include "linedp/ranking.hpp"

namespace linedp {

enum class Setting { within, cross };
std::string_view setting_name(Setting s);
Setting parse_setting(std::string_view text);  // throws std::invalid_argument

inline const std::vector<std::string> kAllMethods{"linedp", "random", "tmi_lr", "ngram"};
// Comma-separated subset of kAllMethods; "all" expands to every method.
std::vector<std::string> parse_methods(std::string_view text);

// One evaluation unit: a fold of one release or a cross-release pair.
struct EvaluationUnit {
    std::string unit_id;  // "<release>#r<repeat>f<fold>" or "<train>-><test>"
    std::string group;    // release (within) or unit id (cross); statistics pair on groups
    std::vector<const SourceFile*> train;
    std::vector<const SourceFile*> test;
};

std::vector<EvaluationUnit> within_release_units(std::span<const ReleaseDataset> releases, int folds, int repeats,
                                                 std::uint64_t seed);
std::vector<EvaluationUnit> cross_release_units(std::span<const ReleaseDataset> releases);

struct UnitRun {
    std::vector<double> probabilities;            // file-level, parallel to unit.test
    std::vector<std::vector<RankedLine>> rankings;  // in `methods` order
};

// Trains the file-level model once and ranks the test lines with every method.
UnitRun run_methods(const EvaluationUnit& unit, std::span<const std::string> methods,
                                                 Setting setting, const RunConfig& config);

struct StatRow {
    std::string setting;
    std::string metric;
    std::string baseline;
    std::optional<double> pct_diff;
    std::optional<StatTestResult> test;
};

struct ExperimentReport {
    std::vector<MetricsReport> metrics;  // one row per method per unit
    std::vector<StatRow> stats;          // LINE-DP against each other method
};

ExperimentReport run_experiment(std::span<const ReleaseDataset> releases, Setting setting,
                                std::span<const std::string> methods, const RunConfig& config);

// Per-group means of each method's metric values, paired across methods and
// compared with LINE-DP.  Empty when "linedp" is not among the methods.
std::vector<StatRow> compare_methods(std::span<const MetricsReport> metrics, std::span<const EvaluationUnit> units,
                                     std::string_view setting);

void write_metrics_csv(std::ostream& out, std::span<const MetricsReport> rows);
void write_stats_csv(std::ostream& out, std::span<const StatRow> rows);
// release,file_path,line_number,hit_count,score_sum,file_probability,global_rank[,method]
void write_ranking_csv(std::ostream& out, std::span<const RankedLine> ranking, std::string_view method = {});

}  // namespace linedp

#pragma once

// Risky-token selection, defect-prone line flagging and global line ranking,
// plus the end-to-end pipeline built on the file-level model and LIME.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "linedp/corpus.hpp"
#include "linedp/eval.hpp"
#include "linedp/explain.hpp"
#include "linedp/model.hpp"
#include "linedp/ranking.hpp"

namespace linedp {

inline constexpr double kDefectiveThreshold = 0.5;

struct RiskyTokenSet {
    // Strictly positive scores, descending; ties in lexicographic token order.
    std::vector<std::pair<std::string, double>> tokens;

    bool empty() const noexcept { return tokens.empty(); }
    std::size_t size() const noexcept { return tokens.size(); }
    std::optional<double> score_of(std::string_view token) const;
};

RiskyTokenSet select_risky_tokens(const std::map<std::string, double>& scores, std::size_t k_risky = 20);
inline RiskyTokenSet select_risky_tokens(const Explanation& e, std::size_t k_risky = 20) {
    return select_risky_tokens(e.scores, k_risky);
}

struct FlaggedLine {
    std::string release_id;
    std::string file_path;
    int line_number = 0;
    std::size_t hit_count = 0;
    double score_sum = 0.0;
    double file_probability = 0.0;
};

// A line is flagged when it contains at least one risky token; hit_count is
// the number of distinct risky tokens on it.
std::vector<FlaggedLine> flag_lines(const SourceFile& file, const RiskyTokenSet& risky,
                                    double file_probability = 0.0);

// Sort by hit_count desc, score_sum desc, file_probability desc, then
// (file_path, line_number) asc, and number the result from 1.
std::vector<RankedLine> rank_lines_global(std::vector<FlaggedLine> flagged);

// ---------------------------------------------------------------------------
// Pipeline

struct FileLevelModel {
    Vocabulary vocabulary;
    LogisticModel model;
};

FileLevelModel train_file_model(std::span<const SourceFile> train, const TrainConfig& config = {});

// Defect probability per test file.
std::vector<double> predict_files(const FileLevelModel& fm, std::span<const SourceFile> files);

struct LineDpParams {
    std::size_t k_risky = 20;
    LimeConfig lime;  // lime.seed is ignored; per-file seeds derive from run_seed
    std::uint64_t run_seed = 0;
    TrainConfig train;
    std::size_t workers = 0;  // 0 = all cores
};

struct FileResult {
    std::string release_id;
    std::string path;
    double probability = 0.0;
    std::optional<Explanation> explanation;  // only for predicted-defective files
};

struct LineDpResult {
    std::vector<RankedLine> ranking;
    std::vector<FileResult> files;  // parallel to the test input

    std::vector<double> probabilities() const;
};

// LIME explanations for every test file with probability > 0.5 that has at
// least one in-vocabulary token.  Results are independent of `workers`.
std::vector<std::optional<Explanation>> explain_files(const FileLevelModel& fm, std::span<const SourceFile> files,
                                                      std::span<const double> probabilities,
                                                      const LineDpParams& params);

// Flags and ranks lines of predicted-defective files from their explanations.
std::vector<RankedLine> rank_from_explanations(std::span<const SourceFile> files,
                                               std::span<const double> probabilities,
                                               std::span<const std::optional<Explanation>> explanations,
                                               std::size_t k_risky);

LineDpResult run_linedp(const FileLevelModel& fm, std::span<const SourceFile> test, const LineDpParams& params);
LineDpResult run_linedp(std::span<const SourceFile> train, std::span<const SourceFile> test,
                        const LineDpParams& params);

struct SensitivityRow {
    double value = 0.0;  // k or threshold
    MetricsReport metrics;
};

inline const std::vector<std::size_t> kDefaultKGrid{10, 20, 30, 40, 50, 100, 150, 200};

// Evaluates LINE-DP at each k on one train/test split.  Explanations are
// computed once with k_features >= max(k_grid), so risky sets are nested.
std::vector<SensitivityRow> sensitivity_k(std::span<const SourceFile> train, std::span<const SourceFile> test,
                                          std::span<const std::size_t> k_grid, const LineDpParams& params);

}  // namespace linedp

#pragma once

// Line-ranking baselines: random guessing, TMI-LR (one global risky-token set
// from standardised logistic coefficients) and n-gram entropy.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "linedp/corpus.hpp"
#include "linedp/linedp.hpp"
#include "linedp/ranking.hpp"

namespace linedp {

// Random guessing over the same predicted-defective files as LINE-DP: every
// distinct token of a file scores U[-1, 1], the top-k positive ones are
// risky, and flagged lines are returned in a uniformly random order.
std::vector<RankedLine> random_baseline(std::span<const SourceFile> test, std::span<const double> probabilities,
                                        std::size_t k_risky, std::uint64_t seed);

// Top-k tokens by positive standardised coefficient.
RiskyTokenSet tmi_lr_risky_tokens(const Vocabulary& vocab, std::span<const double> coefficients,
                                  std::size_t k_risky = 20);

struct TmiLrResult {
    RiskyTokenSet risky;  // shared by every test file
    std::vector<RankedLine> ranking;
};

// Flags lines of predicted-defective test files with one global risky set and
// ranks them like LINE-DP.
TmiLrResult tmi_lr_baseline(const FileLevelModel& fm, std::span<const SourceFile> train,
                            std::span<const SourceFile> test, std::span<const double> probabilities,
                            std::size_t k_risky = 20);

// ---------------------------------------------------------------------------
// n-gram naturalness

struct NgramConfig {
    int order = 6;
    double jm_lambda = 0.7;     // weight of each order's ML estimate over the lower-order mix
    double cache_weight = 0.5;  // mix of the per-file cache once it has seen the context
};

namespace detail {
struct NgramContext {
    std::uint64_t total = 0;
    std::unordered_map<std::uint32_t, std::uint32_t> next;
};
// Index o-1 holds the order-o counts keyed by the packed (o-1)-id context.
using NgramTables = std::vector<std::unordered_map<std::string, NgramContext>>;
}  // namespace detail

class NgramModel {
public:
    using TokenId = std::uint32_t;
    static constexpr TokenId kUnknown = 0;
    static constexpr TokenId kBegin = 1;  // file-start padding, never predicted
    static constexpr TokenId kEndOfLine = 2;

    // Trains on one stream per file: (order-1) begin markers, then each line's
    // tokens followed by an end-of-line marker.
    static NgramModel train(std::span<const SourceFile> files, const NgramConfig& config = {});

    // Counts n-grams seen earlier in the file being scored.
    class Cache {
    public:
        explicit Cache(int order) : tables_(static_cast<std::size_t>(order)) {}
        void observe(std::span<const TokenId> history, TokenId token);

    private:
        friend class NgramModel;
        detail::NgramTables tables_;
    };

    TokenId id_of(std::string_view token) const;
    // Number of predictable symbols: known tokens, end-of-line and unknown.
    std::size_t outcome_count() const noexcept { return names_.size() - 1; }
    std::vector<TokenId> outcomes() const;
    const NgramConfig& config() const noexcept { return config_; }

    // P(token | history) with the last (order-1) ids of `history` as context.
    double probability(std::span<const TokenId> history, TokenId token, const Cache* cache = nullptr) const;

    // Mean surprisal (bits) per line of `file`, in line order; std::nullopt
    // for lines without tokens.
    std::vector<std::optional<double>> line_entropies(const SourceFile& file) const;

private:
    NgramConfig config_;
    std::vector<std::string> names_;
    std::unordered_map<std::string, TokenId, StringHash, std::equal_to<>> ids_;
    detail::NgramTables tables_;

    double interpolate(const detail::NgramTables& tables, std::span<const TokenId> history, TokenId token) const;
    std::vector<TokenId> encode(const SourceFile& file, std::vector<std::size_t>* line_starts) const;
};

struct LineEntropy {
    std::size_t file = 0;  // index into the test span
    int line_number = 0;
    double entropy = 0.0;
};

// Mean surprisal of every non-empty line of every test file.
std::vector<LineEntropy> score_line_entropies(const NgramModel& model, std::span<const SourceFile> test,
                                              std::size_t workers = 0);

// Lines with entropy > threshold, ranked by entropy descending (ties by path,
// line).  file_probability is copied from `probabilities` when given.
std::vector<RankedLine> rank_by_entropy(std::span<const LineEntropy> scores, std::span<const SourceFile> test,
                                        double threshold, std::span<const double> probabilities = {});

std::vector<RankedLine> ngram_entropy_baseline(std::span<const SourceFile> train, std::span<const SourceFile> test,
                                               double threshold, const NgramConfig& config = {},
                                               std::span<const double> probabilities = {});

inline constexpr double kEntropyThresholdWithin = 0.7;
inline constexpr double kEntropyThresholdCross = 0.6;

// 0.1, 0.2, ..., 2.0
std::vector<double> default_entropy_grid();

}  // namespace linedp

#pragma once

// LIME for one file's prediction.  The interpretable representation is the
// presence/absence of each distinct in-vocabulary token of the file; a
// neighbour with a token switched off has that token's count zeroed.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "linedp/corpus.hpp"
#include "linedp/model.hpp"

namespace linedp {

struct LimeConfig {
    std::size_t samples = 5000;
    std::size_t k_features = 100;
    double kernel_width = 25.0;
    std::uint64_t seed = 0;
};

struct NeighborSample {
    std::vector<bool> active_mask;  // over the explained file's distinct tokens, in index order
    FeatureVector perturbed_vector;
    double predicted = 0.0;
    double weight = 0.0;
};

// Binary masks for n neighbours over D features, stored column-major so each
// feature's column is contiguous.  Row 0 is the unperturbed original.
class NeighborDesign {
public:
    NeighborDesign(std::size_t samples, std::size_t features)
        : samples_(samples), features_(features), cells_(samples * features, 0.0) {}

    std::size_t samples() const noexcept { return samples_; }
    std::size_t features() const noexcept { return features_; }
    std::span<double> column(std::size_t j) { return {cells_.data() + j * samples_, samples_}; }
    std::span<const double> column(std::size_t j) const { return {cells_.data() + j * samples_, samples_}; }
    bool active(std::size_t i, std::size_t j) const { return cells_[j * samples_ + i] != 0.0; }
    void set(std::size_t i, std::size_t j, bool on) { cells_[j * samples_ + i] = on ? 1.0 : 0.0; }
    std::size_t active_count(std::size_t i) const;

private:
    std::size_t samples_;
    std::size_t features_;
    std::vector<double> cells_;
};

// Each neighbour after the first switches off a uniformly drawn number m of
// features, m in {1..D-1} (m = 0 when D = 1), chosen as a uniform subset.
NeighborDesign sample_neighbor_masks(std::size_t features, std::size_t samples, std::uint64_t seed);

// Throws ModelError if x has no active tokens or n == 0.
std::vector<NeighborSample> generate_neighbors(const FeatureVector& x, std::size_t n, std::uint64_t seed);

// exp(-d^2 / width^2) with d the cosine distance between the masks.  An
// all-false sample mask is at distance 1.
double kernel_weight(const std::vector<bool>& original_mask, const std::vector<bool>& sample_mask,
                     double width);
// Same kernel for an all-true original of D features and a sample with
// `active` of them on.
double kernel_weight(std::size_t active, std::size_t features, double width);

struct SurrogateFit {
    // (feature position, refit coefficient), ordered by |coefficient| descending.
    std::vector<std::pair<std::size_t, double>> coefficients;
    double intercept = 0.0;
    double r_squared = 0.0;  // weighted, on the selected features
};

// Weighted K-Lasso: coordinate-descent Lasso down a 100-point geometric
// lambda grid (lambda_max .. 1e-4 lambda_max) until min(k, D) coefficients
// are non-zero, keep the k largest by magnitude, then refit them by weighted
// ridge least squares (lambda 1e-6) against the targets.
SurrogateFit k_lasso(const NeighborDesign& design, std::span<const double> targets,
                     std::span<const double> weights, std::size_t k);

// Convenience form over materialised neighbours; keys are feature positions.
std::map<std::size_t, double> k_lasso(std::span<const NeighborSample> samples, std::size_t k);

struct Explanation {
    std::map<std::string, double> scores;
    std::size_t sample_count = 0;
    std::size_t k_features = 0;
    std::uint64_t seed = 0;
    double local_fidelity = 0.0;  // weighted R^2 of the surrogate
};

Explanation explain(const LogisticModel& model, const FeatureVector& x, const Vocabulary& vocab,
                    const LimeConfig& config);

}  // namespace linedp

#pragma once

// File-level L2-regularised logistic regression over bag-of-tokens vectors.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "linedp/corpus.hpp"

namespace linedp {

struct TrainConfig {
    double l2_lambda = 1.0;  // penalty (lambda/2)*||w||^2 on the summed log-loss; bias unpenalised
    int max_iters = 1000;
    double tolerance = 1e-6;  // on the L2 norm of the objective gradient
    std::uint64_t seed = 0;
};

struct TrainStatus {
    int iterations = 0;
    bool converged = false;
    double gradient_norm = 0.0;
};

// Per-feature z-score statistics.  A zero std is treated as 1 when applied.
struct ScalerStats {
    std::vector<double> mean;
    std::vector<double> std;

    double scale(std::size_t j) const noexcept { return std[j] > 0.0 ? std[j] : 1.0; }
};

ScalerStats fit_scaler(std::span<const FeatureVector> X, std::size_t dimension);

struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;
    std::uint64_t vocab_fingerprint = 0;
    TrainConfig config;
    TrainStatus status;
    // Present for models fit on standardised features; applied by decision().
    std::optional<ScalerStats> scaler;

    std::size_t dimension() const noexcept { return weights.size(); }
    // w.x + b (on standardised x when a scaler is attached).
    double decision(const FeatureVector& x) const;
};

// Numerically stable logistic function clamped into the open interval (0, 1).
double sigmoid(double z) noexcept;

// Throws ModelError when |X| != |y|, |X| < 2, or only one class is present.
// A model that hit max_iters is returned with status.converged == false.
LogisticModel train_logistic(std::span<const FeatureVector> X, const std::vector<bool>& y,
                             const TrainConfig& config = {});

// Probability of the positive (defective) class.  Throws ModelError when the
// vector was built from a different vocabulary than the model.
double predict_proba(const LogisticModel& model, const FeatureVector& x);

// Logistic regression fit on z-scored features (statistics from X).  The
// returned model carries its scaler; its weights are the standardised
// coefficients, one per vocabulary index.
LogisticModel train_standardized(std::span<const FeatureVector> X, const std::vector<bool>& y,
                                 const TrainConfig& config = {});

inline std::vector<double> standardized_coefficients(std::span<const FeatureVector> X,
                                                     const std::vector<bool>& y,
                                                     const TrainConfig& config = {}) {
    return train_standardized(X, y, config).weights;
}

// The training objective, exposed for gradient checks.  Parameter layout is
// [w_0 .. w_{V-1}, bias].
class LogisticObjective {
public:
    LogisticObjective(std::span<const FeatureVector> X, const std::vector<bool>& y, double l2_lambda,
                      const ScalerStats* scaler = nullptr);

    std::size_t parameter_count() const noexcept { return dim_ + 1; }
    double value(std::span<const double> theta) const;
    double value_and_gradient(std::span<const double> theta, std::span<double> grad) const;

private:
    std::size_t dim_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::uint32_t> cols_;
    std::vector<double> vals_;
    std::vector<double> y_;
    double lambda_;
    std::vector<double> mean_;       // empty when unscaled
    std::vector<double> inv_scale_;  // empty when unscaled

    void margins(std::span<const double> theta, std::vector<double>& z) const;
};

// Versioned JSON persistence.  load_model validates the format version, the
// vocabulary fingerprint and the weight count.
void save_model(const std::filesystem::path& path, const LogisticModel& model, const Vocabulary& vocab);

struct LoadedModel {
    LogisticModel model;
    Vocabulary vocabulary;
};
LoadedModel load_model(const std::filesystem::path& path);

inline constexpr int kModelFormatVersion = 1;

}  // namespace linedp

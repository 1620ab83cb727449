#include "linedp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "linedp/error.hpp"
#include "linedp/simd.hpp"

namespace linedp {

namespace {

double softplus(double z) noexcept { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

void check_training_set(std::span<const FeatureVector> X, const std::vector<bool>& y) {
    if (X.size() != y.size())
        throw ModelError("feature/label count mismatch: " + std::to_string(X.size()) + " vs " +
                         std::to_string(y.size()));
    if (X.size() < 2) throw ModelError("need at least two training files");
    const auto positives = std::count(y.begin(), y.end(), true);
    if (positives == 0 || positives == static_cast<long>(y.size()))
        throw ModelError("training labels contain a single class");
    const auto dim = X.front().dimension;
    for (const auto& x : X) {
        if (x.dimension != dim) throw ModelError("feature vectors have inconsistent dimensions");
    }
}

struct Optimum {
    std::vector<double> theta;
    TrainStatus status;
};

// Full-batch gradient descent.  Trial steps use the Barzilai-Borwein length,
// accepted by nonmonotone Armijo backtracking against the worst of the last
// few objective values.
Optimum minimise(const LogisticObjective& obj, const TrainConfig& cfg) {
    const std::size_t p = obj.parameter_count();
    std::vector<double> theta(p, 0.0), grad(p), trial(p), trial_grad(p), s(p), yv(p);
    double f = obj.value_and_gradient(theta, grad);
    double gnorm = std::sqrt(simd::dot(grad, grad));
    double step = 1.0 / std::max(1.0, gnorm);

    constexpr std::size_t kMemory = 10;
    std::vector<double> recent{f};

    Optimum out;
    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        if (gnorm <= cfg.tolerance) {
            out.status.converged = true;
            break;
        }
        double f_trial = 0.0;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            std::copy(theta.begin(), theta.end(), trial.begin());
            simd::axpy(-step, grad, trial);
            f_trial = obj.value_and_gradient(trial, trial_grad);
            const double f_ref = *std::max_element(recent.begin(), recent.end());
            if (std::isfinite(f_trial) && f_trial <= f_ref - 1e-4 * step * gnorm * gnorm) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no further decrease representable

        for (std::size_t i = 0; i < p; ++i) {
            s[i] = trial[i] - theta[i];
            yv[i] = trial_grad[i] - grad[i];
        }
        theta.swap(trial);
        grad.swap(trial_grad);
        f = f_trial;
        if (recent.size() == kMemory) recent.erase(recent.begin());
        recent.push_back(f);
        gnorm = std::sqrt(simd::dot(grad, grad));

        const double sy = simd::dot(s, yv);
        const double ss = simd::dot(s, s);
        step = sy > 0.0 ? ss / sy : step * 2.0;
    }
    if (!out.status.converged && gnorm <= cfg.tolerance) out.status.converged = true;
    out.status.iterations = it;
    out.status.gradient_norm = gnorm;
    out.theta = std::move(theta);
    return out;
}

LogisticModel fit(std::span<const FeatureVector> X, const std::vector<bool>& y, const TrainConfig& cfg,
                  const ScalerStats* scaler) {
    check_training_set(X, y);
    if (cfg.max_iters < 1 || !(cfg.l2_lambda >= 0.0) || !(cfg.tolerance > 0.0))
        throw ModelError("invalid training configuration");
    LogisticObjective obj(X, y, cfg.l2_lambda, scaler);
    Optimum opt = minimise(obj, cfg);

    LogisticModel m;
    m.bias = opt.theta.back();
    opt.theta.pop_back();
    m.weights = std::move(opt.theta);
    m.vocab_fingerprint = X.front().vocab_fingerprint;
    m.config = cfg;
    m.status = opt.status;
    for (double w : m.weights) {
        if (!std::isfinite(w)) throw ModelError("training diverged (non-finite weight)");
    }
    if (!std::isfinite(m.bias)) throw ModelError("training diverged (non-finite bias)");
    return m;
}

}  // namespace

double sigmoid(double z) noexcept {
    constexpr double lo = std::numeric_limits<double>::denorm_min();
    const double hi = std::nextafter(1.0, 0.0);
    double p;
    if (z >= 0.0) {
        p = 1.0 / (1.0 + std::exp(-z));
    } else {
        const double e = std::exp(z);
        p = e / (1.0 + e);
    }
    return std::clamp(p, lo, hi);
}

ScalerStats fit_scaler(std::span<const FeatureVector> X, std::size_t dimension) {
    ScalerStats s;
    s.mean.assign(dimension, 0.0);
    s.std.assign(dimension, 0.0);
    if (X.empty()) return s;
    const double n = static_cast<double>(X.size());
    std::vector<std::size_t> nnz(dimension, 0);
    for (const auto& x : X) {
        for (auto [j, c] : x.entries) {
            s.mean[j] += c;
            ++nnz[j];
        }
    }
    for (auto& m : s.mean) m /= n;
    std::vector<double> ss(dimension, 0.0);
    for (const auto& x : X) {
        for (auto [j, c] : x.entries) {
            const double d = c - s.mean[j];
            ss[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < dimension; ++j) {
        ss[j] += static_cast<double>(X.size() - nnz[j]) * s.mean[j] * s.mean[j];
        s.std[j] = std::sqrt(ss[j] / n);
    }
    return s;
}

double LogisticModel::decision(const FeatureVector& x) const {
    double z = bias;
    if (scaler) {
        // sum_j w_j (x_j - mu_j) / s_j over all j, split into sparse and dense parts
        for (auto [j, c] : x.entries) z += weights[j] * c / scaler->scale(j);
        for (std::size_t j = 0; j < weights.size(); ++j)
            z -= weights[j] * scaler->mean[j] / scaler->scale(j);
    } else {
        for (auto [j, c] : x.entries) z += weights[j] * c;
    }
    return z;
}

LogisticModel train_logistic(std::span<const FeatureVector> X, const std::vector<bool>& y,
                             const TrainConfig& config) {
    return fit(X, y, config, nullptr);
}

LogisticModel train_standardized(std::span<const FeatureVector> X, const std::vector<bool>& y,
                                 const TrainConfig& config) {
    check_training_set(X, y);
    ScalerStats scaler = fit_scaler(X, X.front().dimension);
    LogisticModel m = fit(X, y, config, &scaler);
    m.scaler = std::move(scaler);
    return m;
}

double predict_proba(const LogisticModel& model, const FeatureVector& x) {
    if (x.dimension != model.weights.size())
        throw ModelError("feature dimension " + std::to_string(x.dimension) +
                         " does not match model dimension " + std::to_string(model.weights.size()));
    if (x.vocab_fingerprint != 0 && model.vocab_fingerprint != 0 &&
        x.vocab_fingerprint != model.vocab_fingerprint)
        throw ModelError("feature vector was built from a different vocabulary than the model");
    return sigmoid(model.decision(x));
}

// ---------------------------------------------------------------------------

LogisticObjective::LogisticObjective(std::span<const FeatureVector> X, const std::vector<bool>& y,
                                     double l2_lambda, const ScalerStats* scaler)
    : lambda_(l2_lambda) {
    dim_ = X.empty() ? 0 : X.front().dimension;
    row_ptr_.reserve(X.size() + 1);
    row_ptr_.push_back(0);
    for (const auto& x : X) {
        for (auto [j, c] : x.entries) {
            cols_.push_back(j);
            vals_.push_back(static_cast<double>(c));
        }
        row_ptr_.push_back(cols_.size());
    }
    y_.reserve(y.size());
    for (bool b : y) y_.push_back(b ? 1.0 : 0.0);
    if (scaler) {
        mean_ = scaler->mean;
        inv_scale_.resize(dim_);
        // Zero-variance columns are all-zero after centring; they get no weight.
        for (std::size_t j = 0; j < dim_; ++j) inv_scale_[j] = scaler->std[j] > 0.0 ? 1.0 / scaler->std[j] : 0.0;
    }
}

void LogisticObjective::margins(std::span<const double> theta, std::vector<double>& z) const {
    const std::size_t n = row_ptr_.size() - 1;
    const double b = theta[dim_];
    z.assign(n, b);
    if (inv_scale_.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) acc += vals_[k] * theta[cols_[k]];
            z[i] += acc;
        }
        return;
    }
    std::vector<double> u(dim_);
    for (std::size_t j = 0; j < dim_; ++j) u[j] = theta[j] * inv_scale_[j];
    const double offset = simd::dot(u, mean_);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) acc += vals_[k] * u[cols_[k]];
        z[i] += acc - offset;
    }
}

double LogisticObjective::value(std::span<const double> theta) const {
    std::vector<double> z;
    margins(theta, z);
    double f = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) f += softplus(z[i]) - y_[i] * z[i];
    const auto w = theta.first(dim_);
    return f + 0.5 * lambda_ * simd::dot(w, w);
}

double LogisticObjective::value_and_gradient(std::span<const double> theta, std::span<double> grad) const {
    std::vector<double> z;
    margins(theta, z);
    const std::size_t n = z.size();
    std::fill(grad.begin(), grad.end(), 0.0);
    double f = 0.0;
    double gsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        f += softplus(z[i]) - y_[i] * z[i];
        const double g = sigmoid(z[i]) - y_[i];
        gsum += g;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) grad[cols_[k]] += g * vals_[k];
    }
    if (!inv_scale_.empty()) {
        for (std::size_t j = 0; j < dim_; ++j) grad[j] = inv_scale_[j] * (grad[j] - mean_[j] * gsum);
    }
    const auto w = theta.first(dim_);
    simd::axpy(lambda_, w, grad.first(dim_));
    grad[dim_] = gsum;
    return f + 0.5 * lambda_ * simd::dot(w, w);
}

}  // namespace linedp

#include "linedp/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "linedp/error.hpp"
#include "linedp/random.hpp"
#include "linedp/simd.hpp"

namespace linedp {

std::size_t NeighborDesign::active_count(std::size_t i) const {
    std::size_t n = 0;
    for (std::size_t j = 0; j < features_; ++j) n += active(i, j) ? 1 : 0;
    return n;
}

NeighborDesign sample_neighbor_masks(std::size_t features, std::size_t samples, std::uint64_t seed) {
    NeighborDesign design(samples, features);
    for (std::size_t j = 0; j < features; ++j) std::fill(design.column(j).begin(), design.column(j).end(), 1.0);
    if (features < 2) return design;

    Rng rng(seed);
    std::vector<std::size_t> order(features);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 1; i < samples; ++i) {
        const std::size_t off = 1 + static_cast<std::size_t>(rng.below(features - 1));
        for (std::size_t t = 0; t < off; ++t) {
            const std::size_t pick = t + static_cast<std::size_t>(rng.below(features - t));
            std::swap(order[t], order[pick]);
            design.set(i, order[t], false);
        }
    }
    return design;
}

std::vector<NeighborSample> generate_neighbors(const FeatureVector& x, std::size_t n, std::uint64_t seed) {
    if (x.empty()) throw ModelError("cannot perturb an empty feature vector");
    if (n == 0) throw ModelError("neighbour count must be positive");
    const std::size_t d = x.entries.size();
    const NeighborDesign design = sample_neighbor_masks(d, n, seed);
    std::vector<NeighborSample> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& s = out[i];
        s.active_mask.resize(d);
        s.perturbed_vector.dimension = x.dimension;
        s.perturbed_vector.vocab_fingerprint = x.vocab_fingerprint;
        for (std::size_t j = 0; j < d; ++j) {
            const bool on = design.active(i, j);
            s.active_mask[j] = on;
            if (on) s.perturbed_vector.entries.push_back(x.entries[j]);
        }
    }
    return out;
}

double kernel_weight(std::size_t active, std::size_t features, double width) {
    const double d = (active == 0 || features == 0)
                         ? 1.0
                         : 1.0 - std::sqrt(static_cast<double>(active) / static_cast<double>(features));
    return std::exp(-(d * d) / (width * width));
}

double kernel_weight(const std::vector<bool>& original_mask, const std::vector<bool>& sample_mask,
                     double width) {
    if (original_mask.size() != sample_mask.size())
        throw ModelError("kernel_weight: masks differ in length");
    std::size_t a = 0, b = 0, both = 0;
    for (std::size_t i = 0; i < original_mask.size(); ++i) {
        a += original_mask[i];
        b += sample_mask[i];
        both += original_mask[i] && sample_mask[i];
    }
    double d = 1.0;
    if (a > 0 && b > 0) {
        const double cos = static_cast<double>(both) / (std::sqrt(double(a)) * std::sqrt(double(b)));
        d = 1.0 - cos;
    }
    return std::exp(-(d * d) / (width * width));
}

// ---------------------------------------------------------------------------
// K-Lasso

namespace {

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

struct Centered {
    std::vector<double> cols;  // column-major, weighted-centred design
    std::vector<double> mean;  // weighted column means
    std::vector<double> sq;    // sum_i w_i zc_ij^2 (unnormalised)
    std::vector<double> yc;
    double y_mean = 0.0;
    double wsum = 0.0;
    std::size_t n = 0;

    std::span<const double> col(std::size_t j) const { return {cols.data() + j * n, n}; }
    std::span<double> col(std::size_t j) { return {cols.data() + j * n, n}; }
};

Centered center(const NeighborDesign& design, std::span<const double> y, std::span<const double> w) {
    Centered c;
    c.n = design.samples();
    const std::size_t d = design.features();
    c.wsum = simd::sum(w);
    c.cols.resize(c.n * d);
    c.mean.resize(d);
    c.sq.resize(d);
    std::vector<double> ones(c.n, 1.0);
    c.y_mean = simd::dot(w, y) / c.wsum;
    c.yc.resize(c.n);
    for (std::size_t i = 0; i < c.n; ++i) c.yc[i] = y[i] - c.y_mean;
    for (std::size_t j = 0; j < d; ++j) {
        auto src = design.column(j);
        auto dst = c.col(j);
        c.mean[j] = simd::dot(w, src) / c.wsum;
        std::copy(src.begin(), src.end(), dst.begin());
        simd::axpy(-c.mean[j], ones, dst);
        c.sq[j] = simd::weighted_dot(w, dst, dst);
    }
    return c;
}

// Lasso on the normalised objective (1/2W) sum w_i r_i^2 + lambda |beta|_1,
// by cyclic coordinate descent with covariance updates: the gradient vector
// is kept current from Gram columns, computed once a feature turns non-zero.
class LassoPath {
public:
    LassoPath(const Centered& c, std::span<const double> w, std::vector<std::size_t> eligible)
        : c_(c), w_(w), eligible_(std::move(eligible)), beta_(c.mean.size(), 0.0), grad_(c.mean.size(), 0.0),
          gram_(c.mean.size()) {
        for (std::size_t j : eligible_) grad_[j] = simd::weighted_dot(w_, c_.col(j), c_.yc) / c_.wsum;
    }

    double lambda_max() const {
        double m = 0.0;
        for (std::size_t j : eligible_) m = std::max(m, std::abs(grad_[j]));
        return m;
    }

    void solve(double lambda) {
        constexpr int kMaxPasses = 200;
        for (int outer = 0; outer < kMaxPasses; ++outer) {
            const bool changed = sweep(eligible_, lambda);
            if (!changed) return;
            std::vector<std::size_t> active;
            for (std::size_t j : eligible_) {
                if (beta_[j] != 0.0) active.push_back(j);
            }
            for (int inner = 0; inner < 1000; ++inner) {
                if (!sweep(active, lambda)) break;
            }
        }
    }

    std::size_t nonzero() const {
        return static_cast<std::size_t>(std::count_if(beta_.begin(), beta_.end(), [](double b) { return b != 0.0; }));
    }
    const std::vector<double>& beta() const { return beta_; }

private:
    const Centered& c_;
    std::span<const double> w_;
    std::vector<std::size_t> eligible_;
    std::vector<double> beta_;
    std::vector<double> grad_;               // (1/W) sum_i w_i zc_ij r_i
    std::vector<std::vector<double>> gram_;  // column k: (1/W) sum_i w_i zc_ij zc_ik, filled lazily

    const std::vector<double>& gram_column(std::size_t k) {
        auto& g = gram_[k];
        if (g.empty()) {
            g.assign(c_.mean.size(), 0.0);
            for (std::size_t j : eligible_) g[j] = simd::weighted_dot(w_, c_.col(j), c_.col(k)) / c_.wsum;
        }
        return g;
    }

    // One coordinate pass; returns whether any coefficient moved appreciably.
    bool sweep(const std::vector<std::size_t>& coords, double lambda) {
        double max_delta = 0.0;
        for (std::size_t j : coords) {
            const double a = c_.sq[j] / c_.wsum;
            const double rho = grad_[j] + a * beta_[j];
            const double next = soft_threshold(rho, lambda) / a;
            const double delta = next - beta_[j];
            if (delta != 0.0) {
                simd::axpy(-delta, gram_column(j), grad_);
                beta_[j] = next;
                max_delta = std::max(max_delta, std::abs(delta) * std::sqrt(a));
            }
        }
        return max_delta > 1e-10;
    }
};

}  // namespace

SurrogateFit k_lasso(const NeighborDesign& design, std::span<const double> targets,
                     std::span<const double> weights, std::size_t k) {
    const std::size_t n = design.samples();
    const std::size_t d = design.features();
    if (targets.size() != n || weights.size() != n)
        throw ModelError("k_lasso: targets/weights do not match the sample count");
    if (n < 2) throw ModelError("k_lasso: need at least two samples");
    if (k == 0) throw ModelError("k_lasso: k must be positive");

    SurrogateFit fit;
    const Centered c = center(design, targets, weights);
    const double var_tol = 1e-12 * c.wsum;
    std::vector<std::size_t> eligible;
    for (std::size_t j = 0; j < d; ++j) {
        if (c.sq[j] > var_tol) eligible.push_back(j);
    }
    if (eligible.empty()) {
        fit.intercept = c.y_mean;
        fit.r_squared = 1.0;
        return fit;
    }
    const std::size_t target = std::min(k, eligible.size());

    // Phase 1: selection.
    std::vector<std::size_t> selected;
    LassoPath path(c, weights, eligible);
    const double lmax = path.lambda_max();
    const double y_scale = std::sqrt(simd::weighted_dot(weights, c.yc, c.yc) / c.wsum);
    if (lmax <= 1e-14 * std::max(1.0, y_scale)) {
        selected.assign(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(target));
    } else {
        constexpr int kGrid = 100;
        for (int t = 0; t < kGrid; ++t) {
            const double lambda = lmax * std::pow(1e-4, static_cast<double>(t) / (kGrid - 1));
            path.solve(lambda);
            if (path.nonzero() >= target) break;
        }
        const auto& beta = path.beta();
        for (std::size_t j : eligible) {
            if (beta[j] != 0.0) selected.push_back(j);
        }
        std::stable_sort(selected.begin(), selected.end(),
                         [&](std::size_t a, std::size_t b) { return std::abs(beta[a]) > std::abs(beta[b]); });
        if (selected.size() > k) selected.resize(k);
    }

    // Phase 2: weighted ridge refit on the selected columns.
    const std::size_t s = selected.size();
    Eigen::MatrixXd gram(s, s);
    Eigen::VectorXd rhs(s);
    for (std::size_t a = 0; a < s; ++a) {
        for (std::size_t b = a; b < s; ++b) {
            const double g = simd::weighted_dot(weights, c.col(selected[a]), c.col(selected[b]));
            gram(a, b) = g;
            gram(b, a) = g;
        }
        gram(a, a) += 1e-6;
        rhs(a) = simd::weighted_dot(weights, c.col(selected[a]), c.yc);
    }
    Eigen::VectorXd beta = s > 0 ? Eigen::VectorXd(gram.ldlt().solve(rhs)) : Eigen::VectorXd();

    std::vector<double> resid(c.yc);
    fit.intercept = c.y_mean;
    for (std::size_t a = 0; a < s; ++a) {
        simd::axpy(-beta(a), c.col(selected[a]), resid);
        fit.intercept -= beta(a) * c.mean[selected[a]];
        fit.coefficients.emplace_back(selected[a], beta(a));
    }
    std::stable_sort(fit.coefficients.begin(), fit.coefficients.end(),
                     [](const auto& a, const auto& b) { return std::abs(a.second) > std::abs(b.second); });
    const double tss = simd::weighted_dot(weights, c.yc, c.yc);
    const double rss = simd::weighted_dot(weights, resid, resid);
    fit.r_squared = tss > 0.0 ? std::max(0.0, 1.0 - rss / tss) : 1.0;
    return fit;
}

std::map<std::size_t, double> k_lasso(std::span<const NeighborSample> samples, std::size_t k) {
    if (samples.size() < 2) throw ModelError("k_lasso: need at least two samples");
    const std::size_t d = samples.front().active_mask.size();
    NeighborDesign design(samples.size(), d);
    std::vector<double> y(samples.size()), w(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].active_mask.size() != d) throw ModelError("k_lasso: inconsistent mask lengths");
        for (std::size_t j = 0; j < d; ++j) design.set(i, j, samples[i].active_mask[j]);
        y[i] = samples[i].predicted;
        w[i] = samples[i].weight;
    }
    std::map<std::size_t, double> out;
    for (auto [j, coef] : k_lasso(design, y, w, k).coefficients) out.emplace(j, coef);
    return out;
}

// ---------------------------------------------------------------------------

Explanation explain(const LogisticModel& model, const FeatureVector& x, const Vocabulary& vocab,
                    const LimeConfig& config) {
    if (x.empty()) throw ModelError("cannot explain a file with no in-vocabulary tokens");
    if (config.samples < 2 || config.k_features == 0 || !(config.kernel_width > 0.0))
        throw ModelError("LIME parameters must be positive (samples >= 2)");
    if (x.dimension != model.dimension() || vocab.size() != model.dimension())
        throw ModelError("explain: model, vocabulary and feature dimensions disagree");

    const std::size_t d = x.entries.size();
    const std::size_t n = config.samples;
    NeighborDesign design = sample_neighbor_masks(d, n, config.seed);

    // Logit of a neighbour = full logit - sum of contributions switched off.
    std::vector<double> contrib(d);
    for (std::size_t j = 0; j < d; ++j) {
        const auto [idx, count] = x.entries[j];
        const double scale = model.scaler ? model.scaler->scale(idx) : 1.0;
        contrib[j] = model.weights[idx] * static_cast<double>(count) / scale;
    }
    const double full = model.decision(x);
    const double base = full - std::accumulate(contrib.begin(), contrib.end(), 0.0);
    std::vector<double> logits(n, base);
    for (std::size_t j = 0; j < d; ++j) simd::axpy(contrib[j], design.column(j), logits);

    std::vector<double> predicted(n), weights(n);
    for (std::size_t i = 0; i < n; ++i) {
        predicted[i] = sigmoid(logits[i]);
        weights[i] = kernel_weight(design.active_count(i), d, config.kernel_width);
    }

    const SurrogateFit fit = k_lasso(design, predicted, weights, config.k_features);
    Explanation e;
    e.sample_count = n;
    e.k_features = config.k_features;
    e.seed = config.seed;
    e.local_fidelity = fit.r_squared;
    for (auto [j, coef] : fit.coefficients) e.scores.emplace(vocab.token(x.entries[j].first), coef);
    return e;
}

}  // namespace linedp

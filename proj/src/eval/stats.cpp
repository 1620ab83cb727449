#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "linedp/eval.hpp"

namespace linedp {

std::optional<double> performance_diff(std::span<const double> ours, std::span<const double> base) {
    if (ours.size() != base.size()) throw std::invalid_argument("performance_diff: length mismatch");
    double diff = 0.0, denom = 0.0;
    for (std::size_t i = 0; i < ours.size(); ++i) {
        diff += ours[i] - base[i];
        denom += base[i];
    }
    if (denom == 0.0) return std::nullopt;
    return 100.0 * diff / denom;
}

std::string_view magnitude_name(EffectMagnitude m) {
    switch (m) {
        case EffectMagnitude::negligible: return "negligible";
        case EffectMagnitude::small: return "small";
        case EffectMagnitude::medium: return "medium";
        case EffectMagnitude::large: return "large";
    }
    return "negligible";
}

EffectMagnitude effect_magnitude(double r) {
    const double a = std::abs(r);
    if (a > 0.5) return EffectMagnitude::large;
    if (a > 0.3) return EffectMagnitude::medium;
    if (a > 0.1) return EffectMagnitude::small;
    return EffectMagnitude::negligible;
}

namespace {

constexpr std::size_t kExactLimit = 15;

// Average ranks of |d|, doubled so ties stay integral.
std::vector<long> doubled_ranks(const std::vector<double>& absdiff, double& tie_term) {
    const std::size_t n = absdiff.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return absdiff[a] < absdiff[b]; });
    std::vector<long> r2(n);
    tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && absdiff[order[j]] == absdiff[order[i]]) ++j;
        // ranks i+1..j, average (i+1+j)/2, doubled: i+1+j
        for (std::size_t t = i; t < j; ++t) r2[order[t]] = static_cast<long>(i + 1 + j);
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    return r2;
}

}  // namespace

std::optional<StatTestResult> wilcoxon_one_sided(std::span<const double> a, std::span<const double> b,
                                                 Alternative alternative) {
    if (a.size() != b.size()) throw std::invalid_argument("wilcoxon: samples are not paired");
    std::vector<double> diff;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (d != 0.0) diff.push_back(d);
    }
    const std::size_t n = diff.size();
    if (n == 0) return std::nullopt;

    std::vector<double> absdiff(n);
    for (std::size_t i = 0; i < n; ++i) absdiff[i] = std::abs(diff[i]);
    double tie_term = 0.0;
    const auto r2 = doubled_ranks(absdiff, tie_term);
    long w2 = 0;  // doubled W+
    for (std::size_t i = 0; i < n; ++i) {
        if (diff[i] > 0) w2 += r2[i];
    }

    StatTestResult res;
    res.n = n;
    const double nd = static_cast<double>(n);
    const double mean = nd * (nd + 1.0) / 4.0;
    const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
    const double w = static_cast<double>(w2) / 2.0;
    res.z_score = var > 0.0 ? (w - mean) / std::sqrt(var) : 0.0;

    if (n <= kExactLimit) {
        // Null distribution of doubled W+ over all 2^n sign assignments.
        const long total2 = std::accumulate(r2.begin(), r2.end(), 0L);
        std::vector<double> count(static_cast<std::size_t>(total2) + 1, 0.0);
        count[0] = 1.0;
        long reach = 0;
        for (long r : r2) {
            for (long s = reach; s >= 0; --s) {
                if (count[static_cast<std::size_t>(s)] != 0.0) count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
            }
            reach += r;
        }
        double tail = 0.0;
        if (alternative == Alternative::greater) {
            for (long s = w2; s <= total2; ++s) tail += count[static_cast<std::size_t>(s)];
        } else {
            for (long s = 0; s <= w2; ++s) tail += count[static_cast<std::size_t>(s)];
        }
        res.p_value = tail / std::ldexp(1.0, static_cast<int>(n));
        res.exact = true;
    } else {
        const double z = alternative == Alternative::greater ? res.z_score : -res.z_score;
        res.p_value = 0.5 * std::erfc(z / std::sqrt(2.0));
    }
    res.effect_r = res.z_score / std::sqrt(nd);
    res.magnitude = effect_magnitude(res.effect_r);
    return res;
}

}  // namespace linedp

#pragma once

// Dense double-precision kernels used by the LIME surrogate fit, the
// neighbour scoring pass and the logistic trainer.  Every kernel has a
// scalar reference implementation; vectorised variants are selected once at
// runtime from what the CPU reports.

#include <cstddef>
#include <span>
#include <string_view>

namespace linedp::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

struct KernelTable {
    Isa isa;
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*weighted_dot)(const double* w, const double* a, const double* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    double (*sum)(const double* a, std::size_t n);
};

namespace scalar {
const KernelTable& table();
}

// Returns nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_table();
const KernelTable* neon_table();

// Best table for this CPU.  LINEDP_SIMD=scalar|avx2|neon in the environment
// overrides the choice (unknown or unsupported values fall back to scalar).
const KernelTable& active();

// Convenience wrappers over active().
inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}
inline double weighted_dot(std::span<const double> w, std::span<const double> a,
                           std::span<const double> b) {
    return active().weighted_dot(w.data(), a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}
inline double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }

}  // namespace linedp::simd

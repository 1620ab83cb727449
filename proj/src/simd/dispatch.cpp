#include "linedp/simd.hpp"

#include <cstdlib>
#include <string>

namespace linedp::simd {

#if defined(LINEDP_HAVE_AVX2)
namespace avx2 {
const KernelTable& table();
}
#endif
#if defined(LINEDP_HAVE_NEON)
namespace neon {
const KernelTable& table();
}
#endif

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

const KernelTable* avx2_table() {
#if defined(LINEDP_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &avx2::table();
#endif
    return nullptr;
}

const KernelTable* neon_table() {
#if defined(LINEDP_HAVE_NEON)
    return &neon::table();
#else
    return nullptr;
#endif
}

namespace {

const KernelTable& select() {
    const char* forced = std::getenv("LINEDP_SIMD");
    if (forced != nullptr) {
        const std::string want{forced};
        const KernelTable* t = nullptr;
        if (want == "avx2") t = avx2_table();
        else if (want == "neon") t = neon_table();
        return t != nullptr ? *t : scalar::table();
    }
    if (const auto* t = avx2_table()) return *t;
    if (const auto* t = neon_table()) return *t;
    return scalar::table();
}

}  // namespace

const KernelTable& active() {
    static const KernelTable& chosen = select();
    return chosen;
}

}  // namespace linedp::simd

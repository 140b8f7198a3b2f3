#include <atomic>
#include <cstdlib>
#include <string>

#include "v2v/error.hpp"
#include "v2v/simd/kernels.hpp"

namespace v2v::simd {
namespace {

bool cpu_has_avx2_fma() noexcept {
#if defined(V2V_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* initial_table() {
    Isa isa = cpu_has_avx2_fma() ? Isa::avx2 : Isa::scalar;
    if (const char* forced = std::getenv("V2V_KERNELS"); forced != nullptr && *forced != '\0') {
        const Isa requested = parse_isa(forced);
        if (isa_supported(requested)) isa = requested;
    }
    return &table(isa);
}

std::atomic<const KernelTable*>& active_slot() noexcept {
    static std::atomic<const KernelTable*> slot{initial_table()};
    return slot;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

Isa parse_isa(std::string_view name) {
    if (name == "scalar") return Isa::scalar;
    if (name == "avx2") return Isa::avx2;
    throw Error(ErrorCode::ConfigInvalid, "unknown kernel set '" + std::string(name) + "'");
}

bool isa_supported(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2: return cpu_has_avx2_fma();
    }
    return false;
}

const KernelTable& table(Isa isa) {
    if (!isa_supported(isa)) {
        throw Error(ErrorCode::ConfigInvalid, "kernel set '" + std::string(to_string(isa)) + "' unavailable on this host");
    }
#if defined(V2V_HAVE_AVX2_KERNELS)
    if (isa == Isa::avx2) return detail::kAvx2Table;
#endif
    return detail::kScalarTable;
}

const KernelTable& active() noexcept { return *active_slot().load(std::memory_order_acquire); }

void set_active_isa(Isa isa) { active_slot().store(&table(isa), std::memory_order_release); }

}  // namespace v2v::simd

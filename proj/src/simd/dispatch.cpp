// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <string>

#include "llp/error.hpp"
#include "llp/simd/kernels.hpp"

namespace llp::simd {

#if defined(LLP_HAVE_AVX2)
namespace avx2 {
extern const KernelTable table;
}
#endif
#if defined(__aarch64__)
namespace neon {
extern const KernelTable table;
}
#endif

namespace {

const KernelTable* detect() {
    if (const char* forced = std::getenv("LLP_SIMD"); forced && *forced) {
        const auto* table = table_for(parse_isa(forced));
        if (!table) throw UsageError(std::string("LLP_SIMD=") + forced + " is not available on this machine");
        return table;
    }
    if (const auto* table = table_for(Isa::avx2)) return table;
    if (const auto* table = table_for(Isa::neon)) return table;
    return &scalar::table;
}

std::atomic<const KernelTable*> current{nullptr};

} // namespace

const KernelTable* table_for(Isa isa) {
    switch (isa) {
    case Isa::scalar:
        return &scalar::table;
    case Isa::avx2:
#if defined(LLP_HAVE_AVX2)
        if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &avx2::table;
#endif
        return nullptr;
    case Isa::neon:
#if defined(__aarch64__)
        return &neon::table;
#else
        return nullptr;
#endif
    }
    return nullptr;
}

const KernelTable& active() {
    const KernelTable* table = current.load(std::memory_order_acquire);
    if (!table) {
        table = detect();
        const KernelTable* expected = nullptr;
        if (!current.compare_exchange_strong(expected, table)) table = expected;
    }
    return *table;
}

void select(Isa isa) {
    const auto* table = table_for(isa);
    if (!table) throw UsageError(std::string("SIMD variant '") + std::string(name(isa)) + "' is not available");
    current.store(table, std::memory_order_release);
}

std::string_view name(Isa isa) {
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
    }
    return "unknown";
}

Isa parse_isa(std::string_view text) {
    if (text == "scalar") return Isa::scalar;
    if (text == "avx2") return Isa::avx2;
    if (text == "neon") return Isa::neon;
    throw UsageError("unknown SIMD variant '" + std::string(text) + "' (expected scalar, avx2 or neon)");
}

} // namespace llp::simd

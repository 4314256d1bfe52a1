#include "instrecon/simd/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace instrecon::simd {

#if !defined(INSTRECON_HAVE_AVX2)
namespace detail {
const KernelTable* avx2_table() noexcept { return nullptr; }
}  // namespace detail
#endif

std::string_view to_string(Isa isa) noexcept
{
    switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

bool isa_available(Isa isa) noexcept
{
    switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(INSTRECON_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
        return detail::avx2_table() != nullptr && __builtin_cpu_supports("avx2");
#else
        return false;
#endif
    }
    return false;
}

const KernelTable& kernels(Isa isa)
{
    if (!isa_available(isa)) {
        throw std::invalid_argument("SIMD kernels unavailable: " + std::string(to_string(isa)));
    }
    if (isa == Isa::Avx2) {
        return *detail::avx2_table();
    }
    return detail::scalar_table();
}

const KernelTable& kernels()
{
    static const KernelTable& selected = [] () -> const KernelTable& {
        const char* forced = std::getenv("INSTRECON_ISA");
        if (forced != nullptr && std::string(forced) == "scalar") {
            return detail::scalar_table();
        }
        if (isa_available(Isa::Avx2)) {
            return *detail::avx2_table();
        }
        return detail::scalar_table();
    }();
    return selected;
}

}  // namespace instrecon::simd

#include "blindspot/kernels/kernels.hpp"

#include <cstdio>
#include <cstdlib>

namespace blindspot::kernels {

bool avx2_available() {
#if defined(BLINDSPOT_HAVE_AVX2)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Ops* ops_by_name(std::string_view name) {
    if (name == "scalar") return &scalar_ops();
#if defined(BLINDSPOT_HAVE_AVX2)
    if (name == "avx2" && avx2_available()) return &avx2_ops();
#endif
    return nullptr;
}

const Ops& active_ops() {
    static const Ops* selected = [] {
        if (const char* env = std::getenv("BLINDSPOT_KERNELS")) {
            if (const Ops* o = ops_by_name(env)) return o;
            std::fprintf(stderr, "blindspot: BLINDSPOT_KERNELS=%s not available, autoselecting\n",
                         env);
        }
#if defined(BLINDSPOT_HAVE_AVX2)
        if (avx2_available()) return &avx2_ops();
#endif
        return &scalar_ops();
    }();
    return *selected;
}

}  // namespace blindspot::kernels

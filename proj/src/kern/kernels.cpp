#include <stdexcept>
#include <string>

#include "rosa/kern/kernels.hpp"

namespace rosa::kern {
namespace {

const Ops* g_active = nullptr;

const Ops& best() { return avx2_supported() ? avx2_ops() : scalar_ops(); }

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Ops& active() {
    if (!g_active) g_active = &best();
    return *g_active;
}

void set_backend(std::string_view name) {
    if (name == "auto") {
        g_active = &best();
    } else if (name == "scalar") {
        g_active = &scalar_ops();
    } else if (name == "avx2") {
        if (!avx2_supported()) throw std::runtime_error("avx2 not supported on this cpu");
        g_active = &avx2_ops();
    } else {
        throw std::runtime_error("unknown kernel backend: " + std::string(name));
    }
}

std::string_view backend_name() { return active().name; }

}  // namespace rosa::kern

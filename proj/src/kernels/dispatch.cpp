#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "impl.hpp"

namespace abp::kernels {
namespace {

constexpr KernelTable kScalar{scalar::dot, scalar::dot_compensated, scalar::sum_compensated,
                              scalar::coupled_stencil, scalar::advance_positions};
#ifdef ABP_WITH_AVX2
constexpr KernelTable kAvx2{avx2::dot, avx2::dot_compensated, avx2::sum_compensated,
                            avx2::coupled_stencil, avx2::advance_positions};
#endif

bool cpu_has_avx2() {
#if defined(ABP_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend initial_backend() {
    if (const char* env = std::getenv("ABP_KERNELS")) {
        const std::string want(env);
        if (want == "scalar") return Backend::scalar;
        if (want == "avx2" && cpu_has_avx2()) return Backend::avx2;
    }
    return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> t{&table(initial_backend())};
    return t;
}

}  // namespace

std::string_view backend_name(Backend b) {
    return b == Backend::avx2 ? "avx2" : "scalar";
}

bool backend_available(Backend b) {
    return b == Backend::scalar || cpu_has_avx2();
}

const KernelTable& table(Backend b) {
    if (b == Backend::scalar) return kScalar;
#ifdef ABP_WITH_AVX2
    if (cpu_has_avx2()) return kAvx2;
#endif
    throw std::invalid_argument("kernel backend '" + std::string(backend_name(b)) +
                                "' is not available on this host");
}

Backend active_backend() {
    return current().load(std::memory_order_acquire) == &kScalar ? Backend::scalar : Backend::avx2;
}

void set_backend(Backend b) {
    current().store(&table(b), std::memory_order_release);
}

double dot(std::span<const double> a, std::span<const double> b) {
    return current().load(std::memory_order_relaxed)->dot(a, b);
}

double dot_compensated(std::span<const double> a, std::span<const double> b) {
    return current().load(std::memory_order_relaxed)->dot_compensated(a, b);
}

double sum_compensated(std::span<const double> a) {
    return current().load(std::memory_order_relaxed)->sum_compensated(a);
}

void coupled_stencil(std::span<const double> n, std::span<const double> f,
                     std::span<double> out_n, std::span<double> out_f,
                     const StencilCoefficients& c) {
    current().load(std::memory_order_relaxed)->coupled_stencil(n, f, out_n, out_f, c);
}

void advance_positions(std::span<double> x, std::span<const double> drift,
                       std::span<const double> noise, double noise_scale) {
    current().load(std::memory_order_relaxed)->advance_positions(x, drift, noise, noise_scale);
}

}  // namespace abp::kernels

#pragma once

// Data-parallel inner loops. Each kernel has a portable scalar reference and,
// on x86-64 hosts that support it, an AVX2+FMA variant picked at runtime.
//
// The stencil and particle kernels are bit-identical across backends (same
// operation order, no contraction). The reductions reassociate, so their
// backends agree to within the rounding bound of the summation method.

#include <span>
#include <string_view>

namespace abp::kernels {

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend b);
bool backend_available(Backend b);

/// Backend used by the dispatching entry points below. Chosen on first use:
/// the best available one, unless ABP_KERNELS=scalar|avx2 is set.
Backend active_backend();

/// Overrides the active backend. Throws std::invalid_argument when `b` is not
/// available on this host.
void set_backend(Backend b);

/// Coefficients of the explicit half of a theta step on the coupled (n, f)
/// pair. For interior node i (inputs padded with one boundary value per side):
///   out_n = n + diffusion*(n[i-1] - 2n + n[i+1]) - coupling*(f[i+1] - f[i-1])
///   out_f = f + diffusion*(f[i-1] - 2f + f[i+1]) - coupling*(n[i+1] - n[i-1]) - decay*f
struct StencilCoefficients {
    double diffusion = 0.0;
    double coupling = 0.0;
    double decay = 0.0;
};

double dot(std::span<const double> a, std::span<const double> b);

/// Dot product evaluated as if in twice the working precision (Dot2).
double dot_compensated(std::span<const double> a, std::span<const double> b);

/// Sum evaluated as if in twice the working precision (Sum2).
double sum_compensated(std::span<const double> a);

/// `n` and `f` hold m + 2 values (boundaries included); outputs hold m.
void coupled_stencil(std::span<const double> n, std::span<const double> f,
                     std::span<double> out_n, std::span<double> out_f,
                     const StencilCoefficients& c);

/// x[i] <- (x[i] + drift[i]) + noise_scale * noise[i]
void advance_positions(std::span<double> x, std::span<const double> drift,
                       std::span<const double> noise, double noise_scale);

/// Direct access to each backend, for equivalence testing.
struct KernelTable {
    double (*dot)(std::span<const double>, std::span<const double>);
    double (*dot_compensated)(std::span<const double>, std::span<const double>);
    double (*sum_compensated)(std::span<const double>);
    void (*coupled_stencil)(std::span<const double>, std::span<const double>,
                            std::span<double>, std::span<double>, const StencilCoefficients&);
    void (*advance_positions)(std::span<double>, std::span<const double>,
                              std::span<const double>, double);
};

/// Throws std::invalid_argument when `b` is not available.
const KernelTable& table(Backend b);

}  // namespace abp::kernels

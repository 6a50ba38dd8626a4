#pragma once

#include "abp/kernels.hpp"

namespace abp::kernels {

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
double dot_compensated(std::span<const double> a, std::span<const double> b);
double sum_compensated(std::span<const double> a);
void coupled_stencil(std::span<const double> n, std::span<const double> f,
                     std::span<double> out_n, std::span<double> out_f,
                     const StencilCoefficients& c);
void advance_positions(std::span<double> x, std::span<const double> drift,
                       std::span<const double> noise, double noise_scale);
}  // namespace scalar

#ifdef ABP_WITH_AVX2
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
double dot_compensated(std::span<const double> a, std::span<const double> b);
double sum_compensated(std::span<const double> a);
void coupled_stencil(std::span<const double> n, std::span<const double> f,
                     std::span<double> out_n, std::span<double> out_f,
                     const StencilCoefficients& c);
void advance_positions(std::span<double> x, std::span<const double> drift,
                       std::span<const double> noise, double noise_scale);
}  // namespace avx2
#endif

}  // namespace abp::kernels

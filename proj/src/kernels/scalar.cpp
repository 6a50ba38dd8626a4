#include <cassert>
#include <cmath>

#include "abp/compensated.hpp"
#include "impl.hpp"

namespace abp::kernels::scalar {

double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double dot_compensated(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double p = 0.0, s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double h = a[i] * b[i];
        const double r = std::fma(a[i], b[i], -h);
        double q;
        two_sum(p, h, p, q);
        s += q + r;
    }
    return p + s;
}

double sum_compensated(std::span<const double> a) {
    CompensatedSum acc;
    for (double v : a) acc += v;
    return acc.value();
}

void coupled_stencil(std::span<const double> n, std::span<const double> f,
                     std::span<double> out_n, std::span<double> out_f,
                     const StencilCoefficients& c) {
    const std::size_t m = out_n.size();
    assert(n.size() == m + 2 && f.size() == m + 2 && out_f.size() == m);
    for (std::size_t i = 0; i < m; ++i) {
        const double nl = n[i], nc = n[i + 1], nr = n[i + 2];
        const double fl = f[i], fc = f[i + 1], fr = f[i + 2];
        const double lap_n = (nl - 2.0 * nc) + nr;
        const double lap_f = (fl - 2.0 * fc) + fr;
        out_n[i] = (nc + c.diffusion * lap_n) - c.coupling * (fr - fl);
        out_f[i] = ((fc + c.diffusion * lap_f) - c.coupling * (nr - nl)) - c.decay * fc;
    }
}

void advance_positions(std::span<double> x, std::span<const double> drift,
                       std::span<const double> noise, double noise_scale) {
    assert(drift.size() == x.size() && noise.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = (x[i] + drift[i]) + noise_scale * noise[i];
}

}  // namespace abp::kernels::scalar

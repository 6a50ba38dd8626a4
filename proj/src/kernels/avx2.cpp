#include <immintrin.h>

#include <cassert>
#include <cmath>

#include "abp/compensated.hpp"
#include "impl.hpp"

namespace abp::kernels::avx2 {
namespace {

inline void two_sum4(__m256d a, __m256d b, __m256d& s, __m256d& e) {
    s = _mm256_add_pd(a, b);
    const __m256d bb = _mm256_sub_pd(s, a);
    e = _mm256_add_pd(_mm256_sub_pd(a, _mm256_sub_pd(s, bb)), _mm256_sub_pd(b, bb));
}

// Folds per-lane (sum, error) pairs into one value, compensating across lanes.
double fold_lanes(__m256d p0, __m256d s0, __m256d p1, __m256d s1) {
    alignas(32) double p[8], s[8];
    _mm256_store_pd(p, p0);
    _mm256_store_pd(p + 4, p1);
    _mm256_store_pd(s, s0);
    _mm256_store_pd(s + 4, s1);
    double total = 0.0, err = 0.0;
    for (int i = 0; i < 8; ++i) {
        double e;
        two_sum(total, p[i], total, e);
        err += e + s[i];
    }
    return total + err;
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    const std::size_t n = a.size();
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(&a[i]), _mm256_loadu_pd(&b[i])));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(&a[i + 4]), _mm256_loadu_pd(&b[i + 4])));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double dot_compensated(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    const std::size_t n = a.size();
    __m256d p0 = _mm256_setzero_pd(), s0 = _mm256_setzero_pd();
    __m256d p1 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d x0 = _mm256_loadu_pd(&a[i]), y0 = _mm256_loadu_pd(&b[i]);
        const __m256d x1 = _mm256_loadu_pd(&a[i + 4]), y1 = _mm256_loadu_pd(&b[i + 4]);
        const __m256d h0 = _mm256_mul_pd(x0, y0), h1 = _mm256_mul_pd(x1, y1);
        const __m256d r0 = _mm256_fmsub_pd(x0, y0, h0), r1 = _mm256_fmsub_pd(x1, y1, h1);
        __m256d q0, q1;
        two_sum4(p0, h0, p0, q0);
        two_sum4(p1, h1, p1, q1);
        s0 = _mm256_add_pd(s0, _mm256_add_pd(q0, r0));
        s1 = _mm256_add_pd(s1, _mm256_add_pd(q1, r1));
    }
    // Tail goes through lane 0 of the first accumulator pair.
    alignas(32) double pl[4], sl[4];
    _mm256_store_pd(pl, p0);
    _mm256_store_pd(sl, s0);
    for (; i < n; ++i) {
        const double h = a[i] * b[i];
        const double r = std::fma(a[i], b[i], -h);
        double q;
        two_sum(pl[0], h, pl[0], q);
        sl[0] += q + r;
    }
    return fold_lanes(_mm256_load_pd(pl), _mm256_load_pd(sl), p1, s1);
}

double sum_compensated(std::span<const double> a) {
    const std::size_t n = a.size();
    __m256d p0 = _mm256_setzero_pd(), s0 = _mm256_setzero_pd();
    __m256d p1 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d q0, q1;
        two_sum4(p0, _mm256_loadu_pd(&a[i]), p0, q0);
        two_sum4(p1, _mm256_loadu_pd(&a[i + 4]), p1, q1);
        s0 = _mm256_add_pd(s0, q0);
        s1 = _mm256_add_pd(s1, q1);
    }
    alignas(32) double pl[4], sl[4];
    _mm256_store_pd(pl, p0);
    _mm256_store_pd(sl, s0);
    for (; i < n; ++i) {
        double q;
        two_sum(pl[0], a[i], pl[0], q);
        sl[0] += q;
    }
    return fold_lanes(_mm256_load_pd(pl), _mm256_load_pd(sl), p1, s1);
}

void coupled_stencil(std::span<const double> n, std::span<const double> f,
                     std::span<double> out_n, std::span<double> out_f,
                     const StencilCoefficients& c) {
    const std::size_t m = out_n.size();
    assert(n.size() == m + 2 && f.size() == m + 2 && out_f.size() == m);
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d d = _mm256_set1_pd(c.diffusion);
    const __m256d k = _mm256_set1_pd(c.coupling);
    const __m256d r = _mm256_set1_pd(c.decay);
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        const __m256d nl = _mm256_loadu_pd(&n[i]), nc = _mm256_loadu_pd(&n[i + 1]),
                      nr = _mm256_loadu_pd(&n[i + 2]);
        const __m256d fl = _mm256_loadu_pd(&f[i]), fc = _mm256_loadu_pd(&f[i + 1]),
                      fr = _mm256_loadu_pd(&f[i + 2]);
        const __m256d lap_n = _mm256_add_pd(_mm256_sub_pd(nl, _mm256_mul_pd(two, nc)), nr);
        const __m256d lap_f = _mm256_add_pd(_mm256_sub_pd(fl, _mm256_mul_pd(two, fc)), fr);
        const __m256d on = _mm256_sub_pd(_mm256_add_pd(nc, _mm256_mul_pd(d, lap_n)),
                                         _mm256_mul_pd(k, _mm256_sub_pd(fr, fl)));
        const __m256d of = _mm256_sub_pd(
            _mm256_sub_pd(_mm256_add_pd(fc, _mm256_mul_pd(d, lap_f)),
                          _mm256_mul_pd(k, _mm256_sub_pd(nr, nl))),
            _mm256_mul_pd(r, fc));
        _mm256_storeu_pd(&out_n[i], on);
        _mm256_storeu_pd(&out_f[i], of);
    }
    for (; i < m; ++i) {
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
    const std::size_t n = x.size();
    const __m256d s = _mm256_set1_pd(noise_scale);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d moved = _mm256_add_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&drift[i]));
        _mm256_storeu_pd(&x[i], _mm256_add_pd(moved, _mm256_mul_pd(s, _mm256_loadu_pd(&noise[i]))));
    }
    for (; i < n; ++i) x[i] = (x[i] + drift[i]) + noise_scale * noise[i];
}

}  // namespace abp::kernels::avx2

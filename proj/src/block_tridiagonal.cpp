#include "abp/block_tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "abp/errors.hpp"

namespace abp {
namespace {

Block2 mul(const Block2& x, const Block2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
            x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

Block2 sub(const Block2& x, const Block2& y) {
    return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
}

Block2 inverse(const Block2& m, std::size_t row) {
    const double det = m.a * m.d - m.b * m.c;
    const double scale = std::max({std::abs(m.a), std::abs(m.b), std::abs(m.c), std::abs(m.d)});
    if (!(std::abs(det) > 1e-300) || !(std::abs(det) > 1e-14 * scale * scale)) {
        throw NumericalError("block-tridiagonal solve: singular pivot block at row " +
                             std::to_string(row) + " (det=" + std::to_string(det) + ")");
    }
    const double inv = 1.0 / det;
    return {m.d * inv, -m.b * inv, -m.c * inv, m.a * inv};
}

}  // namespace

BlockTridiagonal2::BlockTridiagonal2(std::vector<Block2> lower, std::vector<Block2> diag,
                                     std::vector<Block2> upper)
    : lower_(std::move(lower)) {
    const std::size_t m = diag.size();
    if (m == 0 || lower_.size() != m || upper.size() != m) {
        throw std::invalid_argument("BlockTridiagonal2: band sizes must match and be non-zero");
    }
    pivot_inv_.resize(m);
    upper_mod_.resize(m);
    pivot_inv_[0] = inverse(diag[0], 0);
    upper_mod_[0] = mul(pivot_inv_[0], upper[0]);
    for (std::size_t i = 1; i < m; ++i) {
        const Block2 pivot = sub(diag[i], mul(lower_[i], upper_mod_[i - 1]));
        pivot_inv_[i] = inverse(pivot, i);
        upper_mod_[i] = mul(pivot_inv_[i], upper[i]);
    }
    upper_mod_[m - 1] = Block2{};
}

BlockTridiagonal2 BlockTridiagonal2::uniform(std::size_t m, const Block2& lower,
                                             const Block2& diag, const Block2& upper) {
    return BlockTridiagonal2(std::vector<Block2>(m, lower), std::vector<Block2>(m, diag),
                             std::vector<Block2>(m, upper));
}

void BlockTridiagonal2::solve(std::span<double> first, std::span<double> second) const {
    const std::size_t m = size();
    if (first.size() != m || second.size() != m) {
        throw std::invalid_argument("BlockTridiagonal2::solve: right-hand side size mismatch");
    }
    // Forward elimination: y_i = P_i^{-1} (r_i - L_i y_{i-1}).
    double y0 = 0.0, y1 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double r0 = first[i], r1 = second[i];
        if (i > 0) {
            const Block2& l = lower_[i];
            r0 -= l.a * y0 + l.b * y1;
            r1 -= l.c * y0 + l.d * y1;
        }
        const Block2& p = pivot_inv_[i];
        y0 = p.a * r0 + p.b * r1;
        y1 = p.c * r0 + p.d * r1;
        first[i] = y0;
        second[i] = y1;
    }
    // Back substitution: x_i = y_i - U'_i x_{i+1}.
    for (std::size_t i = m - 1; i-- > 0;) {
        const Block2& u = upper_mod_[i];
        const double x0 = first[i + 1], x1 = second[i + 1];
        first[i] -= u.a * x0 + u.b * x1;
        second[i] -= u.c * x0 + u.d * x1;
    }
}

}  // namespace abp

#include <algorithm>
#include <cmath>
#include <vector>

#include "abp/block_tridiagonal.hpp"
#include "abp/errors.hpp"
#include "abp/oracles.hpp"

namespace abp::oracles {
namespace {

double cubic_at(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    const std::size_t n = xs.size();
    const double h = xs[1] - xs[0];
    const double s = (x - xs.front()) / h;
    // Four nodes around x, shifted inward at the ends.
    long i0 = static_cast<long>(std::floor(s)) - 1;
    i0 = std::clamp(i0, 0L, static_cast<long>(n) - 4);
    double value = 0.0;
    for (long j = i0; j < i0 + 4; ++j) {
        double w = 1.0;
        for (long k = i0; k < i0 + 4; ++k) {
            if (k != j) w *= (s - static_cast<double>(k)) / static_cast<double>(j - k);
        }
        value += w * ys[static_cast<std::size_t>(j)];
    }
    return value;
}

}  // namespace

double BvpSolution::plus_at(double x) const { return cubic_at(x_nodes, t_plus, x); }
double BvpSolution::minus_at(double x) const { return cubic_at(x_nodes, t_minus, x); }

double BvpSolution::mfpt(double x0, double eta) const {
    if (!(x0 >= -1.0 && x0 <= 1.0)) throw ValidationError("x0", "must lie in [-1, 1]");
    if (std::abs(x0) == 1.0) return 0.0;
    return eta * plus_at(x0) + (1.0 - eta) * minus_at(x0);
}

BvpSolution mfpt_bvp(const ModelParams& params, int nx) {
    validate(params);
    if (nx < 16) throw ValidationError("nx", "must be >= 16");
    const double h = 2.0 / (nx + 1);
    const double d = 1.0 / (h * h);
    const double a = params.pe / (2.0 * h);
    const double b = params.beta;
    // Unknowns per node: (T+, T-).
    const Block2 lower{d - a, 0.0, 0.0, d + a};
    const Block2 diag{-2.0 * d - b, b, b, -2.0 * d - b};
    const Block2 upper{d + a, 0.0, 0.0, d - a};
    const auto system = BlockTridiagonal2::uniform(static_cast<std::size_t>(nx), lower, diag, upper);

    std::vector<double> tp(nx, -1.0), tm(nx, -1.0);
    system.solve(tp, tm);

    BvpSolution sol;
    sol.x_nodes.resize(nx + 2);
    for (int i = 0; i < nx + 2; ++i) sol.x_nodes[i] = -1.0 + i * h;
    sol.x_nodes.back() = 1.0;
    sol.t_plus.assign(nx + 2, 0.0);
    sol.t_minus.assign(nx + 2, 0.0);
    std::copy(tp.begin(), tp.end(), sol.t_plus.begin() + 1);
    std::copy(tm.begin(), tm.end(), sol.t_minus.begin() + 1);
    for (std::size_t i = 0; i < tp.size(); ++i) {
        if (!std::isfinite(tp[i]) || !std::isfinite(tm[i])) {
            throw NumericalError("BVP solve produced non-finite exit times");
        }
    }
    return sol;
}

double mfpt_bvp_extrapolated(const ModelParams& params, int nx) {
    const double coarse = mfpt_bvp(params, nx).mfpt(params.x0, params.eta);
    const double fine = mfpt_bvp(params, 2 * nx + 1).mfpt(params.x0, params.eta);
    return fine + (fine - coarse) / 3.0;
}

}  // namespace abp::oracles

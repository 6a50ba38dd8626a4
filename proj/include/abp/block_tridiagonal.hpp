#pragma once

#include <array>
#include <span>
#include <vector>

namespace abp {

/// Row-major 2x2 block: [[a, b], [c, d]].
struct Block2 {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
};

using Pair = std::array<double, 2>;

/// Factored block-tridiagonal system with 2x2 blocks, solved by block
/// Thomas elimination. Row i reads lower[i] u[i-1] + diag[i] u[i] + upper[i] u[i+1];
/// lower[0] and upper[m-1] are ignored.
///
/// The factorization is computed once; solve() can then be called repeatedly
/// with new right-hand sides (one time step each, for the PDE).
class BlockTridiagonal2 {
public:
    /// Throws NumericalError when a pivot block is singular.
    BlockTridiagonal2(std::vector<Block2> lower, std::vector<Block2> diag,
                      std::vector<Block2> upper);

    /// Constant blocks along the whole system.
    static BlockTridiagonal2 uniform(std::size_t m, const Block2& lower, const Block2& diag,
                                     const Block2& upper);

    std::size_t size() const { return pivot_inv_.size(); }

    /// Solves in place. `first` and `second` hold the two components of the
    /// right-hand side at each block row and receive the solution.
    void solve(std::span<double> first, std::span<double> second) const;

private:
    std::vector<Block2> lower_;
    std::vector<Block2> pivot_inv_;  // inverse of the eliminated diagonal blocks
    std::vector<Block2> upper_mod_;  // pivot_inv[i] * upper[i]
};

}  // namespace abp

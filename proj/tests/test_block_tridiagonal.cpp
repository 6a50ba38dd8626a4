#include <cmath>
#include <vector>

#include "doctest.h"
#include "generators.hpp"

#include "abp/block_tridiagonal.hpp"
#include "abp/errors.hpp"

using abp::Block2;

TEST_SUITE("block_tridiagonal") {

TEST_CASE("random diagonally dominant systems reproduce a known solution") {
    gen::Gen g(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t m = static_cast<std::size_t>(g.integer(1, 60));
        auto blk = [&] { return Block2{g.uniform(-1, 1), g.uniform(-1, 1), g.uniform(-1, 1), g.uniform(-1, 1)}; };
        std::vector<Block2> lo(m), di(m), up(m);
        for (std::size_t i = 0; i < m; ++i) {
            lo[i] = blk();
            up[i] = blk();
            di[i] = blk();
            di[i].a += 6.0;
            di[i].d += 6.0;
        }
        const auto u = g.vector(m, -1, 1), v = g.vector(m, -1, 1);
        std::vector<double> r1(m), r2(m);
        for (std::size_t i = 0; i < m; ++i) {
            auto apply = [&](const Block2& b, std::size_t j) {
                r1[i] += b.a * u[j] + b.b * v[j];
                r2[i] += b.c * u[j] + b.d * v[j];
            };
            apply(di[i], i);
            if (i > 0) apply(lo[i], i - 1);
            if (i + 1 < m) apply(up[i], i + 1);
        }
        abp::BlockTridiagonal2 sys(lo, di, up);
        sys.solve(r1, r2);
        for (std::size_t i = 0; i < m; ++i) {
            CHECK(r1[i] == doctest::Approx(u[i]).epsilon(1e-12));
            CHECK(r2[i] == doctest::Approx(v[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("singular pivot is reported") {
    CHECK_THROWS_AS(abp::BlockTridiagonal2::uniform(4, {}, {1, 2, 2, 4}, {}), abp::NumericalError);
}

}

#include <cmath>
#include <limits>

#include "doctest.h"
#include "generators.hpp"

#include "abp/errors.hpp"
#include "abp/model.hpp"

using abp::DimensionalParams;
using abp::ModelParams;

TEST_SUITE("model") {

TEST_CASE("nondimensionalize examples") {
    auto p = abp::nondimensionalize({1, 1, 1, 1, 0.5, 0});
    CHECK(p.pe == 1.0);
    CHECK(p.beta == 1.0);
    CHECK(p.eta == 0.5);
    CHECK(p.x0 == 0.0);

    p = abp::nondimensionalize({0, 2, 1, 1, 1, 0.5});
    CHECK(p.pe == 0.0);
    CHECK(p.beta == 0.5);
    CHECK(p.eta == 1.0);
    CHECK(p.x0 == 0.5);

    // pe = 0.2 * 2 / 0.1, beta = 4 / (5 * 0.1), x0 = -1 / 2
    p = abp::nondimensionalize({0.2, 0.1, 2, 5, 0.5, -1});
    CHECK(p.pe == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(p.beta == doctest::Approx(8.0).epsilon(1e-15));
    CHECK(p.x0 == -0.5);
}

TEST_CASE("redimensionalize examples") {
    CHECK(abp::redimensionalize_mfpt(0.5, {0, 1, 1, 1, 0.5, 0}) == 0.5);
    CHECK(abp::redimensionalize_mfpt(0.5, {0, 1, 2, 1, 0.5, 0}) == 2.0);
    CHECK(abp::redimensionalize_mfpt(0.5, {0, 0.5, 3, 1, 0.5, 0}) == 9.0);
    CHECK_THROWS_AS(abp::redimensionalize_mfpt(-1.0, {}), abp::ValidationError);
}

TEST_CASE("scaling identities hold for random inputs") {
    gen::Gen g(11);
    for (int i = 0; i < 500; ++i) {
        DimensionalParams d;
        d.v_s = g.uniform(0, 10);
        d.D_T = g.uniform(0.01, 10);
        d.R = g.uniform(0.01, 10);
        d.tau = g.uniform(0.01, 10);
        d.eta = g.uniform(0, 1);
        d.x0_dim = g.uniform(-d.R, d.R);
        const auto p = abp::nondimensionalize(d);
        CHECK(p.pe * d.D_T == doctest::Approx(d.v_s * d.R).epsilon(1e-14));
        CHECK(p.beta * d.tau * d.D_T == doctest::Approx(d.R * d.R).epsilon(1e-14));
        CHECK(abp::redimensionalize_mfpt(1.0, d) == d.R * d.R / d.D_T);
        CHECK_NOTHROW(abp::validate(p));
    }
}

TEST_CASE("validation names the offending field") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto field = [](ModelParams p) {
        try {
            abp::validate(p);
        } catch (const abp::ValidationError& e) {
            return e.field();
        }
        return std::string("ok");
    };
    CHECK(field({0, 1, 0.5, 0}) == "ok");
    CHECK(field({-0.1, 1, 0.5, 0}) == "pe");
    CHECK(field({0, 0, 0.5, 0}) == "beta");
    CHECK(field({0, 1, 1.5, 0}) == "eta");
    CHECK(field({0, 1, 0.5, 1.01}) == "x0");
    CHECK(field({nan, 1, 0.5, 0}) == "pe");
    CHECK(field({0, 1, 0.5, -1}) == "ok");

    CHECK_THROWS_AS(abp::validate(DimensionalParams{0, 0, 1, 1, 0.5, 0}), abp::ValidationError);
    CHECK_THROWS_AS(abp::validate(DimensionalParams{0, 1, 2, 1, 0.5, 2.5}), abp::ValidationError);
    CHECK_THROWS_AS(abp::validate(DimensionalParams{-1, 1, 1, 1, 0.5, 0}), abp::ValidationError);
    CHECK_NOTHROW(abp::validate(DimensionalParams{0, 1, 2.5, 1, 0.5, 0}));  // non-integer R
}

TEST_CASE("mirrored") {
    const ModelParams p{0.3, 2.0, 0.8, 0.4};
    const auto m = p.mirrored();
    CHECK(m.pe == 0.3);
    CHECK(m.beta == 2.0);
    CHECK(m.eta == doctest::Approx(0.2));
    CHECK(m.x0 == -0.4);
}

}

#include <cmath>

#include "doctest.h"
#include "generators.hpp"

#include "abp/errors.hpp"
#include "abp/kernels.hpp"
#include "abp/oracles.hpp"

namespace o = abp::oracles;
using abp::ModelParams;

TEST_SUITE("oracles") {

TEST_CASE("passive BVP reproduces the quadratic exactly") {
    for (double beta : {0.1, 1.0, 10.0}) {
        const auto sol = o::mfpt_bvp({0, beta, 0.5, 0}, 63);
        for (std::size_t i = 0; i < sol.x_nodes.size(); ++i) {
            const double x = sol.x_nodes[i], exact = (1 - x * x) / 2;
            CHECK(std::abs(sol.t_plus[i] - exact) <= 1e-12);
            CHECK(std::abs(sol.t_minus[i] - exact) <= 1e-12);
        }
    }
}

TEST_CASE("BVP structure") {
    gen::Gen g(13);
    for (int i = 0; i < 20; ++i) {
        const auto p = g.params(3.0);
        const auto sol = o::mfpt_bvp(p, 127);
        const std::size_t n = sol.x_nodes.size();
        CHECK(sol.t_plus.front() == 0.0);
        CHECK(sol.t_plus.back() == 0.0);
        CHECK(sol.t_minus.front() == 0.0);
        CHECK(sol.t_minus.back() == 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            CHECK(std::abs(sol.t_plus[k] - sol.t_minus[n - 1 - k]) < 1e-12);
            CHECK(sol.t_plus[k] >= 0.0);
            CHECK(sol.t_minus[k] >= 0.0);
        }
        // The mixture is affine in eta with slope T+ - T-.
        const double x0 = p.x0;
        const double m0 = sol.mfpt(x0, 0.0), m1 = sol.mfpt(x0, 1.0), mh = sol.mfpt(x0, 0.3);
        CHECK(m1 - m0 == doctest::Approx(sol.plus_at(x0) - sol.minus_at(x0)).epsilon(1e-12));
        CHECK(mh == doctest::Approx(m0 + 0.3 * (m1 - m0)).epsilon(1e-12));
    }
}

TEST_CASE("swimming right from the right half shortens the MFPT") {
    CHECK(o::mfpt_bvp_extrapolated({0.5, 1.0, 1.0, 0.5}, 255) < 0.375);
}

TEST_CASE("BVP grid convergence is second order") {
    const ModelParams p{0.8, 1.0, 1.0, 0.5};
    const double ref = o::mfpt_bvp(p, 4095).mfpt(0.5, 1.0);
    double prev = 0.0;
    for (int nx : {63, 127, 255}) {
        const double err = std::abs(o::mfpt_bvp(p, nx).mfpt(0.5, 1.0) - ref);
        if (prev > 0.0) {
            CHECK(prev / err > 3.5);
            CHECK(prev / err < 4.5);
        }
        prev = err;
    }
    CHECK_THROWS_AS(o::mfpt_bvp(p, 8), abp::ValidationError);
}

TEST_CASE("Monte Carlo passive start at the centre") {
    o::McConfig mc;
    mc.n_particles = 20000;
    const auto r = o::mfpt_mc({0, 1, 0.5, 0}, mc);
    CHECK(std::abs(r.mean_fpt - 0.5) <= 3 * r.std_err);
    const double n = static_cast<double>(r.n_escaped_left + r.n_escaped_right);
    CHECK(n == mc.n_particles);
    CHECK(std::abs(r.n_escaped_right - n / 2) <= 3 * std::sqrt(n) / 2);
}

TEST_CASE("Monte Carlo drift bias") {
    o::McConfig mc;
    mc.n_particles = 20000;
    const auto r = o::mfpt_mc({0.5, 1, 1.0, 0}, mc);
    const double n = static_cast<double>(mc.n_particles);
    CHECK(r.n_escaped_right - r.n_escaped_left > 5 * std::sqrt(n));
}

TEST_CASE("Monte Carlo determinism") {
    o::McConfig mc;
    mc.n_particles = 4000;
    mc.streams = 4;
    const ModelParams p{0.6, 2, 0.8, 0.2};
    const auto a = o::mfpt_mc(p, mc);
    mc.threads = 4;
    const auto b = o::mfpt_mc(p, mc);
    CHECK(a.mean_fpt == b.mean_fpt);
    CHECK(a.std_err == b.std_err);
    CHECK(a.n_escaped_left == b.n_escaped_left);
    mc.seed += 1;
    CHECK(o::mfpt_mc(p, mc).mean_fpt != a.mean_fpt);

    const auto edge = o::mfpt_mc({0.6, 2, 0.8, 1.0}, mc);
    CHECK(edge.mean_fpt == 0.0);
    CHECK(edge.n_escaped_right == mc.n_particles);

    mc.n_particles = 0;
    CHECK_THROWS_AS(o::mfpt_mc(p, mc), abp::ValidationError);
}

TEST_CASE("Monte Carlo estimate does not depend on the kernel backend") {
    namespace k = abp::kernels;
    if (!k::backend_available(k::Backend::avx2)) return;
    const auto before = k::active_backend();
    o::McConfig mc;
    mc.n_particles = 3000;
    const ModelParams p{1.5, 2, 0.7, -0.3};
    k::set_backend(k::Backend::scalar);
    const auto a = o::mfpt_mc(p, mc);
    k::set_backend(k::Backend::avx2);
    const auto b = o::mfpt_mc(p, mc);
    k::set_backend(before);
    CHECK(a.mean_fpt == b.mean_fpt);
    CHECK(a.std_err == b.std_err);
    CHECK(a.n_escaped_left == b.n_escaped_left);
}

}

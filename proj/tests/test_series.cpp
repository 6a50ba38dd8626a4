#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "generators.hpp"

#include "abp/errors.hpp"
#include "abp/oracles.hpp"
#include "abp/pde.hpp"
#include "abp/series.hpp"

namespace s = abp::series;
using abp::ModelParams;
using boost::math::quadrature::gauss_kronrod;

namespace {

const s::SeriesConfig kCfg{};

double quad(auto f, double a, double b, double tol = 1e-12) {
    return gauss_kronrod<double, 61>::integrate(f, a, b, 8, tol);
}

// Integral of the survival term over [0, inf); the integrand has decayed
// below 1e-14 well before t = 16.
double time_integral(auto f) {
    double total = 0.0;
    const double cuts[] = {0.0, 1e-3, 0.01, 0.1, 0.5, 2.0, 6.0, 16.0};
    for (int i = 0; i + 1 < 8; ++i) total += quad(f, cuts[i], cuts[i + 1], 1e-9);
    return total;
}

double bvp(const ModelParams& p) { return abp::oracles::mfpt_bvp_extrapolated(p, 1023); }

// mu at a signed Pe: reversing the swim direction swaps the orientation labels.
double bvp_signed(ModelParams p, double pe) {
    p.pe = std::abs(pe);
    if (pe < 0.0) p.eta = 1.0 - p.eta;
    return bvp(p);
}

// Closed form of the two-rate convolution, kept separate from the library.
long double conv_oracle(long double a, long double b, long double t) {
    if (std::abs(b - a) * t < 1e-6L) return t * std::exp(-a * t) * (1 - (b - a) * t / 2);
    return (std::exp(-a * t) - std::exp(-b * t)) / (b - a);
}

}  // namespace

TEST_SUITE("series") {

TEST_CASE("eigenvalues") {
    CHECK(s::lambda2(0) == 0.0);
    for (int n = 0; n < 200; ++n) {
        CHECK(s::lambda1(n) == (2 * n + 1) * s::kPi / 2);
        CHECK(s::lambda2(n) == n * s::kPi);
        if (n > 0) CHECK(s::lambda1(n) > s::lambda1(n - 1));
        CHECK(s::chi1_sq(n, 0.7) - s::lambda1(n) * s::lambda1(n) == doctest::Approx(1.4));
        CHECK(s::chi2_sq(n, 0.7) > s::lambda2(n) * s::lambda2(n));
    }
}

TEST_CASE("coefficient examples") {
    CHECK(s::coeff_A(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(s::coeff_A(1, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(s::coeff_B(0, 0) == 0.0);
    for (int m = 0; m < 500; ++m) CHECK(s::coeff_B(m, 0) == 0.0);
}

TEST_CASE("coefficients match quadrature of the projection integrals") {
    for (int m = 0; m < 20; ++m)
        for (int n = 0; n < 20; ++n) {
            const double a = s::kPi / 2 * quad([&](double x) { return std::cos(s::lambda2(m) * x) * std::cos(s::lambda1(n) * x); }, -1, 1);
            const double b = s::kPi / 2 * quad([&](double x) { return std::sin(s::lambda1(m) * x) * std::sin(s::lambda2(n) * x); }, -1, 1);
            CHECK(std::abs(s::coeff_A(m, n) - a) <= 1e-10);
            CHECK(std::abs(s::coeff_B(m, n) - b) <= 1e-10);
        }
}

TEST_CASE("mu0 examples and truncation convergence") {
    CHECK(std::abs(s::mu0(1.0, kCfg)) < 1e-12);
    CHECK(std::abs(s::mu0(-1.0, kCfg)) < 1e-12);
    for (double x0 : {0.0, 0.25, -0.25, 0.5, -0.5, 0.75, -0.75}) {
        const double exact = (1 - x0 * x0) / 2;
        CHECK(std::abs(s::mu0(x0, kCfg) - exact) <= 1e-5);
        double prev = 1.0;
        for (int n : {5, 20, 80, 320}) {
            const double err = std::abs(s::mu0(x0, {n, 1e-9, s::Summation::compensated}) - exact);
            CHECK(err < prev);
            prev = err;
        }
    }
    gen::Gen g(21);
    for (int i = 0; i < 100; ++i) CHECK(s::mu0(g.uniform(-1, 1), kCfg) >= 0.0);
}

TEST_CASE("mu1 vanishes term by term") {
    for (double eta : {0.0, 0.25, 1.0})
        for (double beta : {0.1, 1.0, 10.0}) CHECK(s::mu1({0.3, beta, eta, 0.0}, kCfg) == 0.0);
    for (double x0 : {-0.75, -0.25, 0.25, 0.75}) CHECK(s::mu1({0.3, 1.0, 0.5, x0}, kCfg) == 0.0);
}

TEST_CASE("mu2 is even in x0 and damped by tumbling") {
    gen::Gen g(8);
    for (int i = 0; i < 20; ++i) {
        const double x0 = g.uniform(-1, 1), beta = g.uniform(0.1, 10);
        CHECK(s::mu2(x0, beta, kCfg) == s::mu2(-x0, beta, kCfg));
    }
    const double m10 = s::mu2(0.5, 10.0, kCfg), m1 = s::mu2(0.5, 1.0, kCfg);
    CHECK(m10 < 0.0);
    CHECK(std::abs(m10) < std::abs(m1));
}

TEST_CASE("factored sums equal the literal double and triple sums") {
    const s::SeriesConfig cfg{30};
    const double pi = std::acos(-1.0);
    gen::Gen g(21);
    for (int trial = 0; trial < 5; ++trial) {
        const ModelParams p{0.4, g.uniform(0.1, 10), g.uniform(0, 1), g.uniform(-1, 1)};
        long double m1 = 0, m2 = 0;
        for (int n = 0; n < 30; ++n) {
            const double l1 = s::lambda1(n), sgn = n % 2 ? -1.0 : 1.0;
            for (int m = 0; m < 30; ++m) {
                const double l2 = s::lambda2(m);
                m1 += 2 * sgn / (l1 * l1 * l1) * 2 * m * (1 - 2 * p.eta) * s::coeff_A(m, n) /
                      (2 * p.beta + l2 * l2) * std::sin(l2 * p.x0);
                for (int k = 0; k < 30; ++k)
                    m2 += 8 / (pi * pi) * -sgn / (l1 * l1 * l1) * (l2 / s::chi2_sq(m, p.beta)) *
                          s::coeff_A(m, n) * s::coeff_B(k, m) * std::cos(s::lambda1(k) * p.x0) /
                          s::lambda1(k);
            }
        }
        CHECK(s::mu1(p, cfg) == doctest::Approx(static_cast<double>(m1)).epsilon(1e-12));
        CHECK(s::mu2(p.x0, p.beta, cfg) == doctest::Approx(static_cast<double>(m2)).epsilon(1e-12));
    }
}

TEST_CASE("reflection symmetry of the expansion is exact") {
    gen::Gen g(4);
    for (int i = 0; i < 25; ++i) {
        const auto p = g.params();
        const auto a = s::mfpt_series(p, kCfg), b = s::mfpt_series(p.mirrored(), kCfg);
        CHECK(a.mu0 == b.mu0);
        // 1 - 2(1 - eta) and -(1 - 2 eta) may differ in the last bit.
        CHECK(a.mu1 == doctest::Approx(b.mu1).epsilon(1e-13).scale(1e-16));
        CHECK(a.mu2 == b.mu2);
        CHECK(a.three_term() == doctest::Approx(b.three_term()).epsilon(1e-14));
    }
}

TEST_CASE("totals") {
    const auto passive = s::mfpt_series({0.0, 3.0, 0.9, 0.2}, kCfg);
    CHECK(passive.two_term() == passive.mu0);
    CHECK(passive.three_term() == passive.mu0);
    const auto centred = s::mfpt_series({0.5, 1.0, 0.5, 0.0}, kCfg);
    CHECK(centred.two_term() == centred.mu0);
    CHECK(centred.mu0 == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("perturbation coefficients match finite differences of the BVP") {
    {
        const ModelParams p{0.0, 1.0, 1.0, 0.5};
        const double h = 1e-3;
        const double fd1 = (bvp_signed(p, h) - bvp_signed(p, -h)) / (2 * h);
        CHECK(std::abs(s::mu1(p, kCfg) - fd1) <= 1e-4);
    }
    for (auto p : {ModelParams{0.0, 1.0, 0.5, 0.0}, ModelParams{0.0, 1.0, 1.0, 0.5}}) {
        const double mu_0 = bvp(p);
        auto d2 = [&](double h) { return (bvp_signed(p, h) - 2 * mu_0 + bvp_signed(p, -h)) / (2 * h * h); };
        const double fd2 = (4 * d2(5e-3) - d2(1e-2)) / 3;
        CHECK(std::abs(s::mu2(p.x0, p.beta, kCfg) - fd2) <= 1e-3);
    }
}

TEST_CASE("S0 limits") {
    // Single-mode dominance at late time.
    for (double x0 : {0.0, 0.3, -0.6}) {
        const double lead = 4 / s::kPi * std::cos(s::kPi * x0 / 2) * std::exp(-s::kPi * s::kPi / 2);
        CHECK(s::survival_S0(2.0, x0, kCfg) / lead == doctest::Approx(1.0).epsilon(1e-8));
    }
    CHECK(std::abs(s::survival_S0(0.0, 0.0, {10000, 1e-9, s::Summation::compensated}) - 1.0) <= 1e-3);
    CHECK(s::t_min_reliable(kCfg) > 0.0);
    CHECK_FALSE(s::survival_reliable(0.0, kCfg));
    CHECK(s::survival_reliable(0.01, kCfg));
}

TEST_CASE("first- and second-order survival terms vanish where they must") {
    gen::Gen g(9);
    for (int i = 0; i < 5; ++i) {
        auto p = g.params();
        CHECK(std::abs(s::survival_S1(0.0, p, kCfg)) <= 1e-14);
        CHECK(std::abs(s::survival_S2(0.0, p.x0, p.beta, kCfg)) <= 1e-14);
        p.eta = 0.5;
        CHECK(s::survival_S1(g.uniform(0, 2), p, kCfg) == 0.0);
        const double t = g.uniform(0.01, 1);
        CHECK(s::survival_S2(t, p.x0, p.beta, kCfg) == doctest::Approx(s::survival_S2(t, -p.x0, p.beta, kCfg)).epsilon(1e-13));
    }
    const s::SurvivalSeries passive({0.0, 1.0, 1.0, 0.4}, kCfg);
    CHECK(passive.total(0.3, 2) == passive.s0(0.3));
}

TEST_CASE("time integrals of the survival terms reproduce the MFPT coefficients") {
    for (auto p : {ModelParams{0, 1.0, 1.0, 0.5}, ModelParams{0, 0.3, 0.1, -0.2}, ModelParams{0, 10.0, 0.8, 0.7}}) {
        const s::SurvivalSeries ss(p, kCfg);
        const auto mu = s::mfpt_series(p, kCfg);
        CHECK(std::abs(time_integral([&](double t) { return ss.s0(t); }) - mu.mu0) <= 1e-4);
        CHECK(std::abs(time_integral([&](double t) { return ss.s1(t); }) - mu.mu1) <= 1e-4);
        CHECK(std::abs(time_integral([&](double t) { return ss.s2(t); }) - mu.mu2) <= 1e-4);
    }
}

TEST_CASE("exponential convolutions") {
    // Direct quadrature of the defining integrals.
    const double t = 0.7;
    for (auto [a, b] : {std::pair{1.0, 3.0}, {2.0, 2.0}, {5.0, 5.0 + 1e-12}, {0.0, 40.0}}) {
        const double ref = quad([&](double u) { return std::exp(-a * u - b * (t - u)); }, 0, t);
        CHECK(s::exp_convolution(a, b, t, 1e-9) == doctest::Approx(ref).epsilon(1e-12));
    }
    for (auto [a, b, c] : {std::tuple{1.0, 3.0, 7.0}, {2.0, 2.0, 2.0}, {4.0, 4.0 + 1e-10, 9.0}, {0.5, 30.0, 30.0}}) {
        const double ref = quad([&](double u) {
            return static_cast<double>(conv_oracle(a, b, u)) * std::exp(-c * (t - u));
        }, 0, t);
        CHECK(s::exp_convolution3(a, b, c, t, 1e-9) == doctest::Approx(ref).epsilon(1e-11));
        CHECK(s::exp_convolution3(c, a, b, t, 1e-9) == doctest::Approx(ref).epsilon(1e-11));
    }
}

TEST_CASE("resonant tumbling rates give finite, continuous results") {
    // chi2(1)^2 == lambda1(1)^2 and chi1(0)^2 == lambda2(1)^2 type coincidences.
    const double l1 = s::lambda1(1), l2 = s::lambda2(1), l0 = s::lambda1(0);
    for (double beta : {(l1 * l1 - l2 * l2) / 2, (l2 * l2 - l0 * l0) / 2}) {
        for (double t : {0.05, 0.3}) {
            const ModelParams at{0.0, beta, 1.0, 0.3}, near{0.0, beta * (1 + 1e-7), 1.0, 0.3};
            const double s1 = s::survival_S1(t, at, kCfg), s2 = s::survival_S2(t, at.x0, at.beta, kCfg);
            CHECK(std::isfinite(s1));
            CHECK(std::isfinite(s2));
            CHECK(s1 == doctest::Approx(s::survival_S1(t, near, kCfg)).epsilon(1e-5));
            CHECK(s2 == doctest::Approx(s::survival_S2(t, near.x0, near.beta, kCfg)).epsilon(1e-5));
            const s::FieldSeries fs(at, kCfg);
            CHECK(std::isfinite(fs.n2(0.2, t)));
        }
    }
}

TEST_CASE("plain and compensated summation agree") {
    const ModelParams p{0.4, 1.0, 1.0, 0.5};
    const auto a = s::mfpt_series(p, kCfg), b = s::mfpt_series(p, {100, 1e-9, s::Summation::plain});
    CHECK(a.mu1 == doctest::Approx(b.mu1).epsilon(1e-12));
    CHECK(a.mu2 == doctest::Approx(b.mu2).epsilon(1e-12));
}

TEST_CASE("fields integrate to the survival terms") {
    const ModelParams p{0.0, 1.0, 1.0, 0.5};
    const s::FieldSeries fs(p, kCfg);
    const s::SurvivalSeries ss(p, kCfg);
    const double t = 0.1;
    CHECK(quad([&](double x) { return fs.n0(x, t); }, -1, 1, 1e-11) == doctest::Approx(ss.s0(t)).epsilon(1e-10));
    CHECK(quad([&](double x) { return fs.n1(x, t); }, -1, 1, 1e-12) == doctest::Approx(ss.s1(t)).epsilon(1e-9));
    CHECK(quad([&](double x) { return fs.n2(x, t); }, -1, 1, 1e-12) == doctest::Approx(ss.s2(t)).epsilon(1e-9));
    CHECK(quad([&](double x) { return s::field_n0(x, t, 0.0, kCfg); }, -1, 1, 1e-12) ==
          doctest::Approx(s::survival_S0(t, 0.0, kCfg)).epsilon(1e-10));
    for (double x : {-0.7, 0.0, 0.4}) CHECK(s::field_f0(x, t, {0.0, 2.0, 0.5, 0.1}, kCfg) == 0.0);
    CHECK_THROWS_AS(fs.n1(0.0, 0.0), abp::ValidationError);
}

TEST_CASE("fields match finite differences of the PDE in Pe") {
    const ModelParams p0{0.0, 1.0, 1.0, 0.5};
    const double t = 0.2;
    const abp::pde::GridConfig grid{};
    auto at = [](const std::vector<double>& v, const abp::pde::FieldState& st, double x) {
        return v[static_cast<std::size_t>(std::lround((x + 1) / st.spacing()))];
    };
    const s::FieldSeries fs(p0, kCfg);
    const auto base = abp::pde::evolve_to(p0, grid, t);

    const double h = 1e-3;
    auto ph = p0;
    ph.pe = h;
    const auto up = abp::pde::evolve_to(ph, grid, t);
    for (double x : {0.3, -0.6}) {
        CAPTURE(x);
        CHECK(std::abs(fs.n1(x, t) - (abp::pde::density_at(up, x) - abp::pde::density_at(base, x)) / h) <= 1e-3);
        CHECK(std::abs(fs.f1(x, t) - (at(up.f_values, up, x) - at(base.f_values, base, x)) / h) <= 1e-3);
    }
    CHECK(s::field_n1(0.3, t, p0, kCfg) == fs.n1(0.3, t));

    // Second difference; the negative-Pe run is the same swimmer with orientation labels swapped.
    const double h2 = 0.02;
    auto pp = p0, pm = p0;
    pp.pe = pm.pe = h2;
    pm.eta = 1.0 - p0.eta;
    const auto a = abp::pde::evolve_to(pp, grid, t), b = abp::pde::evolve_to(pm, grid, t);
    for (double x : {0.3, -0.6}) {
        const double fd = (at(a.n_values, a, x) - 2 * at(base.n_values, base, x) + at(b.n_values, b, x)) / (2 * h2 * h2);
        CHECK(std::abs(fs.n2(x, t) - fd) <= 1e-3);
    }
}

}

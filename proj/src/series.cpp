#include "abp/series.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "abp/errors.hpp"
#include "abp/kernels.hpp"

namespace abp::series {
namespace {

// Pairs (k, m) whose rate gap falls below this are kept out of the split
// dot-product form of the second-order sums.
constexpr double kSplitGap = 1.0;

double sign_pow(int k) { return (k % 2 == 0) ? 1.0 : -1.0; }

double dot(std::span<const double> a, std::span<const double> b, const SeriesConfig& cfg) {
    return cfg.summation == Summation::compensated ? kernels::dot_compensated(a, b)
                                                   : kernels::dot(a, b);
}

double sum(std::span<const double> a, const SeriesConfig& cfg) {
    if (cfg.summation == Summation::compensated) return kernels::sum_compensated(a);
    double s = 0.0;
    for (double v : a) s += v;
    return s;
}

void require_position(const char* field, double x) {
    if (!std::isfinite(x) || x < -1.0 || x > 1.0) throw ValidationError(field, "must lie in [-1, 1]");
}

void require_time(double t) {
    if (!std::isfinite(t) || t < 0.0) throw ValidationError("t", "must be finite and >= 0");
}

void require_beta(double beta) {
    if (!std::isfinite(beta) || beta <= 0.0) throw ValidationError("beta", "must be > 0");
}

// exp_convolution with e^{-a t}, e^{-b t} already known.
double conv_known(double a, double b, double ea, double eb, double t, double eps) {
    const double gap = std::abs(b - a);
    const double e_lo = a <= b ? ea : eb;
    if (gap < eps) return t * e_lo;
    if (gap * t < 0.5) return -e_lo * std::expm1(-gap * t) / gap;
    return (ea - eb) / (b - a);
}

std::vector<double> rates(int n, double (*f)(int)) {
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = f(i) * f(i);
    return r;
}

std::vector<double> shifted(std::vector<double> r, double beta) {
    for (double& v : r) v += 2.0 * beta;
    return r;
}

}  // namespace

void validate(const SeriesConfig& cfg) {
    if (cfg.n_terms < 1) throw ValidationError("n_terms", "must be >= 1");
    if (!(cfg.resonance_eps > 0.0)) throw ValidationError("resonance_eps", "must be > 0");
}

double coeff_A(int m, int n) {
    return sign_pow(m + n) / (1.0 + 2.0 * (m + n)) + sign_pow(std::abs(m - n)) / (1.0 - 2.0 * (m - n));
}

double coeff_B(int m, int n) {
    return -sign_pow(m + n) / (1.0 + 2.0 * (m + n)) + sign_pow(std::abs(m - n)) / (1.0 + 2.0 * (m - n));
}

double exp_convolution(double a, double b, double t, double eps) {
    return conv_known(a, b, std::exp(-a * t), std::exp(-b * t), t, eps);
}

double exp_convolution3(double a, double b, double c, double t, double eps) {
    double r[3] = {a, b, c};
    std::sort(r, r + 3);
    const double lo = r[0], mid = r[1], hi = r[2];
    const double spread = hi - lo;
    if (spread * t < 0.5) {
        // e^{-lo t} * sum_{j>=2} (-t)^j / j! * h_{j-2}(u, v), h = complete homogeneous polynomial.
        const double u = mid - lo, v = spread;
        double total = 0.0;
        double coef = t * t / 2.0;  // t^j / j!
        double h = 1.0;             // h_{j-2}(u, v)
        double u_pow = 1.0;         // u^{j-2}
        for (int j = 2; j < 60; ++j) {
            const double term = (j % 2 == 0 ? coef : -coef) * h;
            total += term;
            if (std::abs(term) <= 1e-18 * std::abs(total)) break;
            coef *= t / (j + 1);
            u_pow *= u;
            h = h * v + u_pow;  // h_k(u, v) = v h_{k-1} + u^k
        }
        return std::exp(-lo * t) * total;
    }
    const double e_lo = std::exp(-lo * t), e_mid = std::exp(-mid * t), e_hi = std::exp(-hi * t);
    return (conv_known(lo, mid, e_lo, e_mid, t, eps) - conv_known(mid, hi, e_mid, e_hi, t, eps)) /
           spread;
}

// --- coefficient tables ----------------------------------------------------

CoefficientTables::CoefficientTables(int n_terms) : n_(n_terms) {
    if (n_terms < 1) throw ValidationError("n_terms", "must be >= 1");
    const std::size_t n = static_cast<std::size_t>(n_);
    lambda1_.resize(n);
    lambda2_.resize(n);
    for (int i = 0; i < n_; ++i) {
        lambda1_[i] = series::lambda1(i);
        lambda2_[i] = series::lambda2(i);
    }
    a_.resize(n * n);
    b_.resize(n * n);
    for (int col = 0; col < n_; ++col) {
        for (int row = 0; row < n_; ++row) {
            a_[col * n + row] = coeff_A(row, col);
            b_[col * n + row] = coeff_B(row, col);
        }
    }
}

std::shared_ptr<const CoefficientTables> CoefficientTables::shared(int n_terms) {
    static std::mutex mu;
    static std::map<int, std::shared_ptr<const CoefficientTables>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[n_terms];
    if (!slot) slot = std::make_shared<const CoefficientTables>(n_terms);
    return slot;
}

// --- MFPT coefficients -------------------------------------------------------

double mu0(double x0, const SeriesConfig& cfg) {
    validate(cfg);
    require_position("x0", x0);
    std::vector<double> w(cfg.n_terms), c(cfg.n_terms);
    for (int n = 0; n < cfg.n_terms; ++n) {
        const double l = lambda1(n);
        w[n] = 2.0 * sign_pow(n) / (l * l * l);
        c[n] = std::cos(l * x0);
    }
    return dot(w, c, cfg);
}

double mu1(const ModelParams& params, const SeriesConfig& cfg) {
    validate(params);
    validate(cfg);
    const auto tables = CoefficientTables::shared(cfg.n_terms);
    const int N = cfg.n_terms;
    const double bias = 1.0 - 2.0 * params.eta;
    std::vector<double> v(N);
    for (int m = 0; m < N; ++m) {
        const double l2 = lambda2(m);
        v[m] = 2.0 * m * bias * std::sin(l2 * params.x0) / (2.0 * params.beta + l2 * l2);
    }
    std::vector<double> inner(N), outer(N);
    for (int n = 0; n < N; ++n) {
        const double l1 = lambda1(n);
        inner[n] = dot(tables->A_column(n), v, cfg);
        outer[n] = 2.0 * sign_pow(n) / (l1 * l1 * l1);
    }
    return dot(outer, inner, cfg);
}

double mu2(double x0, double beta, const SeriesConfig& cfg) {
    validate(cfg);
    require_position("x0", x0);
    require_beta(beta);
    const auto tables = CoefficientTables::shared(cfg.n_terms);
    const int N = cfg.n_terms;
    std::vector<double> w(N);
    for (int k = 0; k < N; ++k) w[k] = std::cos(lambda1(k) * x0) / lambda1(k);
    std::vector<double> y(N);
    for (int m = 0; m < N; ++m) {
        y[m] = lambda2(m) / chi2_sq(m, beta) * dot(tables->B_column(m), w, cfg);
    }
    std::vector<double> inner(N), outer(N);
    for (int n = 0; n < N; ++n) {
        const double l1 = lambda1(n);
        inner[n] = dot(tables->A_column(n), y, cfg);
        outer[n] = 8.0 / (kPi * kPi) * sign_pow(n + 1) / (l1 * l1 * l1);
    }
    return dot(outer, inner, cfg);
}

SeriesMFPT mfpt_series(const ModelParams& params, const SeriesConfig& cfg) {
    validate(params);
    SeriesMFPT out;
    out.params = params;
    out.config = cfg;
    out.mu0 = mu0(params.x0, cfg);
    out.mu1 = mu1(params, cfg);
    out.mu2 = mu2(params.x0, params.beta, cfg);
    return out;
}

// --- mode-amplitude plans ----------------------------------------------------

namespace detail {

std::vector<double> FirstOrderPlan::evaluate(double t, const SeriesConfig& cfg) const {
    const int N = size;
    std::vector<double> ec(N), eL(N);
    for (int i = 0; i < N; ++i) {
        ec[i] = std::exp(-c[i] * t);
        eL[i] = std::exp(-L[i] * t);
    }
    std::vector<double> out(N), kernel(N);
    for (int n = 0; n < N; ++n) {
        for (int m = 0; m < N; ++m) kernel[m] = conv_known(c[m], L[n], ec[m], eL[n], t, cfg.resonance_eps);
        out[n] = dot({weight.data() + static_cast<std::size_t>(n) * N, static_cast<std::size_t>(N)},
                     kernel, cfg);
    }
    return out;
}

SecondOrderPlan::SecondOrderPlan(int n, std::vector<double> a_, std::vector<double> c_,
                                 std::vector<double> L_, std::vector<double> outer_,
                                 std::span<const double> inner)
    : size(n), a(std::move(a_)), c(std::move(c_)), L(std::move(L_)), outer(std::move(outer_)) {
    const std::size_t N = static_cast<std::size_t>(n);
    regular.assign(N * N, 0.0);
    regular_sum.assign(N, 0.0);
    resonant.resize(N);
    for (std::size_t m = 0; m < N; ++m) {
        for (std::size_t k = 0; k < N; ++k) {
            const double w = inner[m * N + k];
            const double gap = c[m] - a[k];
            if (std::abs(gap) < kSplitGap) {
                if (w != 0.0) resonant[m].emplace_back(static_cast<int>(k), w);
            } else {
                regular[m * N + k] = w / gap;
            }
        }
    }
}

std::vector<double> SecondOrderPlan::evaluate(double t, const SeriesConfig& cfg) const {
    const int N = size;
    const std::size_t Ns = static_cast<std::size_t>(N);
    const double eps = cfg.resonance_eps;
    std::vector<double> ea(N), ec(N), eL(N);
    for (int i = 0; i < N; ++i) {
        ea[i] = std::exp(-a[i] * t);
        ec[i] = std::exp(-c[i] * t);
        eL[i] = std::exp(-L[i] * t);
    }
    // dot(regular[m], conv(a, L_n)) - conv(c_m, L_n) regular_sum[m] + resonant terms
    std::vector<double> e1(N), g(N), out(N);
    for (int n = 0; n < N; ++n) {
        for (int k = 0; k < N; ++k) e1[k] = conv_known(a[k], L[n], ea[k], eL[n], t, eps);
        for (int m = 0; m < N; ++m) {
            double v = dot({regular.data() + m * Ns, Ns}, e1, cfg) -
                       conv_known(c[m], L[n], ec[m], eL[n], t, eps) * regular_sum[m];
            for (const auto& [k, w] : resonant[m]) v += w * exp_convolution3(a[k], c[m], L[n], t, eps);
            g[m] = v;
        }
        out[n] = dot({outer.data() + n * Ns, Ns}, g, cfg);
    }
    return out;
}

}  // namespace detail

namespace {

// regular_sum needs the plan's summation mode; filled after construction.
void finish_plan(detail::SecondOrderPlan& plan, const SeriesConfig& cfg) {
    const std::size_t N = static_cast<std::size_t>(plan.size);
    for (std::size_t m = 0; m < N; ++m) plan.regular_sum[m] = sum({plan.regular.data() + m * N, N}, cfg);
}

detail::FirstOrderPlan make_first_order(const CoefficientTables& tables, bool use_A,
                                        std::span<const double> w, std::vector<double> c,
                                        std::vector<double> L) {
    const int N = tables.size();
    detail::FirstOrderPlan plan;
    plan.size = N;
    plan.weight.resize(static_cast<std::size_t>(N) * N);
    for (int n = 0; n < N; ++n) {
        const auto col = use_A ? tables.A_column(n) : tables.B_column(n);
        for (int m = 0; m < N; ++m) plan.weight[static_cast<std::size_t>(n) * N + m] = w[m] * col[m];
    }
    plan.c = std::move(c);
    plan.L = std::move(L);
    return plan;
}

// g-modes: sum_m lambda2(m) A(m,n) sum_k lambda1(k) B(k,m) cos(lambda1(k) x0) conv3(l1k^2, chi2m^2, l1n^2)
detail::SecondOrderPlan make_g_plan(const CoefficientTables& tables, const ModelParams& p,
                                    const SeriesConfig& cfg) {
    const int N = tables.size();
    const std::size_t Ns = static_cast<std::size_t>(N);
    std::vector<double> outer(Ns * Ns), inner(Ns * Ns);
    for (int n = 0; n < N; ++n) {
        const auto col = tables.A_column(n);
        for (int m = 0; m < N; ++m) outer[n * Ns + m] = -4.0 / (kPi * kPi) * lambda2(m) * col[m];
    }
    for (int m = 0; m < N; ++m) {
        const auto col = tables.B_column(m);
        for (int k = 0; k < N; ++k) inner[m * Ns + k] = lambda1(k) * col[k] * std::cos(lambda1(k) * p.x0);
    }
    detail::SecondOrderPlan plan(N, rates(N, lambda1), shifted(rates(N, lambda2), p.beta),
                                 rates(N, lambda1), std::move(outer), inner);
    finish_plan(plan, cfg);
    return plan;
}

// h-modes: sum_m lambda1(m) B(m,n) sum_k lambda2(k) A(k,m) sin(lambda2(k) x0) conv3(l2k^2, chi1m^2, l2n^2)
detail::SecondOrderPlan make_h_plan(const CoefficientTables& tables, const ModelParams& p,
                                    const SeriesConfig& cfg) {
    const int N = tables.size();
    const std::size_t Ns = static_cast<std::size_t>(N);
    std::vector<double> outer(Ns * Ns), inner(Ns * Ns);
    for (int n = 0; n < N; ++n) {
        const auto col = tables.B_column(n);
        for (int m = 0; m < N; ++m) outer[n * Ns + m] = -4.0 / (kPi * kPi) * lambda1(m) * col[m];
    }
    for (int m = 0; m < N; ++m) {
        const auto col = tables.A_column(m);
        for (int k = 0; k < N; ++k) inner[m * Ns + k] = lambda2(k) * col[k] * std::sin(lambda2(k) * p.x0);
    }
    detail::SecondOrderPlan plan(N, rates(N, lambda2), shifted(rates(N, lambda1), p.beta),
                                 rates(N, lambda2), std::move(outer), inner);
    finish_plan(plan, cfg);
    return plan;
}

const ModelParams& checked(const ModelParams& p, const SeriesConfig& cfg) {
    validate(p);
    validate(cfg);
    return p;
}

}  // namespace

// --- survival probability ----------------------------------------------------

double t_min_reliable(const SeriesConfig& cfg) {
    validate(cfg);
    const double l = lambda1(cfg.n_terms);
    const double ratio = 2.0 / (l * 1e-12);
    return ratio <= 1.0 ? 0.0 : std::log(ratio) / (l * l);
}

SurvivalSeries::SurvivalSeries(const ModelParams& params, const SeriesConfig& cfg)
    : params_(checked(params, cfg)),
      cfg_(cfg),
      tables_(CoefficientTables::shared(cfg.n_terms)),
      g_plan_(make_g_plan(*tables_, params_, cfg_)) {
    const int N = cfg.n_terms;
    psi_.resize(N);
    s0_amp_.resize(N);
    std::vector<double> w(N);
    for (int n = 0; n < N; ++n) {
        psi_[n] = 2.0 * sign_pow(n) / lambda1(n);
        s0_amp_[n] = psi_[n] * std::cos(lambda1(n) * params.x0);
        w[n] = (1.0 - 2.0 * params.eta) * 2.0 * n * std::sin(lambda2(n) * params.x0);
    }
    p_plan_ = make_first_order(*tables_, true, w, shifted(rates(N, lambda2), params.beta),
                               rates(N, lambda1));
}

double SurvivalSeries::s0(double t) const {
    require_time(t);
    std::vector<double> e(cfg_.n_terms);
    for (int n = 0; n < cfg_.n_terms; ++n) e[n] = std::exp(-lambda1(n) * lambda1(n) * t);
    return dot(s0_amp_, e, cfg_);
}

double SurvivalSeries::s1(double t) const {
    require_time(t);
    return dot(psi_, p_modes(t), cfg_);
}

double SurvivalSeries::s2(double t) const {
    require_time(t);
    return dot(psi_, g_modes(t), cfg_);
}

double SurvivalSeries::total(double t, int order) const {
    if (order < 0 || order > 2) throw ValidationError("order", "must be 0, 1 or 2");
    double s = s0(t);
    if (order >= 1 && params_.pe != 0.0) s += params_.pe * s1(t);
    if (order >= 2 && params_.pe != 0.0) s += params_.pe * params_.pe * s2(t);
    return s;
}

double survival_S0(double t, double x0, const SeriesConfig& cfg) {
    validate(cfg);
    require_time(t);
    require_position("x0", x0);
    std::vector<double> amp(cfg.n_terms), e(cfg.n_terms);
    for (int n = 0; n < cfg.n_terms; ++n) {
        const double l = lambda1(n);
        amp[n] = 2.0 * sign_pow(n) / l * std::cos(l * x0);
        e[n] = std::exp(-l * l * t);
    }
    return dot(amp, e, cfg);
}

double survival_S1(double t, const ModelParams& params, const SeriesConfig& cfg) {
    return SurvivalSeries(params, cfg).s1(t);
}

double survival_S2(double t, double x0, double beta, const SeriesConfig& cfg) {
    return SurvivalSeries(ModelParams{0.0, beta, 0.5, x0}, cfg).s2(t);
}

// --- fields ------------------------------------------------------------------

FieldSeries::FieldSeries(const ModelParams& params, const SeriesConfig& cfg)
    : survival_(params, cfg),
      h_plan_(make_h_plan(survival_.tables(), params, cfg)) {
    const int N = cfg.n_terms;
    const double bias = 2.0 * params.eta - 1.0;
    std::vector<double> wq(N), wu(N), ww(N);
    for (int m = 0; m < N; ++m) {
        wq[m] = bias * (2.0 * m + 1.0) * std::cos(lambda1(m) * params.x0);
        wu[m] = -2.0 / kPi * lambda2(m) * std::sin(lambda2(m) * params.x0);
        ww[m] = 2.0 / kPi * lambda1(m) * std::cos(lambda1(m) * params.x0);
    }
    const auto& tables = survival_.tables();
    q_plan_ = make_first_order(tables, false, wq, shifted(rates(N, lambda1), params.beta),
                               rates(N, lambda2));
    u_plan_ = make_first_order(tables, true, wu, rates(N, lambda2),
                               shifted(rates(N, lambda1), params.beta));
    w_plan_ = make_first_order(tables, false, ww, rates(N, lambda1),
                               shifted(rates(N, lambda2), params.beta));
}

double FieldSeries::expand(double x, std::span<const double> cos_modes,
                           std::span<const double> sin_modes) const {
    const auto& cfg = survival_.config();
    const int N = cfg.n_terms;
    std::vector<double> basis(2 * static_cast<std::size_t>(N)), modes(2 * static_cast<std::size_t>(N));
    for (int n = 0; n < N; ++n) {
        basis[2 * n] = std::cos(lambda1(n) * x);
        basis[2 * n + 1] = std::sin(lambda2(n) * x);
        modes[2 * n] = cos_modes[n];
        modes[2 * n + 1] = sin_modes[n];
    }
    return dot(basis, modes, cfg);
}

namespace {

double field_zero_order(double x, double t, double x0, double decay, const SeriesConfig& cfg) {
    if (!(t > 0.0)) throw ValidationError("t", "fields are evaluated at t > 0 only");
    require_position("x", x);
    const int N = cfg.n_terms;
    std::vector<double> a(2 * static_cast<std::size_t>(N)), b(2 * static_cast<std::size_t>(N));
    for (int n = 0; n < N; ++n) {
        const double l1 = lambda1(n), l2 = lambda2(n);
        a[2 * n] = std::cos(l1 * x0) * std::cos(l1 * x);
        b[2 * n] = std::exp(-(l1 * l1 + decay) * t);
        a[2 * n + 1] = std::sin(l2 * x0) * std::sin(l2 * x);
        b[2 * n + 1] = std::exp(-(l2 * l2 + decay) * t);
    }
    return dot(a, b, cfg);
}

}  // namespace

double FieldSeries::n0(double x, double t) const {
    return field_zero_order(x, t, survival_.params().x0, 0.0, survival_.config());
}

double FieldSeries::f0(double x, double t) const {
    const auto& p = survival_.params();
    return (2.0 * p.eta - 1.0) * field_zero_order(x, t, p.x0, 2.0 * p.beta, survival_.config());
}

double FieldSeries::n1(double x, double t) const {
    if (!(t > 0.0)) throw ValidationError("t", "fields are evaluated at t > 0 only");
    require_position("x", x);
    const auto& cfg = survival_.config();
    return expand(x, survival_.p_modes(t), q_plan_.evaluate(t, cfg));
}

double FieldSeries::f1(double x, double t) const {
    if (!(t > 0.0)) throw ValidationError("t", "fields are evaluated at t > 0 only");
    require_position("x", x);
    const auto& cfg = survival_.config();
    return expand(x, u_plan_.evaluate(t, cfg), w_plan_.evaluate(t, cfg));
}

double FieldSeries::n2(double x, double t) const {
    if (!(t > 0.0)) throw ValidationError("t", "fields are evaluated at t > 0 only");
    require_position("x", x);
    const auto& cfg = survival_.config();
    return expand(x, survival_.g_modes(t), h_plan_.evaluate(t, cfg));
}

double field_n0(double x, double t, double x0, const SeriesConfig& cfg) {
    validate(cfg);
    require_position("x0", x0);
    return field_zero_order(x, t, x0, 0.0, cfg);
}

double field_f0(double x, double t, const ModelParams& params, const SeriesConfig& cfg) {
    validate(params);
    validate(cfg);
    return (2.0 * params.eta - 1.0) * field_zero_order(x, t, params.x0, 2.0 * params.beta, cfg);
}

double field_n1(double x, double t, const ModelParams& params, const SeriesConfig& cfg) {
    return FieldSeries(params, cfg).n1(x, t);
}

double field_f1(double x, double t, const ModelParams& params, const SeriesConfig& cfg) {
    return FieldSeries(params, cfg).f1(x, t);
}

double field_n2(double x, double t, const ModelParams& params, const SeriesConfig& cfg) {
    return FieldSeries(params, cfg).n2(x, t);
}

}  // namespace abp::series

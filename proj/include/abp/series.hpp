#pragma once

// Weak-swimming eigenfunction series for the survival probability and MFPT.
//
// Eigenfunctions on [-1, 1] with absorbing ends are cos(lambda1(n) x) and
// sin(lambda2(n) x); the orientation field f relaxes 2*beta faster, giving the
// shifted rates chi1_sq / chi2_sq. Every series is truncated to
// SeriesConfig::n_terms terms per summation index.

#include <memory>
#include <utility>
#include <span>
#include <vector>

#include "abp/model.hpp"

namespace abp::series {

enum class Summation { plain, compensated };

struct SeriesConfig {
    int n_terms = 100;
    /// Rate gaps below this are treated as exact coincidences (t * e^{-a t}).
    double resonance_eps = 1e-9;
    Summation summation = Summation::compensated;
};

void validate(const SeriesConfig& cfg);

inline constexpr double kPi = 3.14159265358979323846;

inline double lambda1(int n) { return (2 * n + 1) * kPi / 2.0; }
inline double lambda2(int n) { return n * kPi; }
inline double chi1_sq(int n, double beta) { return lambda1(n) * lambda1(n) + 2.0 * beta; }
inline double chi2_sq(int n, double beta) { return lambda2(n) * lambda2(n) + 2.0 * beta; }

/// (pi/2) * integral of cos(lambda2(m) x) cos(lambda1(n) x) over [-1, 1], closed form.
double coeff_A(int m, int n);
/// (pi/2) * integral of sin(lambda1(m) x) sin(lambda2(n) x) over [-1, 1], closed form.
double coeff_B(int m, int n);

/// integral_0^t e^{-a s} e^{-b (t - s)} ds = (e^{-a t} - e^{-b t}) / (b - a).
/// Falls back to the limit t e^{-a t} when |b - a| < eps.
double exp_convolution(double a, double b, double t, double eps);

/// Triple convolution of e^{-a s}, e^{-b s}, e^{-c s} at time t; equivalently the
/// second divided difference of z -> e^{-z t} over {a, b, c}. Finite for any
/// coincidence among the rates.
double exp_convolution3(double a, double b, double c, double t, double eps);

/// Eigenvalues and coupling coefficients for one truncation, laid out so that
/// every inner series sum is a contiguous dot product. Immutable.
class CoefficientTables {
public:
    explicit CoefficientTables(int n_terms);

    /// Process-wide cache; safe to call concurrently.
    static std::shared_ptr<const CoefficientTables> shared(int n_terms);

    int size() const { return n_; }
    std::span<const double> lambda1() const { return lambda1_; }
    std::span<const double> lambda2() const { return lambda2_; }

    /// A(m, n) for m = 0..N-1.
    std::span<const double> A_column(int n) const {
        return {a_.data() + static_cast<std::size_t>(n) * n_, static_cast<std::size_t>(n_)};
    }
    /// B(k, m) for k = 0..N-1.
    std::span<const double> B_column(int m) const {
        return {b_.data() + static_cast<std::size_t>(m) * n_, static_cast<std::size_t>(n_)};
    }

private:
    int n_;
    std::vector<double> lambda1_, lambda2_;
    std::vector<double> a_, b_;
};

/// The three MFPT coefficients of mu = mu0 + Pe mu1 + Pe^2 mu2 + O(Pe^3).
struct SeriesMFPT {
    double mu0 = 0.0;
    double mu1 = 0.0;
    double mu2 = 0.0;
    ModelParams params;
    SeriesConfig config;

    double two_term() const { return mu0 + params.pe * mu1; }
    double three_term() const { return mu0 + params.pe * mu1 + params.pe * params.pe * mu2; }
};

/// Passive (Brownian) MFPT.
double mu0(double x0, const SeriesConfig& cfg);
/// First-order correction; zero whenever x0 = 0 or eta = 1/2.
double mu1(const ModelParams& params, const SeriesConfig& cfg);
/// Second-order correction; even in x0, independent of eta.
double mu2(double x0, double beta, const SeriesConfig& cfg);

SeriesMFPT mfpt_series(const ModelParams& params, const SeriesConfig& cfg);

/// Earliest time at which the first omitted S0 term drops below 1e-12.
/// Earlier evaluations carry visible truncation (Gibbs) error.
double t_min_reliable(const SeriesConfig& cfg);
inline bool survival_reliable(double t, const SeriesConfig& cfg) { return t >= t_min_reliable(cfg); }

double survival_S0(double t, double x0, const SeriesConfig& cfg);
double survival_S1(double t, const ModelParams& params, const SeriesConfig& cfg);
double survival_S2(double t, double x0, double beta, const SeriesConfig& cfg);

namespace detail {

/// modes(n) = sum_m weight[n][m] * exp_convolution(c[m], L[n], t)
struct FirstOrderPlan {
    int size = 0;
    std::vector<double> weight;  // [n][m]
    std::vector<double> c, L;

    std::vector<double> evaluate(double t, const SeriesConfig& cfg) const;
};

/// modes(n) = sum_m outer[n][m] sum_k inner[m][k] * exp_convolution3(a[k], c[m], L[n], t)
///
/// For well-separated (k, m) pairs the triple convolution is split as
/// (conv(a, L) - conv(c, L)) / (c - a), turning the k-sum into a dot product;
/// near-resonant pairs are evaluated directly.
struct SecondOrderPlan {
    int size = 0;
    std::vector<double> a, c, L;
    std::vector<double> outer;        // [n][m]
    std::vector<double> regular;      // [m][k] inner / (c[m] - a[k]); 0 where resonant
    std::vector<double> regular_sum;  // [m]
    std::vector<std::vector<std::pair<int, double>>> resonant;  // per m: (k, inner)

    SecondOrderPlan(int n, std::vector<double> a, std::vector<double> c, std::vector<double> L,
                    std::vector<double> outer, std::span<const double> inner);
    std::vector<double> evaluate(double t, const SeriesConfig& cfg) const;
};

}  // namespace detail

/// Evaluates S0, S1, S2 repeatedly for one parameter set. Construction does
/// the O(N^2) setup; each S2 evaluation costs O(N^3).
class SurvivalSeries {
public:
    SurvivalSeries(const ModelParams& params, const SeriesConfig& cfg);

    double s0(double t) const;
    double s1(double t) const;
    double s2(double t) const;
    /// S0 + Pe S1 (+ Pe^2 S2), truncated after Pe^order; order in {0, 1, 2}.
    double total(double t, int order) const;

    const ModelParams& params() const { return params_; }
    const SeriesConfig& config() const { return cfg_; }
    const CoefficientTables& tables() const { return *tables_; }

    /// Mode amplitudes of the first- and second-order densities on cos(lambda1(n) x).
    std::vector<double> p_modes(double t) const { return p_plan_.evaluate(t, cfg_); }
    std::vector<double> g_modes(double t) const { return g_plan_.evaluate(t, cfg_); }

private:
    ModelParams params_;
    SeriesConfig cfg_;
    std::shared_ptr<const CoefficientTables> tables_;
    std::vector<double> psi_;     // 2(-1)^n / lambda1(n)
    std::vector<double> s0_amp_;  // psi_n cos(lambda1(n) x0)
    detail::FirstOrderPlan p_plan_;
    detail::SecondOrderPlan g_plan_;
};

/// Pointwise evaluation of the density and polarization fields of each order.
/// Intended for cross-validation, not dense space-time grids. Requires t > 0.
class FieldSeries {
public:
    FieldSeries(const ModelParams& params, const SeriesConfig& cfg);

    double n0(double x, double t) const;
    double f0(double x, double t) const;
    double n1(double x, double t) const;
    double f1(double x, double t) const;
    double n2(double x, double t) const;

private:
    double expand(double x, std::span<const double> cos_modes,
                  std::span<const double> sin_modes) const;

    SurvivalSeries survival_;
    detail::FirstOrderPlan q_plan_, u_plan_, w_plan_;
    detail::SecondOrderPlan h_plan_;
};

double field_n0(double x, double t, double x0, const SeriesConfig& cfg);
double field_f0(double x, double t, const ModelParams& params, const SeriesConfig& cfg);
double field_n1(double x, double t, const ModelParams& params, const SeriesConfig& cfg);
double field_f1(double x, double t, const ModelParams& params, const SeriesConfig& cfg);
double field_n2(double x, double t, const ModelParams& params, const SeriesConfig& cfg);

}  // namespace abp::series

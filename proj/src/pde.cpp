#include "abp/pde.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "abp/compensated.hpp"
#include "abp/errors.hpp"

namespace abp::pde {
namespace {

// S may rise by rounding noise only.
constexpr double kMonotoneTolerance = 1e-12;

std::span<double> interior(std::vector<double>& v) { return {v.data() + 1, v.size() - 2}; }

const ModelParams& checked(const ModelParams& p) {
    validate(p);
    return p;
}

const GridConfig& checked(const GridConfig& g) {
    validate(g);
    return g;
}

// Rate at which mass leaves through both ends: minus the discrete operator
// summed over interior nodes, which telescopes to the two end cells.
double outflux(const FieldState& st, double pe) {
    const std::size_t m = st.n_values.size() - 2;
    const auto& n = st.n_values;
    const auto& f = st.f_values;
    return (n[1] + n[m]) / st.spacing() + 0.5 * pe * (f[m] - f[1]);
}

}  // namespace

void validate(const GridConfig& grid) {
    if (grid.nx < 16) throw ValidationError("nx", "must be >= 16");
    if (!(grid.dt > 0.0) || !std::isfinite(grid.dt)) throw ValidationError("dt", "must be > 0");
    if (!(grid.t_max > 0.0) || !std::isfinite(grid.t_max)) throw ValidationError("t_max", "must be > 0");
    if (!(grid.s_tail > 0.0 && grid.s_tail < 1.0)) throw ValidationError("s_tail", "must lie in (0, 1)");
    if (!(grid.theta >= 0.5 && grid.theta <= 1.0)) throw ValidationError("theta", "must lie in [0.5, 1]");
    if (grid.startup_steps < 0) throw ValidationError("startup_steps", "must be >= 0");
}

double total_mass(const FieldState& state) {
    // Boundary values are zero, so the trapezoid rule is h * (interior sum).
    const std::span<const double> in(state.n_values.data() + 1, state.n_values.size() - 2);
    return state.spacing() * kernels::sum_compensated(in);
}

double density_at(const FieldState& state, double x) {
    const double h = state.spacing();
    const double s = (x + 1.0) / h;
    const std::size_t last = state.x_nodes.size() - 1;
    const std::size_t i = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(s))), last - 1);
    const double w = s - static_cast<double>(i);
    return (1.0 - w) * state.n_values[i] + w * state.n_values[i + 1];
}

FieldState init_delta(const ModelParams& params, const GridConfig& grid) {
    validate(params);
    validate(grid);
    if (std::abs(params.x0) >= 1.0) {
        throw ValidationError("x0", "delta start on the absorbing boundary (MFPT is 0 there)");
    }
    const int total = grid.nx + 2;
    const double h = 2.0 / (grid.nx + 1);
    FieldState st;
    st.x_nodes.resize(total);
    for (int i = 0; i < total; ++i) st.x_nodes[i] = -1.0 + i * h;
    st.x_nodes.back() = 1.0;
    st.n_values.assign(total, 0.0);
    st.f_values.assign(total, 0.0);

    const double s = (params.x0 + 1.0) / h;
    int i = static_cast<int>(std::floor(s));
    double w = s - i;
    if (w > 1.0 - 1e-12) {  // on a node up to rounding
        ++i;
        w = 0.0;
    }
    if (i <= 0) {
        st.n_values[1] = 1.0 / h;
    } else if (i >= grid.nx) {
        st.n_values[grid.nx] = 1.0 / h;
    } else {
        st.n_values[i] = (1.0 - w) / h;
        st.n_values[i + 1] += w / h;
    }
    const double bias = 2.0 * params.eta - 1.0;
    for (int k = 0; k < total; ++k) st.f_values[k] = bias * st.n_values[k];
    return st;
}

Stepper::Stepper(const ModelParams& params, const GridConfig& grid)
    : params_(checked(params)),
      grid_(checked(grid)),
      h_(2.0 / (grid.nx + 1)),
      theta_system_(factor(grid.theta)),
      implicit_system_(factor(1.0)),
      rhs_n_(grid.nx),
      rhs_f_(grid.nx) {
    const double w = (1.0 - grid.theta) * grid.dt;
    explicit_part_ = {w / (h_ * h_), w * params.pe / (2.0 * h_), w * 2.0 * params.beta};
}

BlockTridiagonal2 Stepper::factor(double theta) const {
    const double w = theta * grid_.dt;
    const double d = w / (h_ * h_);
    const double k = w * params_.pe / (2.0 * h_);
    // I - w L with L's blocks: lower [[1,P],[P,1]]/h^2-ish, upper [[1,-P],[-P,1]].
    const Block2 lower{-d, -k, -k, -d};
    const Block2 diag{1.0 + 2.0 * d, 0.0, 0.0, 1.0 + 2.0 * d + w * 2.0 * params_.beta};
    const Block2 upper{-d, k, k, -d};
    return BlockTridiagonal2::uniform(static_cast<std::size_t>(grid_.nx), lower, diag, upper);
}

void Stepper::advance(FieldState& state, bool implicit_only) {
    if (implicit_only || grid_.theta == 1.0) {
        std::copy(state.n_values.begin() + 1, state.n_values.end() - 1, rhs_n_.begin());
        std::copy(state.f_values.begin() + 1, state.f_values.end() - 1, rhs_f_.begin());
        implicit_system_.solve(rhs_n_, rhs_f_);
    } else {
        kernels::coupled_stencil(state.n_values, state.f_values, rhs_n_, rhs_f_, explicit_part_);
        theta_system_.solve(rhs_n_, rhs_f_);
    }
    std::copy(rhs_n_.begin(), rhs_n_.end(), interior(state.n_values).begin());
    std::copy(rhs_f_.begin(), rhs_f_.end(), interior(state.f_values).begin());
    state.t += grid_.dt;
}

FieldState step(const FieldState& state, const ModelParams& params, const GridConfig& grid) {
    if (state.n_values.size() != static_cast<std::size_t>(grid.nx + 2)) {
        throw ValidationError("state", "grid size does not match GridConfig::nx");
    }
    Stepper stepper(params, grid);
    FieldState next = state;
    stepper.advance(next);
    return next;
}

FieldState evolve_to(const ModelParams& params, const GridConfig& grid, double t) {
    FieldState st = init_delta(params, grid);
    if (!(t >= 0.0)) throw ValidationError("t", "must be >= 0");
    const long steps = std::lround(t / grid.dt);
    Stepper stepper(params, grid);
    for (long s = 0; s < steps; ++s) stepper.advance(st, s < grid.startup_steps);
    return st;
}

double SurvivalCurve::at(double t) const {
    if (times.empty()) return 0.0;
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return tail_amp * std::exp(-tail_rate * t);
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - times.begin());
    const double w = (t - times[j - 1]) / (times[j] - times[j - 1]);
    return (1.0 - w) * values[j - 1] + w * values[j];
}

SurvivalCurve survival(const ModelParams& params, const GridConfig& grid) {
    FieldState st = init_delta(params, grid);
    Stepper stepper(params, grid);
    SurvivalCurve curve;
    const std::size_t reserve = static_cast<std::size_t>(std::min(grid.t_max / grid.dt, 4e6)) + 1;
    curve.times.reserve(reserve);
    curve.values.reserve(reserve);
    curve.times.push_back(0.0);
    curve.values.push_back(total_mass(st));
    curve.outflux.push_back(outflux(st, params.pe));

    // The theta-scheme conserves mass exactly up to the end-cell flux, so S is
    // advanced by the mass that left during each step. S cannot rise unless
    // the discrete flux turns negative.
    long step_index = 0;
    while (curve.values.back() >= grid.s_tail) {
        if (st.t + 0.5 * grid.dt > grid.t_max) {
            throw HorizonError("PDE run reached t_max=" + std::to_string(grid.t_max) +
                               " with S=" + std::to_string(curve.values.back()) +
                               " >= s_tail; increase --t-max");
        }
        const bool implicit = step_index < grid.startup_steps;
        const double theta = implicit ? 1.0 : grid.theta;
        stepper.advance(st, implicit);
        ++step_index;
        const double out = outflux(st, params.pe);
        const double lost = grid.dt * (theta * out + (1.0 - theta) * curve.outflux.back());
        const double s = curve.values.back() - lost;
        if (!std::isfinite(s)) throw NumericalError("PDE run produced a non-finite survival value");
        curve.max_increase = std::max(curve.max_increase, -lost);
        curve.times.push_back(st.t);
        curve.values.push_back(s);
        curve.outflux.push_back(out);
    }
    curve.under_resolved = curve.max_increase > kMonotoneTolerance;

    // Least-squares line through log S over the last decade of samples.
    const double last = curve.values.back();
    std::size_t first = curve.values.size() - 1;
    while (first > 0 && curve.values[first - 1] <= 10.0 * last) --first;
    const std::size_t count = curve.values.size() - first;
    if (count < 3 || !(last > 0.0)) {
        throw NumericalError("survival tail fit needs at least 3 positive samples in the last decade");
    }
    double mt = 0.0, my = 0.0;
    for (std::size_t i = first; i < curve.values.size(); ++i) {
        mt += curve.times[i];
        my += std::log(curve.values[i]);
    }
    mt /= count;
    my /= count;
    double stt = 0.0, sty = 0.0;
    for (std::size_t i = first; i < curve.values.size(); ++i) {
        const double dt = curve.times[i] - mt;
        stt += dt * dt;
        sty += dt * (std::log(curve.values[i]) - my);
    }
    const double slope = sty / stt;
    if (!(slope < 0.0)) throw NumericalError("survival tail is not decaying; cannot extrapolate");
    curve.tail_rate = -slope;
    curve.tail_amp = std::exp(my - slope * mt);
    return curve;
}

double FptResult::density_at(double t) const {
    const auto& times = survival.times;
    if (times.empty()) return 0.0;
    if (t >= times.back()) return survival.tail_rate * survival.tail_amp * std::exp(-survival.tail_rate * t);
    if (t <= times.front()) return fpt_density.front();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - times.begin());
    const double w = (t - times[j - 1]) / (times[j] - times[j - 1]);
    return (1.0 - w) * fpt_density[j - 1] + w * fpt_density[j];
}

FptResult mfpt_pde(const ModelParams& params, const GridConfig& grid) {
    FptResult out;
    out.survival = survival(params, grid);
    const auto& t = out.survival.times;
    const auto& s = out.survival.values;
    const std::size_t n = t.size();
    const double t_last = t.back();
    const double tail_mass = out.survival.tail_amp * std::exp(-out.survival.tail_rate * t_last);

    CompensatedSum area;
    for (std::size_t i = 1; i < n; ++i) area += 0.5 * (t[i] - t[i - 1]) * (s[i] + s[i - 1]);
    area += tail_mass / out.survival.tail_rate;
    out.mfpt = area.value();

    out.fpt_density = out.survival.outflux;

    CompensatedSum mass;
    for (std::size_t i = 1; i < n; ++i) {
        mass += 0.5 * (t[i] - t[i - 1]) * (out.fpt_density[i] + out.fpt_density[i - 1]);
    }
    mass += tail_mass;
    out.mass_check = mass.value();
    return out;
}

}  // namespace abp::pde

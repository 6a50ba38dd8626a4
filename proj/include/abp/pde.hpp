#pragma once

// Forward solver for the dimensionless coupled system on [-1, 1]
//   dn/dt = n_xx - Pe f_x
//   df/dt = f_xx - Pe n_x - 2 beta f
// with n = f = 0 at both ends and delta initial data at x0.

#include <vector>

#include "abp/block_tridiagonal.hpp"
#include "abp/kernels.hpp"
#include "abp/model.hpp"

namespace abp::pde {

struct GridConfig {
    int nx = 401;          ///< interior nodes; spacing 2 / (nx + 1)
    double dt = 2.5e-5;
    double t_max = 20.0;   ///< hard horizon
    double s_tail = 1e-6;  ///< switch to exponential tail below this survival
    double theta = 0.5;    ///< 0.5 = Crank-Nicolson, 1 = backward Euler
    int startup_steps = 2; ///< leading backward-Euler steps that damp the delta's grid modes
};

void validate(const GridConfig& grid);

/// Nodal (n, f) on the uniform grid, boundary nodes included.
struct FieldState {
    std::vector<double> x_nodes;
    std::vector<double> n_values;
    std::vector<double> f_values;
    double t = 0.0;

    double spacing() const { return x_nodes[1] - x_nodes[0]; }
};

/// Trapezoid integral of n over [-1, 1].
double total_mass(const FieldState& state);

/// Linear interpolation of the density at x.
double density_at(const FieldState& state, double x);

/// Sampled S(t) with an exponential tail S ~ tail_amp * exp(-tail_rate t)
/// fitted past the last sample.
struct SurvivalCurve {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<double> outflux;  ///< mass leaving through both ends per unit time
    double tail_rate = 0.0;
    double tail_amp = 0.0;
    bool under_resolved = false;  ///< S increased by more than the monotonicity tolerance
    double max_increase = 0.0;

    /// Interpolated S(t); the fitted tail beyond the last sample.
    double at(double t) const;
};

struct FptResult {
    double mfpt = 0.0;
    std::vector<double> fpt_density;  ///< F = -dS/dt at SurvivalCurve::times (the end-cell outflux)
    double mass_check = 0.0;          ///< integral of F including the tail
    SurvivalCurve survival;

    double density_at(double t) const;
};

/// Unit mass split between the two nodes bracketing x0 with linear weights.
/// When x0 lies in a boundary cell the mass goes to the adjacent interior node.
/// Throws ValidationError for |x0| >= 1.
FieldState init_delta(const ModelParams& params, const GridConfig& grid);

/// Factored theta-scheme for one (params, grid). Reusable across steps and
/// across runs with the same inputs; not shared between threads.
class Stepper {
public:
    Stepper(const ModelParams& params, const GridConfig& grid);

    /// Advances `state` by dt in place. `implicit_only` forces theta = 1.
    void advance(FieldState& state, bool implicit_only = false);

private:
    BlockTridiagonal2 factor(double theta) const;

    ModelParams params_;
    GridConfig grid_;
    double h_;
    BlockTridiagonal2 theta_system_;
    BlockTridiagonal2 implicit_system_;
    kernels::StencilCoefficients explicit_part_;
    std::vector<double> rhs_n_, rhs_f_;
};

/// One theta step (factorizes on every call; use Stepper inside loops).
FieldState step(const FieldState& state, const ModelParams& params, const GridConfig& grid);

/// Runs from the delta start to time t (rounded to whole steps).
FieldState evolve_to(const ModelParams& params, const GridConfig& grid, double t);

/// Runs until S < s_tail and fits the tail. Throws HorizonError when t_max
/// is reached first.
SurvivalCurve survival(const ModelParams& params, const GridConfig& grid);

/// MFPT as the time integral of S (trapezoid + analytic tail).
FptResult mfpt_pde(const ModelParams& params, const GridConfig& grid);

}  // namespace abp::pde

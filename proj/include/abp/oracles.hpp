#pragma once

// Independent ground truth for the MFPT.
//
// The backward (adjoint) equations for the orientation-resolved exit times,
//   T+'' + Pe T+' + beta (T- - T+) = -1,
//   T-'' - Pe T-' + beta (T+ - T-) = -1,   T+-(+-1) = 0,
// give mu(x0) = eta T+(x0) + (1 - eta) T-(x0) at any Pe. The Monte Carlo
// estimator simulates the particles themselves.

#include <cstdint>
#include <vector>

#include "abp/model.hpp"

namespace abp::oracles {

struct BvpSolution {
    std::vector<double> x_nodes;  ///< uniform, boundaries included
    std::vector<double> t_plus;   ///< exit time starting right-oriented
    std::vector<double> t_minus;  ///< exit time starting left-oriented

    /// Cubic interpolation of T+ / T- at x.
    double plus_at(double x) const;
    double minus_at(double x) const;

    /// eta T+(x0) + (1 - eta) T-(x0).
    double mfpt(double x0, double eta) const;
};

/// Central-difference solve on nx interior nodes. Throws ValidationError for
/// nx < 16 and NumericalError when the system is singular.
BvpSolution mfpt_bvp(const ModelParams& params, int nx);

/// Richardson extrapolation of mfpt_bvp over spacings h and h/2 (nx and
/// 2 nx + 1 interior nodes); fourth-order accurate.
double mfpt_bvp_extrapolated(const ModelParams& params, int nx);

struct McConfig {
    long n_particles = 100000;
    double dt_mc = 1e-4;
    std::uint64_t seed = 20240917;
    /// Independent RNG streams; the estimate depends on (seed, streams) only.
    int streams = 1;
    /// Threads used to run the streams; does not affect the result.
    int threads = 1;
};

void validate(const McConfig& mc);

struct McEstimate {
    double mean_fpt = 0.0;
    double std_err = 0.0;
    long n_escaped_left = 0;
    long n_escaped_right = 0;
};

/// Euler-Maruyama run-and-tumble ensemble. Per step a particle moves by
/// sigma Pe dt + sqrt(2 dt) xi and flips orientation with probability
/// 1 - exp(-beta dt). Exits are detected both at step ends (exit time
/// interpolated linearly within the step) and between them through the
/// Brownian-bridge crossing probability.
McEstimate mfpt_mc(const ModelParams& params, const McConfig& mc);

}  // namespace abp::oracles

#pragma once

namespace abp {

/// Physical inputs of the run-and-tumble model on [-R, R].
struct DimensionalParams {
    double v_s = 0.0;     ///< swim speed [length/time]
    double D_T = 1.0;     ///< translational diffusivity [length^2/time]
    double R = 1.0;       ///< domain half-length [length]
    double tau = 1.0;     ///< orientation persistence time [time]
    double eta = 0.5;     ///< fraction initially right-oriented
    double x0_dim = 0.0;  ///< starting position [length]
};

/// Dimensionless problem on [-1, 1]. Time is measured in units of R^2/D_T.
struct ModelParams {
    double pe = 0.0;    ///< Peclet number v_s R / D_T
    double beta = 1.0;  ///< tumbling parameter R^2 / (tau D_T)
    double eta = 0.5;   ///< fraction initially right-oriented
    double x0 = 0.0;    ///< starting position

    /// Same model mirrored through the origin: x0 -> -x0, eta -> 1 - eta.
    ModelParams mirrored() const { return {pe, beta, 1.0 - eta, -x0}; }
};

/// Throws ValidationError naming the first field that breaks an invariant.
void validate(const DimensionalParams& p);
void validate(const ModelParams& p);

ModelParams nondimensionalize(const DimensionalParams& p);

/// Converts a dimensionless MFPT back to physical time, mu * R^2 / D_T.
double redimensionalize_mfpt(double mu, const DimensionalParams& p);

}  // namespace abp

#include "abp/model.hpp"

#include <cmath>
#include <string>

#include "abp/errors.hpp"

namespace abp {
namespace {

void require_finite(const char* field, double v) {
    if (!std::isfinite(v)) throw ValidationError(field, "must be finite");
}

}  // namespace

void validate(const DimensionalParams& p) {
    require_finite("v_s", p.v_s);
    require_finite("D_T", p.D_T);
    require_finite("R", p.R);
    require_finite("tau", p.tau);
    require_finite("eta", p.eta);
    require_finite("x0_dim", p.x0_dim);
    if (p.v_s < 0.0) throw ValidationError("v_s", "must be >= 0");
    if (p.D_T <= 0.0) throw ValidationError("D_T", "must be > 0");
    if (p.R <= 0.0) throw ValidationError("R", "must be > 0");
    if (p.tau <= 0.0) throw ValidationError("tau", "must be > 0");
    if (p.eta < 0.0 || p.eta > 1.0) throw ValidationError("eta", "must lie in [0, 1]");
    if (std::abs(p.x0_dim) > p.R) throw ValidationError("x0_dim", "must satisfy |x0_dim| <= R");
}

void validate(const ModelParams& p) {
    require_finite("pe", p.pe);
    require_finite("beta", p.beta);
    require_finite("eta", p.eta);
    require_finite("x0", p.x0);
    if (p.pe < 0.0) throw ValidationError("pe", "must be >= 0");
    if (p.beta <= 0.0) throw ValidationError("beta", "must be > 0");
    if (p.eta < 0.0 || p.eta > 1.0) throw ValidationError("eta", "must lie in [0, 1]");
    if (p.x0 < -1.0 || p.x0 > 1.0) throw ValidationError("x0", "must lie in [-1, 1]");
}

ModelParams nondimensionalize(const DimensionalParams& p) {
    validate(p);
    ModelParams out;
    out.pe = p.v_s * p.R / p.D_T;
    out.beta = p.R * p.R / (p.tau * p.D_T);
    out.eta = p.eta;
    out.x0 = p.x0_dim / p.R;
    validate(out);
    return out;
}

double redimensionalize_mfpt(double mu, const DimensionalParams& p) {
    validate(p);
    if (!std::isfinite(mu) || mu < 0.0) throw ValidationError("mu", "must be finite and >= 0");
    return mu * (p.R * p.R / p.D_T);
}

}  // namespace abp

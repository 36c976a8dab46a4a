#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sdcalc/covariation.hpp"
#include "sdcalc/process_model.hpp"

namespace sdcalc {

enum class Quadrature { trapezoid, simpson };

// Half-width schedule h_j = h0 * 2^-j, j = 0..levels-1, for the difference
// kernel. Every usable level needs h_j >= 4*dt of the target grid.
struct KernelConfig {
    double h0 = 0.05;
    int levels = 2;
    Quadrature quadrature = Quadrature::simpson;
};

struct PerLevel {
    double h = 0.0;      // effective half-width after clamping and snapping
    double value = 0.0;  // kernel difference at this level
    bool clamped = false;
};

// Extrapolated derivative value with h^2-bias and residual diagnostics.
struct DerivEstimate {
    double t = 0.0;
    double value = 0.0;
    double bias_est = 0.0;   // fitted h^2 coefficient
    double noise_est = 0.0;  // RMS residual of the fit
    std::vector<PerLevel> per_h;
};

struct OneSidedDerivs {
    double d_plus = 0.0;
    std::optional<double> d_minus;
};

// Difference kernel at half-width h:
//   t > 0 : (3/(2h^3)) \int_0^h r [C(t+r) - C(t-r)] dr
//   t = 0 : (3/h^3)    \int_0^h r [C(r) - C(0)]     dr
// t and h snap to grid nodes; for 0 < t < h the half-width is clamped to
// min(h, t, t_end - t). Effective h below 4*dt raises resolution_error.
double stochastic_difference(const CovPath& c, double t, double h, const KernelConfig& cfg);

// Kernel differences over the level schedule, least-squares extrapolated
// in h^2 to h -> 0. Fewer than two usable levels raises resolution_error.
DerivEstimate stochastic_derivative(const CovPath& c, double t, const KernelConfig& cfg);

// Central difference (C(t+w) - C(t-w)) / (2w); one-sided at the endpoints.
double strong_derivative(const CovPath& c, double t, double w);

// One-sided difference quotients over a decreasing eps schedule,
// polynomial-extrapolated to eps -> 0. Detects divergent quotients.
OneSidedDerivs one_sided(const CovPath& c, double t, const KernelConfig& cfg);

// (d_plus + d_minus)/2 for t > 0, d_plus at t = 0. Agrees with
// stochastic_derivative wherever the one-sided derivatives are finite.
double generalized_derivative(const CovPath& c, double t, const KernelConfig& cfg);

// d<S,B>_t / d<S2>_t for S2 = f(B), as a ratio of strong derivatives at
// window w (default cfg.h0). Requires f.nonvanishing.
double derivative_wrt_fB(const SemimartingalePath& s, const FunctionSpec& f, double t,
                         const KernelConfig& cfg, double w = 0.0);

// Adapted (backward-window) kernel estimate at every node, for Ito sums of
// the estimated derivative. Nodes with too little history are filled with
// the first computable value and flagged invalid.
struct DerivProfile {
    std::vector<double> values;
    std::vector<std::uint8_t> valid;
};

DerivProfile adapted_profile(const CovPath& c, double h_rec, Quadrature quad = Quadrature::simpson);

}  // namespace sdcalc

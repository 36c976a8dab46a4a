#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sdcalc/calculus_rules.hpp"

namespace sdcalc {

// Exit statuses shared by the CLI subcommands.
inline constexpr int status_ok = 0;
inline constexpr int status_tolerance_failure = 1;
inline constexpr int status_config_error = 2;
inline constexpr int status_precondition_failure = 3;

struct ExperimentConfig {
    std::string rule = "ftsc_deriv";

    std::string x = "const:1";
    std::string v = "zero";
    std::string f = "identity";
    double s0 = 0.0;

    // second process, for the sum/product/ratio rules
    std::string x2 = "const:1";
    std::string v2 = "zero";
    double s02 = 0.0;
    double coef_a = 1.0;
    double coef_b = 1.0;

    double power_p = 2.0;

    double t_end = 1.0;
    std::int64_t n_steps = 10000;
    double h0 = 0.05;
    int levels = 2;
    std::string quadrature = "simpson";

    std::uint64_t seed = 42;
    int n_paths = 10;
    int points = 50;
    std::vector<double> t_list;  // explicit t-points; overrides `points`

    double a = 0.0;  // interval start (smvt, mono_lip)
    double b = 1.0;  // interval end

    std::optional<double> tolerance;
    std::optional<double> exceed_frac;
    double mask_eps = 0.05;
    double h_reconstruct = 0.012;

    std::string out;  // CSV destination; empty writes to stdout
};

// Shortest round-trip decimal formatting (bit-exact reproducibility).
std::string format_double(double v);

// Executes the named verifier over n_paths derived streams and writes the
// per-point CSV plus a summary line. Returns an exit status.
int run_verify(const ExperimentConfig& cfg, std::ostream& csv);

// Re-runs the verifier per dt, writes rms/max error rows and the fitted
// log-log slope of rms vs dt.
int run_convergence(const ExperimentConfig& cfg, const std::vector<double>& dts,
                    std::ostream& csv);

// Single-line CSV a,b,slope,c,residual from smvt_locate.
int run_smvt(const ExperimentConfig& cfg, std::ostream& csv);

}  // namespace sdcalc

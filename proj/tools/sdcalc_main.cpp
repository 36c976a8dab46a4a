#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sdcalc/experiment.hpp"
#include "sdcalc/registry.hpp"

namespace {

struct CliState {
    sdcalc::ExperimentConfig cfg;
    double dt = 0.0;  // 0 keeps n_steps as configured
    std::vector<double> dts;
};

void add_common_options(CLI::App* cmd, CliState& st) {
    cmd->set_config("--config")->configurable(false);
    cmd->add_option("--rule", st.cfg.rule, "verifier rule name (see list-rules)");
    cmd->add_option("--x", st.cfg.x, "integrand process name");
    cmd->add_option("--v", st.cfg.v, "bounded-variation process name");
    cmd->add_option("--f", st.cfg.f, "function name");
    cmd->add_option("--s0", st.cfg.s0, "initial value S0");
    cmd->add_option("--x2", st.cfg.x2, "second integrand (sum/product/ratio)");
    cmd->add_option("--v2", st.cfg.v2, "second BV process");
    cmd->add_option("--s02", st.cfg.s02, "second initial value");
    cmd->add_option("--coef-a", st.cfg.coef_a, "sum-rule coefficient a");
    cmd->add_option("--coef-b", st.cfg.coef_b, "sum-rule coefficient b");
    cmd->add_option("--p", st.cfg.power_p, "power-rule exponent");
    cmd->add_option("--t-end", st.cfg.t_end, "time horizon");
    cmd->add_option("--dt", st.dt, "grid step (sets n-steps = t-end/dt)");
    cmd->add_option("--n-steps", st.cfg.n_steps, "number of grid steps");
    cmd->add_option("--h0", st.cfg.h0, "largest kernel half-width");
    cmd->add_option("--levels", st.cfg.levels, "kernel level count");
    cmd->add_option("--quadrature", st.cfg.quadrature, "simpson or trapezoid");
    cmd->add_option("--seed", st.cfg.seed, "root seed");
    cmd->add_option("--paths", st.cfg.n_paths, "number of Monte Carlo paths");
    cmd->add_option("--points", st.cfg.points, "number of uniform t-points");
    cmd->add_option("--t-list", st.cfg.t_list, "explicit t-points")->delimiter(',');
    cmd->add_option("--a", st.cfg.a, "interval start (smvt, mono_lip)");
    cmd->add_option("--b", st.cfg.b, "interval end");
    cmd->add_option("--tolerance", [&st](const CLI::results_t& r) {
        st.cfg.tolerance = std::stod(r[0]);
        return true;
    }, "flat tolerance override");
    cmd->add_option("--exceed-frac", [&st](const CLI::results_t& r) {
        st.cfg.exceed_frac = std::stod(r[0]);
        return true;
    }, "allowed fraction of points over tolerance");
    cmd->add_option("--mask-eps", st.cfg.mask_eps, "degeneracy mask half-width");
    cmd->add_option("--h-reconstruct", st.cfg.h_reconstruct, "backward window for ftsc_int");
    cmd->add_option("--out", st.cfg.out, "CSV output file (default stdout)");
}

void finalize(CliState& st) {
    if (st.dt > 0.0) st.cfg.n_steps = std::llround(st.cfg.t_end / st.dt);
}

int with_output(const sdcalc::ExperimentConfig& cfg, const std::function<int(std::ostream&)>& run) {
    if (cfg.out.empty()) return run(std::cout);
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) {
        std::cerr << "cannot open output file " << cfg.out << "\n";
        return sdcalc::status_config_error;
    }
    return run(f);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pathwise stochastic derivative engine and verification harness"};
    app.require_subcommand(1);

    CliState verify_state, conv_state, smvt_state;
    smvt_state.cfg.rule = "smvt";
    smvt_state.cfg.h0 = 0.4;  // wide window: polynomial-exact kernel, low location noise

    CLI::App* verify = app.add_subcommand("verify", "run one verifier over seeded paths");
    add_common_options(verify, verify_state);

    CLI::App* conv = app.add_subcommand("convergence", "error-vs-dt study with slope fit");
    add_common_options(conv, conv_state);
    conv->add_option("--dts", conv_state.dts, "dt values (need >= 3)")->delimiter(',');

    CLI::App* smvt = app.add_subcommand("smvt", "locate a stochastic mean-value point");
    add_common_options(smvt, smvt_state);

    CLI::App* list_rules = app.add_subcommand("list-rules", "print verifier rule names");
    CLI::App* list_procs = app.add_subcommand("list-processes", "print process registries");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : sdcalc::status_config_error;
    }

    if (list_rules->parsed()) {
        for (const auto& r : sdcalc::rule_names()) std::cout << r << "\n";
        return 0;
    }
    if (list_procs->parsed()) {
        std::cout << "X:";
        for (const auto& n : sdcalc::x_spec_names()) std::cout << ' ' << n;
        std::cout << "\nV:";
        for (const auto& n : sdcalc::v_spec_names()) std::cout << ' ' << n;
        std::cout << "\nf:";
        for (const auto& n : sdcalc::f_spec_names()) std::cout << ' ' << n;
        std::cout << "\n";
        return 0;
    }
    if (verify->parsed()) {
        finalize(verify_state);
        return with_output(verify_state.cfg, [&](std::ostream& os) {
            return sdcalc::run_verify(verify_state.cfg, os);
        });
    }
    if (conv->parsed()) {
        finalize(conv_state);
        return with_output(conv_state.cfg, [&](std::ostream& os) {
            return sdcalc::run_convergence(conv_state.cfg, conv_state.dts, os);
        });
    }
    finalize(smvt_state);
    return with_output(smvt_state.cfg, [&](std::ostream& os) {
        return sdcalc::run_smvt(smvt_state.cfg, os);
    });
}

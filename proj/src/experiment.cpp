#include "sdcalc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <functional>
#include <future>
#include <thread>

#include "sdcalc/registry.hpp"
#include "sdcalc/rng_paths.hpp"

namespace sdcalc {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::string join(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += ", ";
        out += names[i];
    }
    return out;
}

Quadrature parse_quadrature(const std::string& q) {
    if (q == "simpson") return Quadrature::simpson;
    if (q == "trapezoid") return Quadrature::trapezoid;
    throw std::invalid_argument("quadrature must be 'simpson' or 'trapezoid'");
}

VerifyOptions options_from(const ExperimentConfig& cfg) {
    VerifyOptions opt;
    opt.kernel = KernelConfig{cfg.h0, cfg.levels, parse_quadrature(cfg.quadrature)};
    opt.tolerance = cfg.tolerance.value_or(0.0);
    opt.mask_eps = cfg.mask_eps;
    opt.h_reconstruct = cfg.h_reconstruct;
    if (cfg.exceed_frac) {
        opt.exceed_allowed = *cfg.exceed_frac;
    } else if (cfg.rule == "ae_theorem") {
        opt.exceed_allowed = 0.10;
    } else if (cfg.rule == "ftsc_int" || cfg.rule == "kernel_cubic" || cfg.rule == "mono_lip") {
        opt.exceed_allowed = 0.0;
    } else {
        opt.exceed_allowed = 0.10;
    }
    return opt;
}

void validate_config(const ExperimentConfig& cfg) {
    if (!is_rule_name(cfg.rule))
        throw std::invalid_argument("unknown rule '" + cfg.rule +
                                    "'; valid rules: " + join(rule_names()));
    if (cfg.n_steps < 2) throw std::invalid_argument("n_steps must be >= 2");
    if (!(cfg.t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
    if (cfg.n_paths < 1) throw std::invalid_argument("paths must be >= 1");
    if (cfg.points < 1 && cfg.t_list.empty())
        throw std::invalid_argument("points must be >= 1");
    if (cfg.levels < 1) throw std::invalid_argument("levels must be >= 1");
    if (!(cfg.h0 > 0.0)) throw std::invalid_argument("h0 must be positive");
    parse_quadrature(cfg.quadrature);
    // registry names resolve at config time
    if (cfg.rule != "kernel_cubic") {
        make_x_spec(cfg.x);
        make_v_spec(cfg.v);
        make_f_spec(cfg.f);
    }
    if (cfg.rule == "sum" || cfg.rule == "product" || cfg.rule == "ratio") {
        make_x_spec(cfg.x2);
        make_v_spec(cfg.v2);
    }
    if (cfg.rule == "smvt" || cfg.rule == "mono_lip") {
        if (!(cfg.a < cfg.b)) throw std::invalid_argument("interval requires a < b");
        if (cfg.a < 0.0 || cfg.b > cfg.t_end)
            throw std::invalid_argument("interval must lie inside [0, t_end]");
    }
}

// Deterministic fan-out over path indices; results land in caller-indexed
// slots so the output order never depends on scheduling.
void for_each_path(int n, const std::function<void(int)>& work) {
    const unsigned hw = std::thread::hardware_concurrency();
    if (hw <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) work(i);
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    const unsigned n_workers = std::min<unsigned>(hw, static_cast<unsigned>(n));
    std::vector<std::future<void>> futs;
    futs.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) {
        futs.push_back(std::async(std::launch::async, [&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    work(i);
                } catch (...) {
                    errors[static_cast<std::size_t>(i)] = std::current_exception();
                }
            }
        }));
    }
    for (auto& f : futs) f.get();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

VerifyReport run_rule_on_path(const ExperimentConfig& cfg, const VerifyOptions& opt,
                              const TimeGrid& grid, std::span<const double> t_points,
                              int path_index) {
    const PathSeed seed = derive_stream(PathSeed{cfg.seed, 0},
                                        static_cast<std::uint64_t>(path_index));

    if (cfg.rule == "kernel_cubic") return verify_kernel_cubic(grid, opt, t_points);

    const RealPath b = sample_brownian(grid, seed);

    if (cfg.rule == "mart_deriv")
        return verify_martingale_derivative(make_f_spec(cfg.f), make_v_spec(cfg.v), b, opt,
                                            t_points);

    const SemimartingalePath s =
        build_semimartingale(cfg.s0, make_v_spec(cfg.v), make_x_spec(cfg.x), b);

    if (cfg.rule == "ftsc_deriv") return verify_ftsc_derivative(s, opt, t_points);
    if (cfg.rule == "ftsc_int") return verify_ftsc_integral(s, opt, t_points);
    if (cfg.rule == "ae_theorem") return verify_ae_theorem(s, opt, t_points);
    if (cfg.rule == "chain") return verify_chain_rule(s, make_f_spec(cfg.f), opt, t_points);
    if (cfg.rule == "chain_convex")
        return verify_chain_rule_convex(s, make_f_spec(cfg.f), opt, t_points);
    if (cfg.rule == "composition") return verify_composition(s, make_f_spec(cfg.f), opt, t_points);
    if (cfg.rule == "power") return verify_power_rule(s, cfg.power_p, opt, t_points);
    if (cfg.rule == "mono_lip") return verify_monotone_lipschitz(s, cfg.a, cfg.b, opt);

    if (cfg.rule == "sum" || cfg.rule == "product" || cfg.rule == "ratio") {
        const SemimartingalePath s2 =
            build_semimartingale(cfg.s02, make_v_spec(cfg.v2), make_x_spec(cfg.x2), b);
        SumProductRatioReports reps =
            verify_sum_product_ratio(s, s2, cfg.coef_a, cfg.coef_b, opt, t_points);
        if (cfg.rule == "sum") return reps.sum;
        if (cfg.rule == "product") return reps.product;
        return reps.ratio;
    }
    throw std::invalid_argument("rule '" + cfg.rule + "' is not runnable through verify");
}

struct AggregateStats {
    double max_abs_err = 0.0;
    double mean_abs_err = 0.0;
    double rms_err = 0.0;
    double excluded_fraction = 0.0;
    bool pass = true;
};

AggregateStats aggregate(const std::vector<VerifyReport>& reports) {
    AggregateStats agg;
    long double err_sum = 0.0L, err_sq = 0.0L;
    std::size_t n_used = 0, n_total = 0, n_excl = 0;
    for (const auto& r : reports) {
        agg.pass = agg.pass && r.pass;
        agg.max_abs_err = std::max(agg.max_abs_err, r.max_abs_err);
        for (std::size_t i = 0; i < r.abs_errors.size(); ++i) {
            ++n_total;
            if (r.excluded[i]) {
                ++n_excl;
                continue;
            }
            ++n_used;
            err_sum += r.abs_errors[i];
            err_sq += static_cast<long double>(r.abs_errors[i]) * r.abs_errors[i];
        }
    }
    agg.mean_abs_err = n_used ? static_cast<double>(err_sum / n_used) : 0.0;
    agg.rms_err = n_used ? std::sqrt(static_cast<double>(err_sq / n_used)) : 0.0;
    agg.excluded_fraction = n_total ? static_cast<double>(n_excl) / n_total : 1.0;
    return agg;
}

void emit_verify_csv(const ExperimentConfig& cfg, const std::vector<VerifyReport>& reports,
                     const AggregateStats& agg, std::ostream& os) {
    os << "path_index,t,estimate,truth,abs_err,excluded\n";
    for (std::size_t p = 0; p < reports.size(); ++p) {
        const VerifyReport& r = reports[p];
        for (std::size_t i = 0; i < r.t_points.size(); ++i) {
            os << p << ',' << format_double(r.t_points[i]) << ','
               << format_double(r.estimates[i]) << ',' << format_double(r.truths[i]) << ','
               << format_double(r.abs_errors[i]) << ',' << int(r.excluded[i]) << '\n';
        }
    }
    os << "# rule=" << cfg.rule << " max_abs_err=" << format_double(agg.max_abs_err)
       << " mean_abs_err=" << format_double(agg.mean_abs_err)
       << " excluded_frac=" << format_double(agg.excluded_fraction)
       << " pass=" << (agg.pass ? "true" : "false") << '\n';
}

std::vector<VerifyReport> execute_paths(const ExperimentConfig& cfg, const TimeGrid& grid,
                                        const VerifyOptions& opt,
                                        std::span<const double> t_points) {
    std::vector<VerifyReport> reports(static_cast<std::size_t>(cfg.n_paths));
    for_each_path(cfg.n_paths, [&](int p) {
        reports[static_cast<std::size_t>(p)] = run_rule_on_path(cfg, opt, grid, t_points, p);
    });
    return reports;
}

}  // namespace

int run_verify(const ExperimentConfig& cfg, std::ostream& csv) {
    TimeGrid grid;
    VerifyOptions opt;
    std::vector<double> t_points;
    try {
        validate_config(cfg);
        if (cfg.rule == "smvt") return run_smvt(cfg, csv);
        grid = make_grid(cfg.t_end, cfg.n_steps);
        opt = options_from(cfg);
        t_points = cfg.t_list.empty() ? uniform_t_points(grid, cfg.points, opt.kernel) : cfg.t_list;
    } catch (const std::invalid_argument& e) {
        csv << "# config error: " << e.what() << '\n';
        return status_config_error;
    }

    try {
        const std::vector<VerifyReport> reports = execute_paths(cfg, grid, opt, t_points);
        const AggregateStats agg = aggregate(reports);
        emit_verify_csv(cfg, reports, agg, csv);
        return agg.pass ? status_ok : status_tolerance_failure;
    } catch (const std::invalid_argument& e) {
        csv << "# precondition failure: " << e.what() << '\n';
        return status_precondition_failure;
    } catch (const error& e) {
        csv << "# precondition failure: " << e.what() << '\n';
        return status_precondition_failure;
    }
}

int run_convergence(const ExperimentConfig& cfg, const std::vector<double>& dts,
                    std::ostream& csv) {
    std::vector<double> sorted = dts;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    try {
        if (sorted.size() < 3)
            throw std::invalid_argument("convergence needs at least 3 distinct dt values");
        for (double dt : sorted)
            if (!(dt > 0.0) || std::llround(cfg.t_end / dt) < 2)
                throw std::invalid_argument("dt values must satisfy 0 < dt <= t_end/2");
        validate_config(cfg);
        if (cfg.rule == "smvt")
            throw std::invalid_argument("smvt has no pointwise error profile to regress");
    } catch (const std::invalid_argument& e) {
        csv << "# config error: " << e.what() << '\n';
        return status_config_error;
    }

    csv << "dt,rms_error,max_error,n_paths\n";
    int status = status_ok;
    std::vector<double> log_dt, log_rms;
    try {
        for (double dt : sorted) {
            ExperimentConfig sub = cfg;
            sub.n_steps = std::llround(cfg.t_end / dt);
            const TimeGrid grid = make_grid(sub.t_end, sub.n_steps);
            const VerifyOptions opt = options_from(sub);
            const std::vector<double> t_points =
                sub.t_list.empty() ? uniform_t_points(grid, sub.points, opt.kernel) : sub.t_list;
            const std::vector<VerifyReport> reports = execute_paths(sub, grid, opt, t_points);
            const AggregateStats agg = aggregate(reports);
            if (!agg.pass) status = status_tolerance_failure;
            csv << format_double(grid.dt) << ',' << format_double(agg.rms_err) << ','
                << format_double(agg.max_abs_err) << ',' << cfg.n_paths << '\n';
            if (agg.rms_err > 1e-9) {
                log_dt.push_back(std::log(grid.dt));
                log_rms.push_back(std::log(agg.rms_err));
            }
        }
    } catch (const std::invalid_argument& e) {
        csv << "# precondition failure: " << e.what() << '\n';
        return status_precondition_failure;
    } catch (const error& e) {
        csv << "# precondition failure: " << e.what() << '\n';
        return status_precondition_failure;
    }

    double slope = 0.0;
    if (log_dt.size() >= 2) {
        const auto n = static_cast<double>(log_dt.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < log_dt.size(); ++i) {
            sx += log_dt[i];
            sy += log_rms[i];
            sxx += log_dt[i] * log_dt[i];
            sxy += log_dt[i] * log_rms[i];
        }
        slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        if (!std::isfinite(slope)) slope = 0.0;
    }
    csv << "# slope=" << format_double(slope) << '\n';
    return status;
}

int run_smvt(const ExperimentConfig& cfg, std::ostream& csv) {
    try {
        if (!(cfg.a < cfg.b)) throw std::invalid_argument("smvt requires a < b");
        if (cfg.a < 0.0 || cfg.b > cfg.t_end)
            throw std::invalid_argument("smvt interval must lie inside [0, t_end]");
        make_x_spec(cfg.x);
        make_v_spec(cfg.v);
        if (cfg.n_steps < 2) throw std::invalid_argument("n_steps must be >= 2");
    } catch (const std::invalid_argument& e) {
        csv << "# config error: " << e.what() << '\n';
        return status_config_error;
    }

    try {
        const TimeGrid grid = make_grid(cfg.t_end, cfg.n_steps);
        const VerifyOptions opt = options_from(cfg);
        const PathSeed seed = derive_stream(PathSeed{cfg.seed, 0}, 0);
        const RealPath b = sample_brownian(grid, seed);
        const SemimartingalePath s =
            build_semimartingale(cfg.s0, make_v_spec(cfg.v), make_x_spec(cfg.x), b);
        const SMVTResult res = smvt_locate(s, cfg.a, cfg.b, opt);
        csv << format_double(res.a) << ',' << format_double(res.b) << ','
            << format_double(res.slope) << ',' << format_double(res.c) << ','
            << format_double(res.residual) << '\n';
        return status_ok;
    } catch (const smvt_violation_error& e) {
        csv << "# smvt violation: " << e.what() << '\n';
        return status_tolerance_failure;
    } catch (const std::invalid_argument& e) {
        csv << "# precondition failure: " << e.what() << '\n';
        return status_precondition_failure;
    } catch (const error& e) {
        csv << "# precondition failure: " << e.what() << '\n';
        return status_precondition_failure;
    }
}

}  // namespace sdcalc

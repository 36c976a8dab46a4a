#include <doctest.h>

#include <cmath>

#include "sdcalc/calculus_rules.hpp"
#include "sdcalc/registry.hpp"
#include "sdcalc/rng_paths.hpp"

using namespace sdcalc;

namespace {

const TimeGrid kFine = make_grid(1.0, 100000);  // dt = 1e-5

SemimartingalePath make_proc(const RealPath& b, const std::string& x, const std::string& v,
                             double s0 = 0.0) {
    return build_semimartingale(s0, make_v_spec(v), make_x_spec(x), b);
}

VerifyOptions default_opts() { return VerifyOptions{}; }

}  // namespace

TEST_SUITE_BEGIN("calculus_rules");

TEST_CASE("ftsc derivative recovers the integrand") {
    RealPath b = sample_brownian(kFine, PathSeed{42, 0});
    VerifyOptions opt = default_opts();
    std::vector<double> ts = uniform_t_points(kFine, 25, opt.kernel);

    SUBCASE("X == 1") {
        VerifyReport r = verify_ftsc_derivative(make_proc(b, "const:1", "zero"), opt, ts);
        CHECK(r.pass);
        CHECK(r.max_abs_err <= 0.08);
        CHECK(r.excluded_fraction == 0.0);
        for (double tr : r.truths) CHECK(tr == 1.0);
    }
    SUBCASE("X = cos(t) B") {
        VerifyReport r = verify_ftsc_derivative(make_proc(b, "cos_t_times_B", "zero"), opt, ts);
        CHECK(r.pass);
        const std::int64_t k = snap_index(kFine, r.t_points[3]);
        CHECK(r.truths[3] == doctest::Approx(std::cos(kFine.node(k)) * b[k]));
    }
    SUBCASE("exponential martingale: D Xi = X Xi") {
        SemimartingalePath s = make_proc(b, "self", "zero", 1.0);
        VerifyReport r = verify_ftsc_derivative(s, opt, ts);
        CHECK(r.pass);
        const std::int64_t k = snap_index(kFine, r.t_points[10]);
        CHECK(r.truths[10] == doctest::Approx(s.S[k]));
    }
    SUBCASE("discontinuous integrand is rejected by precondition") {
        CHECK_THROWS_AS(verify_ftsc_derivative(make_proc(b, "indicator_Bpos", "zero"), opt, ts),
                        std::invalid_argument);
    }
}

TEST_CASE("ftsc derivative profiles are indistinguishable across V choices") {
    RealPath b = sample_brownian(kFine, PathSeed{42, 1});
    VerifyOptions opt = default_opts();
    std::vector<double> ts = uniform_t_points(kFine, 15, opt.kernel);
    VerifyReport r1 = verify_ftsc_derivative(make_proc(b, "scale_B:2", "zero"), opt, ts);
    VerifyReport r2 = verify_ftsc_derivative(make_proc(b, "scale_B:2", "pos_t"), opt, ts);
    for (std::size_t i = 0; i < ts.size(); ++i)
        CHECK(std::fabs(r1.estimates[i] - r2.estimates[i]) <= 1e-12);
}

TEST_CASE("ftsc inverse reconstructs the martingale part") {
    VerifyOptions opt = default_opts();
    std::vector<double> ts = uniform_t_points(kFine, 25, opt.kernel);

    SUBCASE("X == 1, V == 0: reconstruction tracks B") {
        RealPath b = sample_brownian(kFine, PathSeed{42, 0});
        VerifyOptions wide = opt;
        wide.h_reconstruct = 0.03;  // pure martingale noise, wider window is better
        VerifyReport r = verify_ftsc_integral(make_proc(b, "const:1", "zero"), wide, ts);
        CHECK(r.pass);
        CHECK(r.max_abs_err <= 0.05);
    }
    SUBCASE("X = B with V = t against S - S0 - V") {
        RealPath b = sample_brownian(kFine, PathSeed{42, 0});
        VerifyReport r = verify_ftsc_integral(make_proc(b, "B_itself", "pos_t"), opt, ts);
        CHECK(r.pass);
        CHECK(r.max_abs_err <= 0.1);
    }
    SUBCASE("V == 0 subclass: integral equals S - S0") {
        RealPath b = sample_brownian(kFine, PathSeed{42, 2});
        SemimartingalePath s = make_proc(b, "cos_t_times_B", "zero");
        VerifyReport r = verify_ftsc_integral(s, opt, ts);
        CHECK(r.pass);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const std::int64_t k = snap_index(kFine, ts[i]);
            CHECK(r.truths[i] == doctest::Approx(s.S[k] - s.s0).epsilon(1e-12));
        }
    }
}

TEST_CASE("a.e. theorem tolerates a small exceptional set") {
    VerifyOptions opt = default_opts();
    opt.kernel.h0 = 0.02;
    opt.exceed_allowed = 0.10;
    std::vector<double> ts = uniform_t_points(kFine, 50, opt.kernel);

    SUBCASE("indicator integrand") {
        double exceed = 0.0;
        int n_paths = 4;
        for (int p = 0; p < n_paths; ++p) {
            RealPath b = sample_brownian(kFine, PathSeed{42, static_cast<std::uint64_t>(p)});
            VerifyReport r = verify_ae_theorem(make_proc(b, "indicator_Bpos", "zero"), opt, ts);
            CHECK(r.pass);
            CHECK(r.tolerance == doctest::Approx(0.15));
            exceed += r.exceed_fraction;
        }
        CHECK(exceed / n_paths <= 0.10);
    }
    SUBCASE("deterministic step: errors localized to the jump") {
        RealPath b = sample_brownian(kFine, PathSeed{42, 0});
        VerifyReport r = verify_ae_theorem(make_proc(b, "step:0.5", "zero"), opt, ts);
        for (std::size_t i = 0; i < r.t_points.size(); ++i) {
            if (std::fabs(r.t_points[i] - 0.5) > 2.0 * opt.kernel.h0 && !r.excluded[i])
                CHECK(r.abs_errors[i] <= 0.05);
        }
    }
    SUBCASE("continuous integrand reduces to the FTSC behavior") {
        RealPath b = sample_brownian(kFine, PathSeed{42, 0});
        VerifyOptions strict = opt;
        strict.exceed_allowed = 0.0;
        VerifyReport r = verify_ae_theorem(make_proc(b, "const:1", "zero"), strict, ts);
        CHECK(r.pass);
        CHECK(r.exceed_fraction == 0.0);
    }
}

TEST_CASE("chain rule for smooth functions") {
    RealPath b = sample_brownian(kFine, PathSeed{42, 3});
    VerifyOptions opt = default_opts();
    std::vector<double> ts = uniform_t_points(kFine, 20, opt.kernel);
    SemimartingalePath s = make_proc(b, "const:1", "zero");

    SUBCASE("f = x^2 on S = B gives 2B") {
        VerifyReport r = verify_chain_rule(s, make_f_spec("power:2"), opt, ts);
        CHECK(r.pass);
        const std::int64_t k = snap_index(kFine, r.t_points[7]);
        CHECK(r.truths[7] == doctest::Approx(2.0 * b[k]));
    }
    SUBCASE("identity matches the plain derivative pipeline exactly") {
        VerifyReport chain = verify_chain_rule(s, make_f_spec("identity"), opt, ts);
        VerifyReport plain = verify_ftsc_derivative(s, opt, ts);
        for (std::size_t i = 0; i < ts.size(); ++i)
            CHECK(std::fabs(chain.estimates[i] - plain.estimates[i]) <= 1e-12);
    }
    SUBCASE("f = cubic stays within the roughness-aware band") {
        VerifyReport r = verify_chain_rule(s, make_f_spec("cubic"), opt, ts);
        CHECK(r.pass);
    }
    SUBCASE("convex f rejected by the smooth verifier and vice versa") {
        CHECK_THROWS_AS(verify_chain_rule(s, make_f_spec("abs"), opt, ts), std::invalid_argument);
        CHECK_THROWS_AS(verify_chain_rule_convex(s, make_f_spec("cubic"), opt, ts),
                        std::invalid_argument);
    }
}

TEST_CASE("convex chain rule with left derivatives") {
    VerifyOptions opt = default_opts();
    opt.mask_eps = 0.25;
    std::vector<double> ts = uniform_t_points(kFine, 40, opt.kernel);

    SUBCASE("|B| has Brownian speed 1 with sign(B) direction") {
        RealPath b = sample_brownian(kFine, PathSeed{42, 0});
        SemimartingalePath s = make_proc(b, "const:1", "zero");
        VerifyReport r = verify_chain_rule_convex(s, make_f_spec("abs"), opt, ts);
        CHECK(r.pass);
        CHECK(r.excluded_fraction <= 0.5);
        for (std::size_t i = 0; i < r.truths.size(); ++i)
            CHECK(std::fabs(std::fabs(r.truths[i]) - 1.0) <= 1e-12);
    }
    SUBCASE("relu uses the left-derivative convention at 0") {
        RealPath b = sample_brownian(kFine, PathSeed{42, 5});
        SemimartingalePath s = make_proc(b, "const:1", "zero");
        VerifyReport r = verify_chain_rule_convex(s, make_f_spec("relu"), opt, ts);
        CHECK(r.pass);
        for (std::size_t i = 0; i < r.truths.size(); ++i) {
            const std::int64_t k = snap_index(kFine, r.t_points[i]);
            CHECK(r.truths[i] == (b[k] > 0.0 ? 1.0 : 0.0));
        }
    }
    SUBCASE("a path conditioned positive on a window estimates 1 uniformly") {
        // scan sibling streams for a path staying above the mask on [0.3, 0.7]
        std::uint64_t found = 0;
        bool ok = false;
        for (std::uint64_t k = 0; k < 64 && !ok; ++k) {
            RealPath b = sample_brownian(kFine, PathSeed{7, k});
            double lo = 1e9;
            for (std::int64_t i = snap_index(kFine, 0.3); i <= snap_index(kFine, 0.7); ++i)
                lo = std::min(lo, b[i]);
            if (lo > 0.3) {
                found = k;
                ok = true;
            }
        }
        REQUIRE(ok);
        RealPath b = sample_brownian(kFine, PathSeed{7, found});
        SemimartingalePath s = make_proc(b, "const:1", "zero");
        std::vector<double> window = {0.4, 0.45, 0.5, 0.55, 0.6};
        VerifyReport r = verify_chain_rule_convex(s, make_f_spec("abs"), opt, window);
        CHECK(r.excluded_fraction == 0.0);
        for (std::size_t i = 0; i < window.size(); ++i) {
            CHECK(r.truths[i] == 1.0);
            CHECK(std::fabs(r.estimates[i] - 1.0) <= 0.1);
        }
    }
}

TEST_CASE("composition through f(B)") {
    RealPath b = sample_brownian(kFine, PathSeed{42, 4});
    VerifyOptions opt = default_opts();
    std::vector<double> ts = uniform_t_points(kFine, 20, opt.kernel);
    SemimartingalePath s = make_proc(b, "const:1", "zero");

    SUBCASE("f = exp closes the loop") {
        VerifyReport r = verify_composition(s, make_f_spec("exp"), opt, ts);
        CHECK(r.pass);
        CHECK(r.excluded_fraction <= 0.5);
    }
    SUBCASE("f = affine(2,0): D_{2B} S is 1/2") {
        const double d = derivative_wrt_fB(s, make_f_spec("affine:2,0"), 0.5, opt.kernel);
        CHECK(std::fabs(d - 0.5) <= 0.05);
        VerifyReport r = verify_composition(s, make_f_spec("affine:2,0"), opt, ts);
        CHECK(r.pass);
    }
    SUBCASE("vanishing f' is a precondition failure") {
        CHECK_THROWS_AS(verify_composition(s, make_f_spec("power:2"), opt, ts),
                        std::invalid_argument);
    }
}

TEST_CASE("power rule") {
    VerifyOptions opt = default_opts();
    std::vector<double> ts = uniform_t_points(kFine, 20, opt.kernel);

    SUBCASE("p = 2 under S = B") {
        RealPath b = sample_brownian(kFine, PathSeed{42, 6});
        SemimartingalePath s = make_proc(b, "const:1", "zero");
        VerifyReport r = verify_power_rule(s, 2.0, opt, ts);
        CHECK(r.pass);
        const std::int64_t k = snap_index(kFine, r.t_points[5]);
        CHECK(r.truths[5] == doctest::Approx(2.0 * b[k]));
    }
    SUBCASE("p = 1 degenerates to the identity") {
        RealPath b = sample_brownian(kFine, PathSeed{42, 6});
        SemimartingalePath s = make_proc(b, "const:1", "zero");
        VerifyReport pow = verify_power_rule(s, 1.0, opt, ts);
        VerifyReport plain = verify_ftsc_derivative(s, opt, ts);
        for (std::size_t i = 0; i < ts.size(); ++i)
            CHECK(std::fabs(pow.estimates[i] - plain.estimates[i]) <= 1e-12);
    }
    SUBCASE("p = -1 on a positive semimartingale, masked") {
        RealPath b = sample_brownian(kFine, PathSeed{42, 7});
        SemimartingalePath s = make_proc(b, "const:0.1", "zero", 2.0);
        VerifyReport r = verify_power_rule(s, -1.0, opt, ts);
        CHECK(r.pass);
        CHECK(r.excluded_fraction <= 0.1);
        const std::int64_t k = snap_index(kFine, r.t_points[5]);
        CHECK(r.truths[5] == doctest::Approx(-0.1 / (s.S[k] * s.S[k])));
    }
    SUBCASE("p = -1 with S crossing zero auto-fails through exclusions") {
        RealPath b = sample_brownian(kFine, PathSeed{42, 8});
        SemimartingalePath s = make_proc(b, "const:1", "zero");  // S = B crosses 0
        VerifyReport r = verify_power_rule(s, -1.0, opt, ts);
        CHECK(!r.pass);
        CHECK(r.excluded_fraction > 0.5);
    }
}

TEST_CASE("sum, product and ratio rules") {
    RealPath b = sample_brownian(kFine, PathSeed{42, 9});
    VerifyOptions opt = default_opts();
    std::vector<double> ts = uniform_t_points(kFine, 20, opt.kernel);

    SemimartingalePath s1 = make_proc(b, "const:1", "zero");        // B
    SemimartingalePath s2 = make_proc(b, "scale_B:2", "zero");      // B^2 - t

    SUBCASE("product truth is 3B^2 - t") {
        SumProductRatioReports reps = verify_sum_product_ratio(s1, s2, 1.0, 1.0, opt, ts);
        CHECK(reps.sum.pass);
        CHECK(reps.product.pass);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const std::int64_t k = snap_index(kFine, ts[i]);
            CHECK(reps.product.truths[i] ==
                  doctest::Approx(3.0 * b[k] * b[k] - kFine.node(k)).epsilon(1e-6));
        }
    }
    SUBCASE("sum with b = 0 degenerates to the identity") {
        SumProductRatioReports reps = verify_sum_product_ratio(s1, s2, 1.0, 0.0, opt, ts);
        VerifyReport plain = verify_ftsc_derivative(s1, opt, ts);
        CHECK(reps.sum.pass);
        for (std::size_t i = 0; i < ts.size(); ++i)
            CHECK(std::fabs(reps.sum.estimates[i] - plain.estimates[i]) <= 1e-12);
    }
    SUBCASE("profile linearity follows from covariation bilinearity") {
        SumProductRatioReports reps = verify_sum_product_ratio(s1, s2, 2.0, -0.5, opt, ts);
        VerifyReport r1 = verify_ftsc_derivative(s1, opt, ts);
        VerifyReport r2 = verify_ftsc_derivative(s2, opt, ts);
        for (std::size_t i = 0; i < ts.size(); ++i)
            CHECK(std::fabs(reps.sum.estimates[i] -
                            (2.0 * r1.estimates[i] - 0.5 * r2.estimates[i])) <= 1e-9);
    }
    SUBCASE("ratio against the exponential martingale") {
        SemimartingalePath xi = make_proc(b, "self", "zero", 1.0);
        SumProductRatioReports reps = verify_sum_product_ratio(s1, xi, 1.0, 1.0, opt, ts);
        CHECK(reps.ratio.pass);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const std::int64_t k = snap_index(kFine, ts[i]);
            CHECK(reps.ratio.truths[i] ==
                  doctest::Approx((1.0 - b[k]) / xi.S[k]).epsilon(1e-9));
        }
    }
    SUBCASE("distinct B paths are rejected") {
        RealPath b2 = sample_brownian(kFine, PathSeed{42, 10});
        SemimartingalePath other = make_proc(b2, "const:1", "zero");
        CHECK_THROWS_AS(verify_sum_product_ratio(s1, other, 1.0, 1.0, opt, ts),
                        std::invalid_argument);
    }
}

TEST_CASE("stochastic mean value and Rolle points") {
    VerifyOptions opt = default_opts();
    opt.kernel.h0 = 0.4;

    SUBCASE("constant derivative accepts any point") {
        RealPath b = sample_brownian(kFine, PathSeed{42, 0});
        SemimartingalePath s = make_proc(b, "const:1", "zero");
        SMVTResult res = smvt_locate(s, 0.0, 1.0, opt);
        CHECK(res.residual <= 0.05);
        CHECK(res.a < res.c);
        CHECK(res.c < res.b);
    }
    SUBCASE("X = t has its mean-value point at 1/2") {
        RealPath b = sample_brownian(kFine, PathSeed{42, 0});
        SemimartingalePath s = make_proc(b, "linear_t", "zero");
        SMVTResult res = smvt_locate(s, 0.0, 1.0, opt);
        CHECK(std::fabs(res.c - 0.5) <= 0.02);
        CHECK(std::fabs(res.slope - 0.5) <= 0.05);
        CHECK(res.residual <= 0.05);
    }
    SUBCASE("Rolle case on sin(2 pi t)") {
        RealPath b = sample_brownian(kFine, PathSeed{42, 0});
        SemimartingalePath s = make_proc(b, "sin2pi_t", "zero");
        SMVTResult res = smvt_locate(s, 0.0, 1.0, opt);
        CHECK(std::fabs(res.slope) <= 0.05);
        CHECK(res.residual <= 0.05);
    }
    SUBCASE("degenerate intervals are refused") {
        RealPath b = sample_brownian(kFine, PathSeed{42, 0});
        SemimartingalePath s = make_proc(b, "const:1", "zero");
        CHECK_THROWS_AS(smvt_locate(s, 0.5, 0.5 + 3.0 * kFine.dt, opt), resolution_error);
        CHECK_THROWS_AS(smvt_locate(s, 0.7, 0.2, opt), std::invalid_argument);
    }
}

TEST_CASE("monotonicity and Lipschitz bounds from the derivative profile") {
    VerifyOptions opt = default_opts();
    RealPath b = sample_brownian(kFine, PathSeed{42, 11});

    SUBCASE("X == 1: increasing with K near 1") {
        VerifyReport r = verify_monotone_lipschitz(make_proc(b, "const:1", "zero"), 0.1, 0.9, opt);
        CHECK(r.pass);
    }
    SUBCASE("X == -1: decreasing case") {
        VerifyReport r = verify_monotone_lipschitz(make_proc(b, "const:-1", "zero"), 0.1, 0.9, opt);
        CHECK(r.pass);
    }
    SUBCASE("indicator integrand: nondecreasing case") {
        VerifyReport r =
            verify_monotone_lipschitz(make_proc(b, "indicator_Bpos", "zero"), 0.1, 0.9, opt);
        CHECK(r.pass);
    }
}

TEST_CASE("martingale-derivative identity for S = f(B) + V") {
    VerifyOptions opt = default_opts();
    std::vector<double> ts = uniform_t_points(kFine, 20, opt.kernel);
    RealPath b = sample_brownian(kFine, PathSeed{42, 12});

    SUBCASE("f = x^2 with V = -t gives the martingale 2B") {
        VerifyReport r =
            verify_martingale_derivative(make_f_spec("power:2"), make_v_spec("neg_t"), b, opt, ts);
        CHECK(r.pass);
        const std::int64_t k = snap_index(kFine, r.t_points[4]);
        CHECK(r.truths[4] == doctest::Approx(2.0 * b[k]));
    }
    SUBCASE("identity gives 1") {
        VerifyReport r =
            verify_martingale_derivative(make_f_spec("identity"), make_v_spec("zero"), b, opt, ts);
        CHECK(r.pass);
        CHECK(r.max_abs_err <= 0.08);
    }
    SUBCASE("exp gives exp(B)") {
        VerifyReport r =
            verify_martingale_derivative(make_f_spec("exp"), make_v_spec("zero"), b, opt, ts);
        CHECK(r.pass);
    }
}

TEST_CASE("report bookkeeping invariants") {
    RealPath b = sample_brownian(kFine, PathSeed{42, 13});
    VerifyOptions opt = default_opts();
    opt.mask_eps = 0.25;
    std::vector<double> ts = uniform_t_points(kFine, 30, opt.kernel);
    VerifyReport r = verify_chain_rule_convex(make_proc(b, "const:1", "zero"),
                                              make_f_spec("abs"), opt, ts);

    CHECK(r.excluded_fraction >= 0.0);
    CHECK(r.excluded_fraction <= 1.0);
    std::size_t used = 0, exceed = 0;
    double max_err = 0.0;
    for (std::size_t i = 0; i < r.abs_errors.size(); ++i) {
        if (r.excluded[i]) continue;
        ++used;
        max_err = std::max(max_err, r.abs_errors[i]);
        if (r.abs_errors[i] > r.tolerances[i]) ++exceed;
    }
    CHECK(r.max_abs_err == doctest::Approx(max_err));
    CHECK(r.exceed_fraction == doctest::Approx(static_cast<double>(exceed) / used));
    const bool expect_pass = r.excluded_fraction <= 0.5 &&
                             r.exceed_fraction <= r.exceed_allowed + 1e-12;
    CHECK(r.pass == expect_pass);
}

TEST_CASE("kernel_cubic synthetic rule is deterministic and exact") {
    VerifyOptions opt = default_opts();
    opt.kernel.levels = 3;
    std::vector<double> ts = uniform_t_points(kFine, 10, opt.kernel);
    VerifyReport r = verify_kernel_cubic(kFine, opt, ts);
    CHECK(r.pass);
    CHECK(r.max_abs_err <= 1e-6);
}

TEST_SUITE_END();

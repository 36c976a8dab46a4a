#include <doctest.h>

#include <cmath>
#include <limits>

#include "sdcalc/process_model.hpp"
#include "sdcalc/registry.hpp"
#include "sdcalc/rng_paths.hpp"

using namespace sdcalc;

namespace {

ProcessSpec const_spec(double v) { return make_x_spec("const:" + std::to_string(v)); }

}  // namespace

TEST_SUITE_BEGIN("process_model");

TEST_CASE("ito_integral telescopes for X == 1 and vanishes for X == 0") {
    TimeGrid g = make_grid(1.0, 5000);
    RealPath b = sample_brownian(g, PathSeed{10, 0});

    RealPath ones{g, std::vector<double>(static_cast<std::size_t>(g.n_nodes()), 1.0)};
    RealPath m = ito_integral(ones, b);
    for (std::int64_t i = 0; i <= g.n_steps; i += 613)
        CHECK(m[i] == doctest::Approx(b[i]).epsilon(1e-12));
    CHECK(m[g.n_steps] == doctest::Approx(b[g.n_steps]).epsilon(1e-12));

    RealPath zeros{g, std::vector<double>(static_cast<std::size_t>(g.n_nodes()), 0.0)};
    RealPath mz = ito_integral(zeros, b);
    for (double v : mz.values) CHECK(v == 0.0);

    RealPath other{make_grid(1.0, 100), std::vector<double>(101, 1.0)};
    CHECK_THROWS_AS(ito_integral(other, b), std::invalid_argument);
}

TEST_CASE("ito_integral of B matches the Ito-formula oracle (B^2 - t)/2") {
    // d(B^2/2) = B dB + dt/2, so int_0^1 B dB = (B_1^2 - 1)/2.
    TimeGrid g = make_grid(1.0, 100000);
    for (int p = 0; p < 100; ++p) {
        RealPath b = sample_brownian(g, PathSeed{88, static_cast<std::uint64_t>(p)});
        RealPath m = ito_integral(b, b);
        const double oracle = (b[g.n_steps] * b[g.n_steps] - 1.0) / 2.0;
        CHECK(std::fabs(m[g.n_steps] - oracle) <= 5e-2);
    }
}

TEST_CASE("build_semimartingale reproduces B and keeps the decomposition exact") {
    TimeGrid g = make_grid(1.0, 4000);
    RealPath b = sample_brownian(g, PathSeed{11, 0});
    SemimartingalePath s = build_semimartingale(0.0, make_v_spec("zero"), const_spec(1.0), b);
    for (std::int64_t i = 0; i <= g.n_steps; i += 37) {
        CHECK(s.S[i] == doctest::Approx(b[i]).epsilon(1e-12));
        CHECK(s.S[i] - s.s0 - s.V[i] - s.M[i] == 0.0);
    }
    CHECK(s.M[0] == 0.0);
    CHECK(s.V[0] == 0.0);
}

TEST_CASE("V = t with X = 2B builds B^2 pathwise (Ito oracle)") {
    // B_t^2 = t + int_0^t 2B dB; discrepancy is the QV fluctuation.
    TimeGrid g = make_grid(1.0, 100000);
    RealPath b = sample_brownian(g, PathSeed{12, 0});
    SemimartingalePath s =
        build_semimartingale(0.0, make_v_spec("pos_t"), make_x_spec("scale_B:2"), b);
    double worst = 0.0;
    for (std::int64_t i = 0; i <= g.n_steps; i += 997)
        worst = std::max(worst, std::fabs(s.S[i] - b[i] * b[i]));
    CHECK(worst <= 1e-1);
}

TEST_CASE("non-adapted specs fail at construction time") {
    TimeGrid g = make_grid(1.0, 100);
    RealPath b = sample_brownian(g, PathSeed{13, 0});

    ProcessSpec peeking;
    peeking.name = "peek_ahead";
    peeking.eval = [](const PathHistory& h) { return h.b_at(h.index() + 1); };
    CHECK_THROWS_AS(build_semimartingale(0.0, peeking, const_spec(1.0), b), adaptedness_error);
    CHECK_THROWS_AS(build_semimartingale(0.0, make_v_spec("zero"), peeking, b), adaptedness_error);

    ProcessSpec v_reads_current_s;
    v_reads_current_s.name = "v_reads_s";
    v_reads_current_s.eval = [](const PathHistory& h) { return h.s_at(h.index()); };
    CHECK_THROWS_AS(build_semimartingale(0.0, v_reads_current_s, const_spec(1.0), b),
                    adaptedness_error);
}

TEST_CASE("spec producing non-finite values reports the node") {
    TimeGrid g = make_grid(1.0, 100);
    RealPath b = sample_brownian(g, PathSeed{14, 0});
    ProcessSpec bad;
    bad.name = "inf_at_50";
    bad.eval = [](const PathHistory& h) {
        return h.index() == 50 ? std::numeric_limits<double>::infinity() : 0.0;
    };
    try {
        build_semimartingale(0.0, make_v_spec("zero"), bad, b);
        FAIL("expected numeric_domain_error");
    } catch (const numeric_domain_error& e) {
        CHECK(e.node == 50);
    }
}

TEST_CASE("exponential_martingale closed forms") {
    TimeGrid g = make_grid(1.0, 2000);
    RealPath b = sample_brownian(g, PathSeed{15, 0});

    RealPath zeros{g, std::vector<double>(static_cast<std::size_t>(g.n_nodes()), 0.0)};
    RealPath xi0 = exponential_martingale(zeros, b);
    for (double v : xi0.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

    // X == 1: the discrete sums collapse to exp(B_k - t_k/2)
    RealPath ones{g, std::vector<double>(static_cast<std::size_t>(g.n_nodes()), 1.0)};
    RealPath xi = exponential_martingale(ones, b);
    for (std::int64_t i = 0; i <= g.n_steps; i += 191) {
        CHECK(xi[i] == doctest::Approx(std::exp(b[i] - 0.5 * g.node(i))).epsilon(1e-10));
        CHECK(xi[i] > 0.0);
    }
}

TEST_CASE("exponential_martingale mean stays at 1 over 1e4 paths") {
    TimeGrid g = make_grid(1.0, 1000);
    RealPath ones{g, std::vector<double>(static_cast<std::size_t>(g.n_nodes()), 1.0)};
    double sum = 0.0;
    const int n = 10000;
    for (int p = 0; p < n; ++p) {
        RealPath b = sample_brownian(g, PathSeed{16, static_cast<std::uint64_t>(p)});
        sum += exponential_martingale(ones, b)[g.n_steps];
    }
    CHECK(std::fabs(sum / n - 1.0) < 0.05);
}

TEST_CASE("empirical Ito isometry for X == 1 and X == B") {
    TimeGrid g = make_grid(1.0, 256);
    const int n = 4000;
    double m2_const = 0, iso_const = 0, m2_b = 0, iso_b = 0;
    RealPath ones{g, std::vector<double>(static_cast<std::size_t>(g.n_nodes()), 1.0)};
    for (int p = 0; p < n; ++p) {
        RealPath b = sample_brownian(g, PathSeed{17, static_cast<std::uint64_t>(p)});
        RealPath mc = ito_integral(ones, b);
        RealPath mb = ito_integral(b, b);
        m2_const += mc[g.n_steps] * mc[g.n_steps];
        iso_const += 1.0;  // sum X^2 dt = t_end
        m2_b += mb[g.n_steps] * mb[g.n_steps];
        double acc = 0.0;
        for (std::int64_t i = 0; i < g.n_steps; ++i) acc += b[i] * b[i] * g.dt;
        iso_b += acc;
    }
    CHECK(std::fabs(m2_const / n - iso_const / n) < 0.05 * (iso_const / n));
    CHECK(std::fabs(m2_b / n - iso_b / n) < 0.05 * (iso_b / n));
}

TEST_CASE("builtin function catalog") {
    auto fns = builtin_functions();
    CHECK(fns.size() >= 6);

    FunctionSpec abs_fn = fn_abs();
    CHECK(abs_fn.f_left(0.0) == -1.0);
    CHECK(abs_fn.f_left(2.0) == 1.0);
    CHECK(abs_fn.f_left(-1e-9) == -1.0);
    CHECK(abs_fn.kind == FunctionSpec::Kind::convex);

    CHECK(fn_power(2.0).f_prime(3.0) == doctest::Approx(6.0));
    CHECK(fn_power(2.0).f(-2.0) == doctest::Approx(4.0));
    CHECK(fn_exp().f_prime(0.0) == doctest::Approx(1.0));
    CHECK(fn_cubic().f_prime(2.0) == doctest::Approx(12.0));
    CHECK(fn_affine(2.0, 1.0).f(3.0) == doctest::Approx(7.0));
    CHECK(fn_affine(2.0, 1.0).nonvanishing);
    CHECK(!fn_affine(0.0, 1.0).nonvanishing);

    FunctionSpec relu = fn_relu();
    CHECK(relu.f_left(0.0) == 0.0);
    CHECK(relu.f_left(1.0) == 1.0);
    CHECK(relu.kind == FunctionSpec::Kind::convex);

    // C1 specs carry f_left == f_prime
    FunctionSpec cub = fn_cubic();
    for (double x : {-1.5, 0.0, 2.5}) CHECK(cub.f_left(x) == cub.f_prime(x));
}

TEST_SUITE_END();

#include "sdcalc/process_model.hpp"

#include <cmath>
#include <stdexcept>

namespace sdcalc {

RealPath ito_integral(const RealPath& X, const RealPath& B) {
    require_same_grid(X.grid, B.grid, "ito_integral");
    const std::int64_t n = B.grid.n_steps;
    RealPath m{B.grid, std::vector<double>(static_cast<std::size_t>(n + 1))};
    m.values[0] = 0.0;
    long double acc = 0.0L;
    for (std::int64_t i = 0; i < n; ++i) {
        acc += static_cast<long double>(X[i]) * (B[i + 1] - B[i]);
        m[i + 1] = static_cast<double>(acc);
    }
    return m;
}

SemimartingalePath build_semimartingale(double s0, const ProcessSpec& v_spec,
                                        const ProcessSpec& x_spec, const RealPath& B) {
    const TimeGrid& grid = B.grid;
    const std::int64_t n = grid.n_steps;
    const auto sz = static_cast<std::size_t>(n + 1);

    SemimartingalePath out;
    out.s0 = s0;
    out.B = B;
    out.x_continuous = x_spec.continuous;
    out.X = RealPath{grid, std::vector<double>(sz)};
    out.V = RealPath{grid, std::vector<double>(sz)};
    out.M = RealPath{grid, std::vector<double>(sz)};
    out.S = RealPath{grid, std::vector<double>(sz)};

    // Node order: M[i] from X[i-1], then V[i] (may read S up to i-1),
    // then S[i] = s0 + V[i] + M[i], then X[i] (may read S up to i).
    long double m_acc = 0.0L;
    for (std::int64_t i = 0; i <= n; ++i) {
        if (i > 0) m_acc += static_cast<long double>(out.X[i - 1]) * (B[i] - B[i - 1]);
        out.M[i] = static_cast<double>(m_acc);

        {
            PathHistory hist(B.values, out.S.values, i, i - 1, grid.node(i));
            out.V[i] = v_spec.eval(hist);
        }
        if (!std::isfinite(out.V[i]))
            throw numeric_domain_error("build_semimartingale: V spec produced non-finite value", i);

        out.S[i] = s0 + out.V[i] + out.M[i];
        if (!std::isfinite(out.S[i]))
            throw numeric_domain_error("build_semimartingale: non-finite S value", i);

        {
            PathHistory hist(B.values, out.S.values, i, i, grid.node(i));
            out.X[i] = x_spec.eval(hist);
        }
        if (!std::isfinite(out.X[i]))
            throw numeric_domain_error("build_semimartingale: X spec produced non-finite value", i);
    }
    if (out.V[0] != 0.0)
        throw std::invalid_argument("build_semimartingale: V spec must start at 0");
    return out;
}

RealPath exponential_martingale(const RealPath& X, const RealPath& B) {
    require_same_grid(X.grid, B.grid, "exponential_martingale");
    const std::int64_t n = B.grid.n_steps;
    const double dt = B.grid.dt;
    RealPath xi{B.grid, std::vector<double>(static_cast<std::size_t>(n + 1))};
    xi.values[0] = 1.0;
    long double log_acc = 0.0L;
    for (std::int64_t i = 0; i < n; ++i) {
        log_acc += static_cast<long double>(X[i]) * (B[i + 1] - B[i]) -
                   0.5L * static_cast<long double>(X[i]) * X[i] * dt;
        double v = std::exp(static_cast<double>(log_acc));
        if (!std::isfinite(v))
            throw numeric_domain_error("exponential_martingale: overflow", i + 1);
        xi[i + 1] = v;
    }
    return xi;
}

FunctionSpec fn_identity() {
    FunctionSpec s;
    s.name = "identity";
    s.f = [](double x) { return x; };
    s.f_prime = [](double) { return 1.0; };
    s.f_left = s.f_prime;
    s.nonvanishing = true;
    return s;
}

FunctionSpec fn_power(double p) {
    FunctionSpec s;
    s.name = "power";
    s.f = [p](double x) { return std::pow(x, p); };
    s.f_prime = [p](double x) { return p * std::pow(x, p - 1.0); };
    s.f_left = s.f_prime;
    s.nonvanishing = false;
    return s;
}

FunctionSpec fn_abs() {
    FunctionSpec s;
    s.name = "abs";
    s.f = [](double x) { return std::fabs(x); };
    s.f_left = [](double x) { return x > 0.0 ? 1.0 : -1.0; };
    s.f_prime = s.f_left;
    s.kind = FunctionSpec::Kind::convex;
    s.nonvanishing = true;  // f'_- is +-1 everywhere
    return s;
}

FunctionSpec fn_exp() {
    FunctionSpec s;
    s.name = "exp";
    s.f = [](double x) { return std::exp(x); };
    s.f_prime = [](double x) { return std::exp(x); };
    s.f_left = s.f_prime;
    s.nonvanishing = true;
    return s;
}

FunctionSpec fn_cubic() {
    FunctionSpec s;
    s.name = "cubic";
    s.f = [](double x) { return x * x * x; };
    s.f_prime = [](double x) { return 3.0 * x * x; };
    s.f_left = s.f_prime;
    s.nonvanishing = false;
    return s;
}

FunctionSpec fn_affine(double a, double b) {
    FunctionSpec s;
    s.name = "affine";
    s.f = [a, b](double x) { return a * x + b; };
    s.f_prime = [a](double) { return a; };
    s.f_left = s.f_prime;
    s.nonvanishing = a != 0.0;
    return s;
}

FunctionSpec fn_relu() {
    FunctionSpec s;
    s.name = "relu";
    s.f = [](double x) { return x > 0.0 ? x : 0.0; };
    s.f_left = [](double x) { return x > 0.0 ? 1.0 : 0.0; };  // left derivative at 0 is 0
    s.f_prime = s.f_left;
    s.kind = FunctionSpec::Kind::convex;
    s.nonvanishing = false;
    return s;
}

std::vector<FunctionSpec> builtin_functions() {
    return {fn_identity(), fn_power(2.0), fn_abs(),  fn_exp(),
            fn_cubic(),    fn_affine(1.0, 0.0),      fn_relu()};
}

}  // namespace sdcalc

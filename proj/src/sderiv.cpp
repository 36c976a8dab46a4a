#include "sdcalc/sderiv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdcalc {

namespace {

struct KernelEval {
    double value = 0.0;
    double h_eff = 0.0;
    bool clamped = false;
};

// Quadrature coefficients for sum_j coeff_j * D_j = (prefactor) * integral,
// with g_j = (j dt) * D_j and the kernel prefactor folded in afterwards.
void fill_coeffs(std::vector<double>& coeff, std::int64_t m, Quadrature quad) {
    coeff.assign(static_cast<std::size_t>(m + 1), 0.0);
    if (quad == Quadrature::simpson) {
        for (std::int64_t j = 1; j < m; ++j)
            coeff[static_cast<std::size_t>(j)] = (j % 2 ? 4.0 : 2.0) * static_cast<double>(j);
        coeff[static_cast<std::size_t>(m)] = static_cast<double>(m);
    } else {
        for (std::int64_t j = 1; j < m; ++j)
            coeff[static_cast<std::size_t>(j)] = 3.0 * static_cast<double>(j);
        coeff[static_cast<std::size_t>(m)] = 1.5 * static_cast<double>(m);
    }
}

// Effective step count for requested half-width h at node k, after boundary
// clamping and node snapping. Simpson needs an even count.
std::int64_t effective_steps(const TimeGrid& g, std::int64_t k, double h, Quadrature quad,
                             bool* clamped) {
    const std::int64_t n = g.n_steps;
    const std::int64_t m_max = (k == 0) ? n : std::min(k, n - k);
    std::int64_t m = std::llround(h / g.dt);
    *clamped = m > m_max;
    m = std::min(m, m_max);
    if (quad == Quadrature::simpson && (m % 2) != 0) --m;
    return m;
}

KernelEval kernel_eval(const CovPath& c, std::int64_t k, double h, const KernelConfig& cfg) {
    const TimeGrid& g = c.grid;
    bool clamped = false;
    const std::int64_t m = effective_steps(g, k, h, cfg.quadrature, &clamped);
    if (m < 4)
        throw resolution_error("difference kernel: effective half-width below 4*dt");

    std::vector<double> coeff;
    fill_coeffs(coeff, m, cfg.quadrature);

    long double acc = 0.0L;
    if (k == 0) {
        const double c0 = c[0];
        for (std::int64_t j = 1; j <= m; ++j)
            acc += static_cast<long double>(coeff[static_cast<std::size_t>(j)]) * (c[j] - c0);
        acc /= static_cast<long double>(m) * m * m * g.dt;
    } else {
        for (std::int64_t j = 1; j <= m; ++j)
            acc += static_cast<long double>(coeff[static_cast<std::size_t>(j)]) *
                   (c[k + j] - c[k - j]);
        acc /= 2.0L * m * m * m * g.dt;
    }
    return KernelEval{static_cast<double>(acc), static_cast<double>(m) * g.dt, clamped};
}

// Least squares y = a + b x. Returns {a, b, rms residual}.
struct LineFit {
    double a, b, rms;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    const auto n = static_cast<long double>(xs.size());
    long double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += static_cast<long double>(xs[i]) * xs[i];
        sxy += static_cast<long double>(xs[i]) * ys[i];
    }
    const long double det = n * sxx - sx * sx;
    const long double b = (n * sxy - sx * sy) / det;
    const long double a = (sy - b * sx) / n;
    long double rss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const long double r = ys[i] - (a + b * xs[i]);
        rss += r * r;
    }
    return LineFit{static_cast<double>(a), static_cast<double>(b),
                   static_cast<double>(std::sqrt(static_cast<double>(rss / n)))};
}

// Least squares y = a + b x + c x^2 via 3x3 normal equations.
double fit_quadratic_intercept(const std::vector<double>& xs, const std::vector<double>& ys) {
    long double s0 = static_cast<long double>(xs.size());
    long double s1 = 0, s2 = 0, s3 = 0, s4 = 0, t0 = 0, t1 = 0, t2 = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const long double x = xs[i], y = ys[i];
        s1 += x; s2 += x * x; s3 += x * x * x; s4 += x * x * x * x;
        t0 += y; t1 += x * y; t2 += x * x * y;
    }
    // Cramer on [[s0 s1 s2][s1 s2 s3][s2 s3 s4]] [a b c]' = [t0 t1 t2]'
    const long double det = s0 * (s2 * s4 - s3 * s3) - s1 * (s1 * s4 - s3 * s2) +
                            s2 * (s1 * s3 - s2 * s2);
    const long double det_a = t0 * (s2 * s4 - s3 * s3) - s1 * (t1 * s4 - s3 * t2) +
                              s2 * (t1 * s3 - s2 * t2);
    return static_cast<double>(det_a / det);
}

}  // namespace

double stochastic_difference(const CovPath& c, double t, double h, const KernelConfig& cfg) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw std::invalid_argument("stochastic_difference: h must be positive");
    const std::int64_t k = snap_index(c.grid, t);
    return kernel_eval(c, k, h, cfg).value;
}

DerivEstimate stochastic_derivative(const CovPath& c, double t, const KernelConfig& cfg) {
    if (cfg.levels < 1) throw std::invalid_argument("stochastic_derivative: levels must be >= 1");
    const std::int64_t k = snap_index(c.grid, t);

    DerivEstimate est;
    est.t = c.grid.node(k);

    std::vector<double> xs, ys;
    double h = cfg.h0;
    double last_h = -1.0;
    for (int j = 0; j < cfg.levels; ++j, h *= 0.5) {
        KernelEval ev;
        try {
            ev = kernel_eval(c, k, h, cfg);
        } catch (const resolution_error&) {
            continue;
        }
        if (ev.h_eff == last_h) continue;  // clamping collapsed two levels
        last_h = ev.h_eff;
        est.per_h.push_back(PerLevel{ev.h_eff, ev.value, ev.clamped});
        xs.push_back(ev.h_eff * ev.h_eff);
        ys.push_back(ev.value);
    }
    if (xs.size() < 2)
        throw resolution_error("stochastic_derivative: fewer than 2 usable kernel levels");

    const LineFit fit = fit_line(xs, ys);
    est.value = fit.a;
    est.bias_est = fit.b;
    est.noise_est = fit.rms;
    return est;
}

double strong_derivative(const CovPath& c, double t, double w) {
    const TimeGrid& g = c.grid;
    if (!(w > 0.0) || !std::isfinite(w))
        throw std::invalid_argument("strong_derivative: w must be positive");
    const std::int64_t mw = std::llround(w / g.dt);
    if (mw < 2) throw resolution_error("strong_derivative: window below 2*dt");
    const std::int64_t k = snap_index(g, t);
    const std::int64_t n = g.n_steps;
    const double span = static_cast<double>(mw) * g.dt;
    if (k == 0) return (c[mw] - c[0]) / span;
    if (k == n) return (c[n] - c[n - mw]) / span;
    if (k - mw < 0 || k + mw > n)
        throw resolution_error("strong_derivative: window exits the grid interior");
    return (c[k + mw] - c[k - mw]) / (2.0 * span);
}

namespace {

// One-sided quotient sequence on the decreasing eps schedule, with the
// divergence detector (two consecutive magnitude jumps).
double extrapolate_one_sided(const CovPath& c, std::int64_t k, int direction,
                             const KernelConfig& cfg) {
    const TimeGrid& g = c.grid;
    const std::int64_t avail = direction > 0 ? g.n_steps - k : k;

    std::vector<double> eps, q;
    double h = cfg.h0;
    std::int64_t last_m = -1;
    for (int j = 0; j < std::max(cfg.levels, 2); ++j, h *= 0.5) {
        std::int64_t m = std::llround(h / g.dt);
        m = std::min(m, avail);
        if (m < 1) continue;
        if (m == last_m) continue;
        last_m = m;
        const double e = static_cast<double>(m) * g.dt;
        const double quot = direction > 0 ? (c[k + m] - c[k]) / e : (c[k] - c[k - m]) / e;
        eps.push_back(e);
        q.push_back(quot);
    }
    if (q.size() < 2)
        throw resolution_error("one_sided: fewer than 2 usable eps levels");

    int growth_streak = 0;
    for (std::size_t j = 1; j < q.size(); ++j) {
        if (std::fabs(q[j]) >= 1.95 * std::fabs(q[j - 1]) && std::fabs(q[j]) > 1e-12) {
            if (++growth_streak >= 2)
                throw divergence_error("one_sided: difference quotients diverge");
        } else {
            growth_streak = 0;
        }
    }
    if (q.size() == 2) return fit_line(eps, q).a;
    return fit_quadratic_intercept(eps, q);
}

}  // namespace

OneSidedDerivs one_sided(const CovPath& c, double t, const KernelConfig& cfg) {
    const std::int64_t k = snap_index(c.grid, t);
    if (k == c.grid.n_steps)
        throw std::invalid_argument("one_sided: t must be interior (or 0 for d_plus only)");
    OneSidedDerivs out;
    out.d_plus = extrapolate_one_sided(c, k, +1, cfg);
    if (k > 0) out.d_minus = extrapolate_one_sided(c, k, -1, cfg);
    if (!std::isfinite(out.d_plus) || (out.d_minus && !std::isfinite(*out.d_minus)))
        throw divergence_error("one_sided: non-finite extrapolation");
    return out;
}

double generalized_derivative(const CovPath& c, double t, const KernelConfig& cfg) {
    const OneSidedDerivs d = one_sided(c, t, cfg);
    if (!d.d_minus) return d.d_plus;
    return 0.5 * (d.d_plus + *d.d_minus);
}

double derivative_wrt_fB(const SemimartingalePath& s, const FunctionSpec& f, double t,
                         const KernelConfig& cfg, double w) {
    if (!f.nonvanishing)
        throw std::invalid_argument("derivative_wrt_fB: f' must vanish nowhere");
    if (w <= 0.0) w = cfg.h0;

    const TimeGrid& g = s.B.grid;
    RealPath s2{g, std::vector<double>(static_cast<std::size_t>(g.n_nodes()))};
    for (std::int64_t i = 0; i <= g.n_steps; ++i) s2[i] = f.f(s.B[i]);

    const CovPath num_cov = cross_variation(s.S, s.B);
    const CovPath den_cov = cross_variation(s2, s2);
    const double num = strong_derivative(num_cov, t, w);
    const double den = strong_derivative(den_cov, t, w);

    const double noise_floor = std::sqrt(g.dt / w);
    if (std::fabs(den) < 10.0 * noise_floor)
        throw ill_conditioned_error("derivative_wrt_fB: denominator below noise floor");
    return num / den;
}

DerivProfile adapted_profile(const CovPath& c, double h_rec, Quadrature quad) {
    const TimeGrid& g = c.grid;
    std::int64_t m = std::llround(h_rec / g.dt);
    if (quad == Quadrature::simpson && (m % 2) != 0) --m;
    if (m < 4) throw resolution_error("adapted_profile: window below 4*dt");
    const std::int64_t n = g.n_steps;
    if (m > n) throw resolution_error("adapted_profile: window exceeds the grid");

    std::vector<double> coeff;
    fill_coeffs(coeff, m, quad);
    double wsum = 0.0;
    for (double v : coeff) wsum += v;
    const double scale = 1.0 / (static_cast<double>(m) * m * m * g.dt);

    DerivProfile out;
    out.values.assign(static_cast<std::size_t>(n + 1), 0.0);
    out.valid.assign(static_cast<std::size_t>(n + 1), 0);

    const double* cv = c.values.data();
    for (std::int64_t k = m; k <= n; ++k) {
        double acc = 0.0;
        const double* base = cv + k;
        for (std::int64_t j = 1; j <= m; ++j) acc += coeff[static_cast<std::size_t>(j)] * base[-j];
        out.values[static_cast<std::size_t>(k)] = (wsum * cv[k] - acc) * scale;
        out.valid[static_cast<std::size_t>(k)] = 1;
    }
    for (std::int64_t k = 0; k < m; ++k)
        out.values[static_cast<std::size_t>(k)] = out.values[static_cast<std::size_t>(m)];
    return out;
}

}  // namespace sdcalc

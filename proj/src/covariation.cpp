#include "sdcalc/covariation.hpp"

namespace sdcalc {

CovPath cross_variation(const RealPath& p, const RealPath& q) {
    require_same_grid(p.grid, q.grid, "cross_variation");
    const std::int64_t n = p.grid.n_steps;
    CovPath c{p.grid, std::vector<double>(static_cast<std::size_t>(n + 1))};
    c.values[0] = 0.0;
    long double acc = 0.0L;
    for (std::int64_t i = 0; i < n; ++i) {
        acc += static_cast<long double>(p[i + 1] - p[i]) * (q[i + 1] - q[i]);
        c.values[static_cast<std::size_t>(i + 1)] = static_cast<double>(acc);
    }
    return c;
}

BmCovariation covariation_with_bm(const SemimartingalePath& s) {
    BmCovariation out;
    out.cov = cross_variation(s.S, s.B);
    const TimeGrid& grid = s.B.grid;
    out.reference = RealPath{grid, std::vector<double>(static_cast<std::size_t>(grid.n_nodes()))};
    out.reference.values[0] = 0.0;
    long double acc = 0.0L;
    for (std::int64_t i = 0; i < grid.n_steps; ++i) {
        acc += static_cast<long double>(s.X[i]) * grid.dt;
        out.reference[i + 1] = static_cast<double>(acc);
    }
    return out;
}

CovPath cov_from_function(const TimeGrid& grid, const std::function<double(double)>& f) {
    CovPath c{grid, std::vector<double>(static_cast<std::size_t>(grid.n_nodes()))};
    for (std::int64_t i = 0; i <= grid.n_steps; ++i)
        c.values[static_cast<std::size_t>(i)] = f(grid.node(i));
    return c;
}

}  // namespace sdcalc

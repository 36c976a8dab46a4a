#pragma once

#include <cstdint>
#include <vector>

namespace sdcalc {

// Uniform discretization of [0, t_end] with n_steps intervals.
// node(i) = i*dt, i = 0..n_steps; node(n_steps) == t_end up to rounding.
struct TimeGrid {
    double t_end = 0.0;
    std::int64_t n_steps = 0;
    double dt = 0.0;

    double node(std::int64_t i) const { return static_cast<double>(i) * dt; }
    std::int64_t n_nodes() const { return n_steps + 1; }

    friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
        return a.t_end == b.t_end && a.n_steps == b.n_steps;
    }
};

TimeGrid make_grid(double t_end, std::int64_t n_steps);

// A real-valued sample path on the nodes of a grid. values.size() == n_steps+1.
struct RealPath {
    TimeGrid grid;
    std::vector<double> values;

    double operator[](std::int64_t i) const { return values[static_cast<std::size_t>(i)]; }
    double& operator[](std::int64_t i) { return values[static_cast<std::size_t>(i)]; }
};

// Nearest grid node for t in [0, t_end]; throws std::invalid_argument outside.
std::int64_t snap_index(const TimeGrid& grid, double t);

// Throws std::invalid_argument unless both paths live on the same grid.
void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* what);

}  // namespace sdcalc

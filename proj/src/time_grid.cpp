#include "sdcalc/time_grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sdcalc {

TimeGrid make_grid(double t_end, std::int64_t n_steps) {
    if (!(t_end > 0.0) || !std::isfinite(t_end))
        throw std::invalid_argument("make_grid: t_end must be positive and finite");
    if (n_steps < 2)
        throw std::invalid_argument("make_grid: n_steps must be >= 2");
    return TimeGrid{t_end, n_steps, t_end / static_cast<double>(n_steps)};
}

std::int64_t snap_index(const TimeGrid& grid, double t) {
    if (!std::isfinite(t) || t < -0.5 * grid.dt || t > grid.t_end + 0.5 * grid.dt)
        throw std::invalid_argument("snap_index: t = " + std::to_string(t) +
                                    " outside [0, " + std::to_string(grid.t_end) + "]");
    std::int64_t i = std::llround(t / grid.dt);
    if (i < 0) i = 0;
    if (i > grid.n_steps) i = grid.n_steps;
    return i;
}

void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* what) {
    if (!(a == b))
        throw std::invalid_argument(std::string(what) + ": paths live on different grids");
}

}  // namespace sdcalc

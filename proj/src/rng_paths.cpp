#include "sdcalc/rng_paths.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sdcalc {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Two mixing rounds keep streams with equal root_seed decorrelated and the
// map (root, stream) -> state injective for fixed root.
std::uint64_t stream_state(const PathSeed& seed) {
    return mix64(mix64(seed.root_seed + kGolden) ^ (kGolden * (seed.stream_index + 1)));
}

}  // namespace

PathSeed derive_stream(const PathSeed& seed, std::uint64_t k) {
    if (k >= (1ULL << 32))
        throw std::invalid_argument("derive_stream: stream index must be < 2^32");
    return PathSeed{seed.root_seed, k};
}

std::uint64_t SplitMix64::next() {
    state_ += kGolden;
    return mix64(state_);
}

GaussianStream::GaussianStream(const PathSeed& seed) : gen_(stream_state(seed)) {}

double GaussianStream::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // uniforms in (0, 1]; log is safe
    double u1 = static_cast<double>((gen_.next() >> 11) + 1) * 0x1.0p-53;
    double u2 = static_cast<double>((gen_.next() >> 11) + 1) * 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

RealPath sample_brownian(const TimeGrid& grid, const PathSeed& seed) {
    if (grid.n_steps < 2) throw std::invalid_argument("sample_brownian: invalid grid");
    GaussianStream g(seed);
    const double sdt = std::sqrt(grid.dt);
    RealPath path{grid, std::vector<double>(static_cast<std::size_t>(grid.n_nodes()))};
    path.values[0] = 0.0;
    for (std::int64_t i = 0; i < grid.n_steps; ++i)
        path[i + 1] = path[i] + sdt * g.next();
    return path;
}

}  // namespace sdcalc

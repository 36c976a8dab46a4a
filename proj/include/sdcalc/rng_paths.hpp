#pragma once

#include <cstdint>

#include "sdcalc/time_grid.hpp"

namespace sdcalc {

// Identifies one reproducible random stream: (root_seed, stream_index) maps
// injectively to generator state for stream_index < 2^32, so Monte Carlo
// paths can be generated in any order or in parallel with identical results.
struct PathSeed {
    std::uint64_t root_seed = 0;
    std::uint64_t stream_index = 0;
};

// Pure: derive_stream(s, k) == (s.root_seed, k). k must be < 2^32.
PathSeed derive_stream(const PathSeed& seed, std::uint64_t k);

// splitmix64 run in counter mode. State advances by a fixed odd constant,
// output is a bijective mix of the state, so the k-th draw is a pure
// function of (seed, k).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}
    std::uint64_t next();

private:
    std::uint64_t state_;
};

// Standard normal draws from a SplitMix64 stream via Box-Muller.
// Fully deterministic across platforms (no library distributions involved).
class GaussianStream {
public:
    explicit GaussianStream(const PathSeed& seed);
    double next();

private:
    SplitMix64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Brownian path: values[0]=0, increments iid N(0, dt) under the seeded
// stream. Identical (grid, seed) gives bit-identical output.
RealPath sample_brownian(const TimeGrid& grid, const PathSeed& seed);

}  // namespace sdcalc

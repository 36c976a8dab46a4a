#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sdcalc {

// Base for all engine-specific failures. Plain precondition violations
// (bad arguments, mismatched grids) throw std::invalid_argument instead.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested window/step size cannot be resolved on the grid.
struct resolution_error : error {
    using error::error;
};

// One-sided difference quotients blow up; Eq-of-finiteness hypothesis fails.
struct divergence_error : error {
    using error::error;
};

// A process spec produced a non-finite value at a node.
struct numeric_domain_error : error {
    numeric_domain_error(const std::string& msg, std::int64_t node_index)
        : error(msg + " (node " + std::to_string(node_index) + ")"), node(node_index) {}
    std::int64_t node;
};

// Denominator estimate indistinguishable from noise.
struct ill_conditioned_error : error {
    using error::error;
};

// No mean-value point found although the lemma guarantees one.
struct smvt_violation_error : error {
    using error::error;
};

// A spec tried to read path values beyond its adapted horizon.
struct adaptedness_error : error {
    using error::error;
};

}  // namespace sdcalc

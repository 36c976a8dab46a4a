#pragma once

#include <functional>

#include "sdcalc/process_model.hpp"
#include "sdcalc/time_grid.hpp"

namespace sdcalc {

// Cumulative cross-variation at the nodes. values[0] = 0; for P == Q the
// sequence is non-decreasing.
struct CovPath {
    TimeGrid grid;
    std::vector<double> values;

    double operator[](std::int64_t i) const { return values[static_cast<std::size_t>(i)]; }
};

// values[k] = sum_{i<k} (P[i+1]-P[i]) * (Q[i+1]-Q[i]). Bilinear, symmetric.
CovPath cross_variation(const RealPath& p, const RealPath& q);

// <S,B> estimate from the full path S plus the theoretical reference
// ref[k] = sum_{i<k} X[i] dt (the continuous-time <M,B> = int X ds).
struct BmCovariation {
    CovPath cov;
    RealPath reference;
};

BmCovariation covariation_with_bm(const SemimartingalePath& s);

// Synthetic covariation path C[i] = f(node(i)); test and diagnostics input.
CovPath cov_from_function(const TimeGrid& grid, const std::function<double(double)>& f);

}  // namespace sdcalc

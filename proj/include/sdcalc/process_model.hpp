#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sdcalc/errors.hpp"
#include "sdcalc/time_grid.hpp"

namespace sdcalc {

// Adapted read access to the paths while a semimartingale is being built.
// At node i a spec may read B[0..i] and S[0..s_limit]; any index beyond
// that throws adaptedness_error, so non-adapted specs fail at construction.
class PathHistory {
public:
    PathHistory(std::span<const double> b, std::span<const double> s,
                std::int64_t index, std::int64_t s_limit, double time)
        : b_(b), s_(s), index_(index), s_limit_(s_limit), time_(time) {}

    std::int64_t index() const { return index_; }
    double time() const { return time_; }
    double b() const { return b_[static_cast<std::size_t>(index_)]; }

    double b_at(std::int64_t j) const {
        if (j < 0 || j > index_)
            throw adaptedness_error("spec read B beyond its adapted horizon");
        return b_[static_cast<std::size_t>(j)];
    }
    double s_at(std::int64_t j) const {
        if (j < 0 || j > s_limit_)
            throw adaptedness_error("spec read S beyond its adapted horizon");
        return s_[static_cast<std::size_t>(j)];
    }
    // Latest available S value (S at the current node for integrand specs,
    // at the previous node for bounded-variation specs).
    double s() const {
        if (s_limit_ < 0)
            throw adaptedness_error("spec read S before any node was built");
        return s_[static_cast<std::size_t>(s_limit_)];
    }

private:
    std::span<const double> b_;
    std::span<const double> s_;
    std::int64_t index_;
    std::int64_t s_limit_;
    double time_;
};

// Evaluation rule for an adapted process on the grid. continuous declares
// a.s.-continuous paths (selects which theorem a verification run claims).
struct ProcessSpec {
    std::string name;
    std::function<double(const PathHistory&)> eval;
    bool continuous = true;
};

// Scalar function with analytic first derivative and left derivative.
// c1_abscont requires f_left == f_prime; convex requires f_left non-decreasing.
struct FunctionSpec {
    enum class Kind { c1_abscont, convex };

    std::string name;
    std::function<double(double)> f;
    std::function<double(double)> f_prime;
    std::function<double(double)> f_left;
    Kind kind = Kind::c1_abscont;
    bool nonvanishing = false;  // f' (resp. f'_-) vanishes nowhere
};

FunctionSpec fn_identity();
FunctionSpec fn_power(double p);
FunctionSpec fn_abs();
FunctionSpec fn_exp();
FunctionSpec fn_cubic();
FunctionSpec fn_affine(double a, double b);
FunctionSpec fn_relu();
std::vector<FunctionSpec> builtin_functions();

// Discrete semimartingale S = S0 + V + M with M = ito_integral(X, B).
// S[i] - S0 - V[i] - M[i] == 0 holds exactly by construction.
struct SemimartingalePath {
    double s0 = 0.0;
    RealPath B;
    RealPath X;
    RealPath V;
    RealPath M;
    RealPath S;
    bool x_continuous = true;
};

// Left-endpoint Ito sums: M[k] = sum_{i<k} X[i]*(B[i+1]-B[i]), M[0]=0.
RealPath ito_integral(const RealPath& X, const RealPath& B);

SemimartingalePath build_semimartingale(double s0, const ProcessSpec& v_spec,
                                        const ProcessSpec& x_spec, const RealPath& B);

// Xi[k] = exp( sum_{i<k} X[i] dB[i] - 1/2 sum_{i<k} X[i]^2 dt ), Xi[0]=1.
RealPath exponential_martingale(const RealPath& X, const RealPath& B);

}  // namespace sdcalc

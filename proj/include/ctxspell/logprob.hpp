#pragma once

#include <cmath>
#include <limits>

namespace ctxspell {

// Probabilities live in log space throughout scoring. Zero probability is
// represented by -infinity and must be checked with is_log_zero before any
// arithmetic that assumes a finite value.
inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline bool is_log_zero(double lp) { return std::isinf(lp) && lp < 0; }

inline double log_of(double p) { return p > 0.0 ? std::log(p) : kLogZero; }

// Stable log(exp(a) + exp(b)).
inline double log_add(double a, double b) {
    if (is_log_zero(a)) return b;
    if (is_log_zero(b)) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

}  // namespace ctxspell

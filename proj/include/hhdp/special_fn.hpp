#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace hhdp {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Natural log of the gamma function for finite x > 0.
/// Lanczos approximation (g = 7, nine terms) with reflection below 0.5.
double log_gamma(double x);

/// ln[(a)_n] = ln Γ(a+n) − ln Γ(a), the log rising factorial.
double log_pochhammer(double a, std::size_t n);

/// ln(n!) for non-negative integer n.
double log_factorial(std::size_t n);

/// ln|s(n, l)|, unsigned Stirling number of the first kind, 1 ≤ l ≤ n.
double log_unsigned_stirling_first(std::size_t n, std::size_t l);

/// Row n of the cached ln|s(n, ·)| triangle: entries l = 0..n, with
/// ln|s(n,0)| = −inf for n > 0 and ln|s(0,0)| = 0. The span stays valid
/// for the lifetime of the process.
std::span<const double> stirling_first_log_row(std::size_t n);

/// Largest n the Stirling cache will build; default 10 000.
std::size_t stirling_cap();
void set_stirling_cap(std::size_t cap);

/// Stable ln Σ exp(v_i); −inf if every entry is −inf. Throws on empty input.
double log_sum_exp(std::span<const double> values);

inline double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

}  // namespace hhdp

#include "hhdp/special_fn.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <deque>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <string>
#include <vector>

#include "hhdp/errors.hpp"

namespace hhdp {

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoef = {
    0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
    771.32342877765313,       -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};

double lanczos_log_gamma(double x) {
    // valid for x >= 0.5
    const double xm1 = x - 1.0;
    double series = kLanczosCoef[0];
    for (std::size_t i = 1; i < kLanczosCoef.size(); ++i) {
        series += kLanczosCoef[i] / (xm1 + static_cast<double>(i));
    }
    const double t = xm1 + kLanczosG + 0.5;
    return 0.5 * std::log(2.0 * std::numbers::pi) + (xm1 + 0.5) * std::log(t) - t +
           std::log(series);
}

// Small-argument Pochhammer sums are exact up to rounding of the logs;
// differences of log-gammas lose digits when a is large and n small.
constexpr std::size_t kDirectPochhammerMax = 64;

class StirlingTable {
public:
    std::span<const double> row(std::size_t n) {
        {
            std::shared_lock lock(mutex_);
            if (n < rows_.size()) return rows_[n];
        }
        std::unique_lock lock(mutex_);
        if (n > cap_.load()) {
            throw DomainError("Stirling row " + std::to_string(n) + " exceeds cap " +
                              std::to_string(cap_.load()));
        }
        if (rows_.empty()) rows_.push_back({0.0});
        while (rows_.size() <= n) {
            const std::size_t m = rows_.size() - 1;  // build row m+1 from row m
            const std::vector<double>& prev = rows_[m];
            std::vector<double> next(m + 2, kNegInf);
            const double log_m = m > 0 ? std::log(static_cast<double>(m)) : kNegInf;
            for (std::size_t l = 1; l <= m + 1; ++l) {
                const double stay = l <= m ? log_m + prev[l] : kNegInf;
                next[l] = log_add_exp(stay, prev[l - 1]);
            }
            rows_.push_back(std::move(next));
        }
        return rows_[n];
    }

    std::atomic<std::size_t> cap_{10000};

private:
    std::shared_mutex mutex_;
    std::deque<std::vector<double>> rows_;
};

StirlingTable& stirling_table() {
    static StirlingTable table;
    return table;
}

}  // namespace

double log_gamma(double x) {
    if (!std::isfinite(x) || x <= 0.0) {
        throw DomainError("log_gamma: argument must be finite and positive, got " +
                          std::to_string(x));
    }
    if (x < 0.5) {
        // Γ(x)Γ(1−x) = π / sin(πx)
        return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) -
               lanczos_log_gamma(1.0 - x);
    }
    return lanczos_log_gamma(x);
}

double log_pochhammer(double a, std::size_t n) {
    if (!std::isfinite(a) || a <= 0.0) {
        throw DomainError("log_pochhammer: base must be positive, got " + std::to_string(a));
    }
    if (n == 0) return 0.0;
    if (n <= kDirectPochhammerMax) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += std::log(a + static_cast<double>(i));
        return acc;
    }
    return log_gamma(a + static_cast<double>(n)) - log_gamma(a);
}

double log_factorial(std::size_t n) {
    if (n < 2) return 0.0;
    return log_pochhammer(1.0, n);
}

std::span<const double> stirling_first_log_row(std::size_t n) { return stirling_table().row(n); }

double log_unsigned_stirling_first(std::size_t n, std::size_t l) {
    if (l < 1 || l > n) {
        throw DomainError("log_unsigned_stirling_first: need 1 <= l <= n, got n=" +
                          std::to_string(n) + " l=" + std::to_string(l));
    }
    return stirling_table().row(n)[l];
}

std::size_t stirling_cap() { return stirling_table().cap_.load(); }

void set_stirling_cap(std::size_t cap) { stirling_table().cap_.store(cap); }

double log_sum_exp(std::span<const double> values) {
    if (values.empty()) throw DomainError("log_sum_exp: empty sequence");
    const double m = *std::max_element(values.begin(), values.end());
    if (m == kNegInf) return kNegInf;
    if (!std::isfinite(m)) return m;
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - m);
    return m + std::log(acc);
}

}  // namespace hhdp

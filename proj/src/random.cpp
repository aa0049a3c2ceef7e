#include "hhdp/random.hpp"

#include <algorithm>
#include <cmath>

#include "hhdp/errors.hpp"
#include "hhdp/special_fn.hpp"

namespace hhdp {

namespace {
constexpr double kShapeFloor = 1e-300;
constexpr double kWeightFloor = 1e-300;
}  // namespace

std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + (stream + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double uniform_open(Rng& rng) {
    // 53 random bits, shifted off zero
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal(Rng& rng) {
    // Marsaglia polar method; avoids implementation-defined std distributions
    for (;;) {
        const double u = 2.0 * uniform_open(rng) - 1.0;
        const double v = 2.0 * uniform_open(rng) - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
}

double log_gamma_variate(Rng& rng, double shape) {
    if (!(shape > 0.0) || !std::isfinite(shape)) {
        if (shape == 0.0) shape = kShapeFloor;
        else throw DomainError("log_gamma_variate: shape must be positive");
    }
    if (shape < 1.0) {
        // G(a) = G(a+1) * U^(1/a)
        return log_gamma_variate(rng, shape + 1.0) + std::log(uniform_open(rng)) / shape;
    }
    // Marsaglia & Tsang
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = standard_normal(rng);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform_open(rng);
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v);
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d * v);
    }
}

double gamma_variate(Rng& rng, double shape, double rate) {
    return std::exp(log_gamma_variate(rng, shape)) / rate;
}

std::vector<double> log_dirichlet(Rng& rng, std::span<const double> alpha) {
    std::vector<double> out(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        out[i] = log_gamma_variate(rng, std::max(alpha[i], kShapeFloor));
    }
    const double norm = log_sum_exp(out);
    for (double& v : out) v -= norm;
    return out;
}

std::vector<double> dirichlet(Rng& rng, std::span<const double> alpha) {
    std::vector<double> out = log_dirichlet(rng, alpha);
    double total = 0.0;
    for (double& v : out) {
        v = std::max(std::exp(v), kWeightFloor);
        total += v;
    }
    for (double& v : out) v /= total;
    return out;
}

std::size_t sample_log_categorical(Rng& rng, std::span<const double> log_weights) {
    if (log_weights.empty()) throw NumericalError("categorical draw over an empty support");
    double m = kNegInf;
    for (double w : log_weights) {
        if (std::isnan(w)) throw NumericalError("NaN log weight in categorical draw");
        m = std::max(m, w);
    }
    if (m == kNegInf) throw NumericalError("all candidate weights are zero");
    double total = 0.0;
    for (double w : log_weights) total += std::exp(w - m);
    double u = uniform_open(rng) * total;
    for (std::size_t i = 0; i < log_weights.size(); ++i) {
        u -= std::exp(log_weights[i] - m);
        if (u <= 0.0) return i;
    }
    // rounding: return the last index with positive mass
    for (std::size_t i = log_weights.size(); i-- > 0;) {
        if (log_weights[i] != kNegInf) return i;
    }
    return 0;
}

}  // namespace hhdp

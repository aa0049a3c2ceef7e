#include <algorithm>
#include <cmath>

#include "hhdp/kernels.hpp"
#include "hhdp/special_fn.hpp"

namespace hhdp::kernels::detail {

void gaussian_scaled_likelihood_scalar(std::span<const double> x, const GaussianAtoms& atoms,
                                       std::span<double> lik, std::span<double> row_max) {
    const std::size_t L = atoms.size();
    for (std::size_t i = 0; i < x.size(); ++i) {
        double* row = lik.data() + i * L;
        double m = kNegInf;
        for (std::size_t l = 0; l < L; ++l) {
            const double d = x[i] - atoms.mu[l];
            row[l] = atoms.log_norm[l] + atoms.neg_half_prec[l] * d * d;
            m = std::max(m, row[l]);
        }
        row_max[i] = m;
        for (std::size_t l = 0; l < L; ++l) row[l] = std::exp(row[l] - m);
    }
}

void mixture_dot_scalar(std::span<const double> lik, std::size_t n, std::size_t L,
                        std::span<const double> weights, std::size_t K, std::span<double> out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = lik.data() + i * L;
        for (std::size_t k = 0; k < K; ++k) {
            const double* w = weights.data() + k * L;
            double acc = 0.0;
            for (std::size_t l = 0; l < L; ++l) acc += w[l] * row[l];
            out[i * K + k] = acc;
        }
    }
}

void exp_nonpositive_scalar(std::span<const double> v, std::span<double> out) {
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] < -708.0 ? 0.0 : std::exp(v[i]);
}

}  // namespace hhdp::kernels::detail

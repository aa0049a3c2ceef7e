#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops of the samplers and density summaries. Each
// entry point has a scalar reference implementation and an AVX2+FMA
// variant; the variant is picked at first use from CPUID and can be
// overridden with set_backend().

namespace hhdp::kernels {

enum class Backend { Scalar, Avx2 };

Backend active_backend();
std::string_view backend_name(Backend b);
bool backend_available(Backend b);

/// Forces a backend; throws UsageError if the CPU lacks it.
void set_backend(Backend b);

/// Per-atom Gaussian constants: log_norm = −½ ln(2πσ²), neg_half_prec = −1/(2σ²).
struct GaussianAtoms {
    std::span<const double> mu;
    std::span<const double> log_norm;
    std::span<const double> neg_half_prec;

    std::size_t size() const { return mu.size(); }
};

/// For every observation i and atom l:
///   row_max[i] = max_l ln N(x_i | atom l)
///   lik[i·L + l] = exp(ln N(x_i | atom l) − row_max[i])   (in [0, 1])
void gaussian_scaled_likelihood(std::span<const double> x, const GaussianAtoms& atoms,
                                std::span<double> lik, std::span<double> row_max);

/// out[i·K + k] = Σ_l weights[k·L + l] · lik[i·L + l]
/// (lik: n×L row-major, weights: K×L row-major, out: n×K).
void mixture_dot(std::span<const double> lik, std::size_t n, std::size_t L,
                 std::span<const double> weights, std::size_t K, std::span<double> out);

/// out[i] = exp(v[i]) for v[i] ≤ 0; arguments below −708 return 0.
void exp_nonpositive(std::span<const double> v, std::span<double> out);

namespace detail {

void gaussian_scaled_likelihood_scalar(std::span<const double> x, const GaussianAtoms& atoms,
                                       std::span<double> lik, std::span<double> row_max);
void mixture_dot_scalar(std::span<const double> lik, std::size_t n, std::size_t L,
                        std::span<const double> weights, std::size_t K, std::span<double> out);
void exp_nonpositive_scalar(std::span<const double> v, std::span<double> out);

#if defined(__x86_64__) || defined(_M_X64)
void gaussian_scaled_likelihood_avx2(std::span<const double> x, const GaussianAtoms& atoms,
                                     std::span<double> lik, std::span<double> row_max);
void mixture_dot_avx2(std::span<const double> lik, std::size_t n, std::size_t L,
                      std::span<const double> weights, std::size_t K, std::span<double> out);
void exp_nonpositive_avx2(std::span<const double> v, std::span<double> out);
#endif

}  // namespace detail

}  // namespace hhdp::kernels

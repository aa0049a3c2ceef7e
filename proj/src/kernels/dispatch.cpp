#include <atomic>
#include <string>

#include "hhdp/errors.hpp"
#include "hhdp/kernels.hpp"

namespace hhdp::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

std::atomic<Backend>& selected() {
    static std::atomic<Backend> backend{cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar};
    return backend;
}

}  // namespace

Backend active_backend() { return selected().load(std::memory_order_relaxed); }

std::string_view backend_name(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

bool backend_available(Backend b) { return b == Backend::Scalar || cpu_has_avx2(); }

void set_backend(Backend b) {
    if (!backend_available(b)) {
        throw UsageError("kernel backend '" + std::string(backend_name(b)) +
                         "' is not supported on this CPU");
    }
    selected().store(b);
}

void gaussian_scaled_likelihood(std::span<const double> x, const GaussianAtoms& atoms,
                                std::span<double> lik, std::span<double> row_max) {
#if defined(__x86_64__) || defined(_M_X64)
    if (active_backend() == Backend::Avx2) {
        return detail::gaussian_scaled_likelihood_avx2(x, atoms, lik, row_max);
    }
#endif
    detail::gaussian_scaled_likelihood_scalar(x, atoms, lik, row_max);
}

void mixture_dot(std::span<const double> lik, std::size_t n, std::size_t L,
                 std::span<const double> weights, std::size_t K, std::span<double> out) {
#if defined(__x86_64__) || defined(_M_X64)
    if (active_backend() == Backend::Avx2) {
        return detail::mixture_dot_avx2(lik, n, L, weights, K, out);
    }
#endif
    detail::mixture_dot_scalar(lik, n, L, weights, K, out);
}

void exp_nonpositive(std::span<const double> v, std::span<double> out) {
#if defined(__x86_64__) || defined(_M_X64)
    if (active_backend() == Backend::Avx2) return detail::exp_nonpositive_avx2(v, out);
#endif
    detail::exp_nonpositive_scalar(v, out);
}

}  // namespace hhdp::kernels

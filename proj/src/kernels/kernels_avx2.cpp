// Built with -mavx2 -mfma; only reached after a CPUID check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "hhdp/kernels.hpp"
#include "hhdp/special_fn.hpp"

namespace hhdp::kernels::detail {

namespace {

// exp(x) for x in [−708, 0]: x = n ln2 + r, |r| ≤ ln2/2, degree-12 Taylor
// in r, then scale by 2^n through the exponent bits.
inline __m256d exp_nonpositive_pd(__m256d x) {
    const __m256d lo = _mm256_set1_pd(-708.0);
    const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
    x = _mm256_max_pd(x, lo);

    const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
    const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
    r = _mm256_fnmadd_pd(n, ln2_lo, r);

    __m256d p = _mm256_set1_pd(1.0 / 479001600.0);
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

    // 2^n with n in [−1022, 0]
    const __m128i n32 = _mm256_cvtpd_epi32(n);
    __m256i bits = _mm256_cvtepi32_epi64(n32);
    bits = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023));
    bits = _mm256_slli_epi64(bits, 52);
    const __m256d scale = _mm256_castsi256_pd(bits);
    return _mm256_andnot_pd(underflow, _mm256_mul_pd(p, scale));
}

inline double hmax(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d m = _mm_max_pd(lo, hi);
    return std::max(_mm_cvtsd_f64(m), _mm_cvtsd_f64(_mm_unpackhi_pd(m, m)));
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void exp_nonpositive_avx2(std::span<const double> v, std::span<double> out) {
    std::size_t i = 0;
    for (; i + 4 <= v.size(); i += 4) {
        _mm256_storeu_pd(out.data() + i, exp_nonpositive_pd(_mm256_loadu_pd(v.data() + i)));
    }
    if (i < v.size()) {
        alignas(32) double buf[4] = {0.0, 0.0, 0.0, 0.0};
        for (std::size_t k = i; k < v.size(); ++k) buf[k - i] = v[k];
        _mm256_store_pd(buf, exp_nonpositive_pd(_mm256_load_pd(buf)));
        for (std::size_t k = i; k < v.size(); ++k) out[k] = buf[k - i];
    }
}

void gaussian_scaled_likelihood_avx2(std::span<const double> x, const GaussianAtoms& atoms,
                                     std::span<double> lik, std::span<double> row_max) {
    const std::size_t L = atoms.size();
    const std::size_t L4 = L & ~std::size_t{3};
    for (std::size_t i = 0; i < x.size(); ++i) {
        double* row = lik.data() + i * L;
        const __m256d xi = _mm256_set1_pd(x[i]);
        __m256d vmax = _mm256_set1_pd(kNegInf);
        for (std::size_t l = 0; l < L4; l += 4) {
            const __m256d d = _mm256_sub_pd(xi, _mm256_loadu_pd(atoms.mu.data() + l));
            const __m256d q = _mm256_mul_pd(d, d);
            const __m256d v = _mm256_fmadd_pd(_mm256_loadu_pd(atoms.neg_half_prec.data() + l), q,
                                              _mm256_loadu_pd(atoms.log_norm.data() + l));
            _mm256_storeu_pd(row + l, v);
            vmax = _mm256_max_pd(vmax, v);
        }
        double m = hmax(vmax);
        for (std::size_t l = L4; l < L; ++l) {
            const double d = x[i] - atoms.mu[l];
            row[l] = std::fma(atoms.neg_half_prec[l], d * d, atoms.log_norm[l]);
            m = std::max(m, row[l]);
        }
        row_max[i] = m;
        const __m256d vm = _mm256_set1_pd(m);
        for (std::size_t l = 0; l < L4; l += 4) {
            const __m256d v = _mm256_sub_pd(_mm256_loadu_pd(row + l), vm);
            _mm256_storeu_pd(row + l, exp_nonpositive_pd(v));
        }
        if (L4 < L) {
            alignas(32) double buf[4] = {0.0, 0.0, 0.0, 0.0};
            for (std::size_t l = L4; l < L; ++l) buf[l - L4] = row[l] - m;
            _mm256_store_pd(buf, exp_nonpositive_pd(_mm256_load_pd(buf)));
            for (std::size_t l = L4; l < L; ++l) row[l] = buf[l - L4];
        }
    }
}

void mixture_dot_avx2(std::span<const double> lik, std::size_t n, std::size_t L,
                      std::span<const double> weights, std::size_t K, std::span<double> out) {
    const std::size_t L4 = L & ~std::size_t{3};
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = lik.data() + i * L;
        for (std::size_t k = 0; k < K; ++k) {
            const double* w = weights.data() + k * L;
            __m256d acc = _mm256_setzero_pd();
            for (std::size_t l = 0; l < L4; l += 4) {
                acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + l), _mm256_loadu_pd(row + l), acc);
            }
            double s = hsum(acc);
            for (std::size_t l = L4; l < L; ++l) s = std::fma(w[l], row[l], s);
            out[i * K + k] = s;
        }
    }
}

}  // namespace hhdp::kernels::detail

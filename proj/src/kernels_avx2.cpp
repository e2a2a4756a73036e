// AVX2 variants of the coefficient kernels. This translation unit is the
// only one compiled with -mavx2; callers reach it through kern::active().

#include "pk/kernels.hpp"

#include <immintrin.h>

namespace pk::kern {

namespace {

// Elementwise kernels use mul/add (no FMA) so each lane rounds exactly like
// the scalar loop; results are bit-identical across variants.

void add_avx2(double* dst, const double* a, const double* b, int n) {
    int i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(a + i),
                                                _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) dst[i] = a[i] + b[i];
}

void sub_avx2(double* dst, const double* a, const double* b, int n) {
    int i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(dst + i, _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                                _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) dst[i] = a[i] - b[i];
}

void scale_avx2(double* dst, const double* a, double s, int n) {
    const __m256d vs = _mm256_set1_pd(s);
    int i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(dst + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), vs));
    for (; i < n; ++i) dst[i] = a[i] * s;
}

void axpy_avx2(double* dst, double s, const double* x, int n) {
    const __m256d vs = _mm256_set1_pd(s);
    int i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(dst + i,
                         _mm256_add_pd(_mm256_loadu_pd(dst + i),
                                       _mm256_mul_pd(vs, _mm256_loadu_pd(x + i))));
    for (; i < n; ++i) dst[i] += s * x[i];
}

// Per output slot: gather four (ia, ib) pairs at a time and FMA into four
// partial sums, then reduce. Accumulation order differs from the scalar
// kernel, so cross-variant agreement is to roundoff only.
void mul_avx2(const MulPlan& plan, const double* a, const double* b, double* c) {
    for (int k = 0; k < plan.ncoef; ++k) {
        const int32_t lo = plan.start[k];
        const int32_t hi = plan.start[k + 1];
        __m256d acc = _mm256_setzero_pd();
        int32_t t = lo;
        for (; t + 4 <= hi; t += 4) {
            const __m128i vi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(plan.ia.data() + t));
            const __m128i vj = _mm_loadu_si128(reinterpret_cast<const __m128i*>(plan.ib.data() + t));
            const __m256d va = _mm256_i32gather_pd(a, vi, 8);
            const __m256d vb = _mm256_i32gather_pd(b, vj, 8);
            acc = _mm256_fmadd_pd(va, vb, acc);
        }
        const __m128d lo128 = _mm256_castpd256_pd128(acc);
        const __m128d hi128 = _mm256_extractf128_pd(acc, 1);
        const __m128d sum2 = _mm_add_pd(lo128, hi128);
        double sum = _mm_cvtsd_f64(_mm_add_sd(sum2, _mm_unpackhi_pd(sum2, sum2)));
        for (; t < hi; ++t) sum += a[plan.ia[t]] * b[plan.ib[t]];
        c[k] = sum;
    }
}

}  // namespace

bool cpu_has_avx2() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

const Kernels& avx2_kernels() {
    static const Kernels k{add_avx2, sub_avx2, scale_avx2, axpy_avx2,
                           mul_avx2, "avx2"};
    return k;
}

}  // namespace pk::kern

#include "pk/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace pk::kern {

namespace {

void add_scalar(double* dst, const double* a, const double* b, int n) {
    for (int i = 0; i < n; ++i) dst[i] = a[i] + b[i];
}

void sub_scalar(double* dst, const double* a, const double* b, int n) {
    for (int i = 0; i < n; ++i) dst[i] = a[i] - b[i];
}

void scale_scalar(double* dst, const double* a, double s, int n) {
    for (int i = 0; i < n; ++i) dst[i] = a[i] * s;
}

void axpy_scalar(double* dst, double s, const double* x, int n) {
    for (int i = 0; i < n; ++i) dst[i] += s * x[i];
}

void mul_scalar(const MulPlan& plan, const double* a, const double* b, double* c) {
    for (int k = 0; k < plan.ncoef; ++k) {
        double acc = 0.0;
        for (int32_t t = plan.start[k]; t < plan.start[k + 1]; ++t)
            acc += a[plan.ia[t]] * b[plan.ib[t]];
        c[k] = acc;
    }
}

const Kernels& select() {
    const char* env = std::getenv("PKELAB_KERNELS");
#if defined(PKELAB_HAVE_AVX2)
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return scalar_kernels();
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return avx2_kernels();
        // "auto", unknown values, or unsupported avx2 request fall through.
    }
    if (cpu_has_avx2()) return avx2_kernels();
#else
    (void)env;
#endif
    return scalar_kernels();
}

}  // namespace

const Kernels& scalar_kernels() {
    static const Kernels k{add_scalar, sub_scalar, scale_scalar, axpy_scalar,
                           mul_scalar, "scalar"};
    return k;
}

const Kernels& active() {
    static const Kernels& chosen = select();
    return chosen;
}

}  // namespace pk::kern

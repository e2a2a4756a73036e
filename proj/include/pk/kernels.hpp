#pragma once

#include <cstdint>
#include <vector>

namespace pk::kern {

// Plan for a truncated graded product over dense coefficient arrays, in CSR
// form grouped by output slot:
//   c[k] = sum over t in [start[k], start[k+1]) of a[ia[t]] * b[ib[t]].
// Grouping by output keeps every kernel free of scatter conflicts.
struct MulPlan {
    int ncoef = 0;
    std::vector<int32_t> start;  // size ncoef + 1
    std::vector<int32_t> ia;
    std::vector<int32_t> ib;
};

// One ISA variant of the coefficient kernels. Elementwise kernels are exact
// (same rounding as a scalar loop); mul reorders its accumulations, so
// variants agree to roundoff, not bitwise.
struct Kernels {
    void (*add)(double* dst, const double* a, const double* b, int n);
    void (*sub)(double* dst, const double* a, const double* b, int n);
    void (*scale)(double* dst, const double* a, double s, int n);
    void (*axpy)(double* dst, double s, const double* x, int n);  // dst += s*x
    void (*mul)(const MulPlan& plan, const double* a, const double* b, double* c);
    const char* name;
};

// Variant picked once per process: AVX2 when compiled in and the CPU reports
// it, scalar otherwise. PKELAB_KERNELS=scalar|avx2|auto overrides; asking
// for avx2 on unsupported hardware falls back to scalar.
const Kernels& active();

const Kernels& scalar_kernels();

#if defined(PKELAB_HAVE_AVX2)
const Kernels& avx2_kernels();
bool cpu_has_avx2();
#endif

}  // namespace pk::kern

#include <doctest.h>

#include <cmath>
#include <vector>

#include "pk/jets.hpp"
#include "pk/kernels.hpp"
#include "pk/rng.hpp"

using pk::kern::Kernels;
using pk::kern::MulPlan;

namespace {

std::vector<double> random_vec(pk::Rng& rng, int n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-2.0, 2.0);
    return v;
}

}  // namespace

TEST_CASE("scalar multiply follows the plan exactly") {
    // c = a * b for univariate order-2 truncation:
    // c0 = a0 b0, c1 = a0 b1 + a1 b0, c2 = a0 b2 + a1 b1 + a2 b0.
    const MulPlan& plan = pk::jets::MonoTable::get(1, 2).plan;
    double a[3] = {2.0, 3.0, 5.0};
    double b[3] = {7.0, 11.0, 13.0};
    double c[3] = {0, 0, 0};
    pk::kern::scalar_kernels().mul(plan, a, b, c);
    CHECK(c[0] == 14.0);
    CHECK(c[1] == 2.0 * 11 + 3.0 * 7);
    CHECK(c[2] == 2.0 * 13 + 3.0 * 11 + 5.0 * 7);
}

TEST_CASE("active kernel set is one of the known implementations") {
    const Kernels& k = pk::kern::active();
    bool known = std::string(k.name) == "scalar";
#ifdef PKELAB_HAVE_AVX2
    known = known || std::string(k.name) == "avx2";
#endif
    CHECK(known);
}

#ifdef PKELAB_HAVE_AVX2
TEST_CASE("vector and scalar elementwise kernels agree bitwise") {
    if (!pk::kern::cpu_has_avx2()) return;
    const Kernels& s = pk::kern::scalar_kernels();
    const Kernels& v = pk::kern::avx2_kernels();
    pk::Rng rng(0x5eed0001);
    for (int n : {1, 2, 3, 4, 5, 7, 8, 15, 35, 126}) {
        std::vector<double> a = random_vec(rng, n), b = random_vec(rng, n);
        std::vector<double> rs(n), rv(n);
        s.add(rs.data(), a.data(), b.data(), n);
        v.add(rv.data(), a.data(), b.data(), n);
        CHECK(rs == rv);
        s.sub(rs.data(), a.data(), b.data(), n);
        v.sub(rv.data(), a.data(), b.data(), n);
        CHECK(rs == rv);
        s.scale(rs.data(), a.data(), 1.7, n);
        v.scale(rv.data(), a.data(), 1.7, n);
        CHECK(rs == rv);
        rs = b;
        rv = b;
        s.axpy(rs.data(), -0.3, a.data(), n);
        v.axpy(rv.data(), -0.3, a.data(), n);
        CHECK(rs == rv);
    }
}

TEST_CASE("vector and scalar multiply agree to roundoff") {
    if (!pk::kern::cpu_has_avx2()) return;
    const Kernels& s = pk::kern::scalar_kernels();
    const Kernels& v = pk::kern::avx2_kernels();
    pk::Rng rng(0x5eed0002);
    for (int dim = 1; dim <= 5; ++dim) {
        for (int order = 0; order <= 4; ++order) {
            const auto& tab = pk::jets::MonoTable::get(dim, order);
            std::vector<double> a = random_vec(rng, tab.count);
            std::vector<double> b = random_vec(rng, tab.count);
            std::vector<double> rs(tab.count), rv(tab.count);
            s.mul(tab.plan, a.data(), b.data(), rs.data());
            v.mul(tab.plan, a.data(), b.data(), rv.data());
            for (int i = 0; i < tab.count; ++i)
                CHECK(rs[i] == doctest::Approx(rv[i]).epsilon(1e-13));
        }
    }
}
#endif

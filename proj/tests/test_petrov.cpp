#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <doctest.h>

#include "pk/errors.hpp"
#include "pk/petrov.hpp"

namespace {

using pk::petrov::PetrovType;
using pk::petrov::RootKind;
using pk::petrov::Side;
using pk::petrov::WeylQuartic;
using cplx = std::complex<double>;

// Coefficients a[k] of an expanded lambda-polynomial -> psi.  The quartic is
// scaled by 6 so that every psi_k = 6 a_k / binom(4,k) stays a dyadic
// rational whenever the a_k are dyadic; scaling never moves roots.
WeylQuartic from_poly(const std::array<double, 5>& a, Side side = Side::anti_self_dual) {
    const double binom[5] = {1.0, 4.0, 6.0, 4.0, 1.0};
    WeylQuartic q;
    q.side = side;
    for (int k = 0; k < 5; ++k) q.psi[k] = 6.0 * a[k] / binom[k];
    return q;
}

// prod_i (lambda - r_i); conjugate pairs keep the coefficients real, dyadic
// roots keep them exact.
std::array<double, 5> expand(const std::vector<cplx>& roots) {
    std::vector<cplx> c{1.0};
    for (cplx r : roots) {
        std::vector<cplx> n(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            n[i + 1] += c[i];
            n[i] -= r * c[i];
        }
        c = std::move(n);
    }
    std::array<double, 5> a{};
    for (std::size_t i = 0; i < c.size(); ++i) {
        REQUIRE(std::abs(c[i].imag()) == 0.0);
        a[i] = c[i].real();
    }
    return a;
}

double chordal(cplx u, cplx v) {
    return std::abs(u - v) / (std::sqrt(1.0 + std::norm(u)) * std::sqrt(1.0 + std::norm(v)));
}

struct Planted {
    WeylQuartic q;
    RootKind kind = RootKind::O;
    std::vector<std::pair<cplx, int>> finite;  // distinct root, multiplicity
    int m_inf = 0;
};

// Dyadic roots on the grid k/8 with pairwise separation >= 1/4 keep both
// the expansion and the rational oracle exact, and keep distinct roots far
// outside any clustering tolerance used below.
Planted plant(RootKind kind, std::mt19937_64& rng, bool use_inf) {
    std::vector<cplx> support;
    auto grid = [&rng](int lo8, int hi8) {
        return std::uniform_int_distribution<int>(lo8, hi8)(rng) / 8.0;
    };
    auto far = [&support](cplx z) {
        for (cplx w : support)
            if (std::abs(z - w) < 0.25) return false;
        return true;
    };
    auto pick_real = [&]() {
        for (;;) {
            cplx z(grid(-24, 24), 0.0);
            if (far(z)) {
                support.push_back(z);
                return z;
            }
        }
    };
    auto pick_cc = [&]() {
        for (;;) {
            cplx z(grid(-20, 20), grid(2, 14));
            if (far(z) && far(std::conj(z))) {
                support.push_back(z);
                support.push_back(std::conj(z));
                return z;
            }
        }
    };

    Planted p;
    p.kind = kind;
    std::vector<cplx> roots;  // finite roots with multiplicity by repetition
    auto real_root = [&](int mult) {
        cplx z = pick_real();
        p.finite.emplace_back(z, mult);
        for (int i = 0; i < mult; ++i) roots.push_back(z);
    };
    auto cc_root = [&](int mult) {
        cplx z = pick_cc();
        p.finite.emplace_back(z, mult);
        p.finite.emplace_back(std::conj(z), mult);
        for (int i = 0; i < mult; ++i) {
            roots.push_back(z);
            roots.push_back(std::conj(z));
        }
    };
    auto inf_root = [&](int mult) { p.m_inf = mult; };

    switch (kind) {
        case RootKind::Gr:
            if (use_inf) inf_root(1);
            for (int i = use_inf ? 1 : 0; i < 4; ++i) real_root(1);
            break;
        case RootKind::Gc:
            cc_root(1);
            if (use_inf) inf_root(1);
            for (int i = use_inf ? 1 : 0; i < 2; ++i) real_root(1);
            break;
        case RootKind::Gcc:
            cc_root(1);
            cc_root(1);
            break;
        case RootKind::IIr:
            if (use_inf) inf_root(2);
            else real_root(2);
            real_root(1);
            real_root(1);
            break;
        case RootKind::IIc:
            if (use_inf) inf_root(2);
            else real_root(2);
            cc_root(1);
            break;
        case RootKind::III:
            if (use_inf) {
                inf_root(1);
                real_root(3);
            } else {
                real_root(3);
                real_root(1);
            }
            break;
        case RootKind::Dr:
            if (use_inf) inf_root(2);
            else real_root(2);
            real_root(2);
            break;
        case RootKind::Dc:
            cc_root(2);
            break;
        case RootKind::N:
            if (use_inf) inf_root(4);
            else real_root(4);
            break;
        case RootKind::O:
            p.q = WeylQuartic{};
            return p;
    }
    p.q = from_poly(expand(roots));
    return p;
}

void check_reported_roots(const PetrovType& t, const Planted& p) {
    int total = 0;
    for (const auto& r : t.roots) total += r.multiplicity;
    CHECK(total == 4);
    if (p.m_inf > 0) {
        bool found = false;
        for (const auto& r : t.roots)
            if (r.at_infinity) {
                CHECK(r.multiplicity == p.m_inf);
                CHECK(r.real);
                found = true;
            }
        CHECK(found);
    }
    for (const auto& [z, m] : p.finite) {
        bool found = false;
        for (const auto& r : t.roots) {
            if (r.at_infinity) continue;
            if (chordal(z, r.z) < 5e-3) {
                CHECK(r.multiplicity == m);
                CHECK(r.real == (z.imag() == 0.0));
                found = true;
                break;
            }
        }
        CHECK(found);
    }
}

Eigen::Matrix2d random_gl2(std::mt19937_64& rng) {
    // Condition number capped at 4 so projective separations shrink by at
    // most cond^2 = 16, keeping planted roots resolvable at tol = 1e-3.
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (;;) {
        Eigen::Matrix2d A;
        A << u(rng), u(rng), u(rng), u(rng);
        double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
        if (std::abs(det) < 0.5) continue;
        Eigen::JacobiSVD<Eigen::Matrix2d> svd(A);
        if (svd.singularValues()(0) > 4.0 * svd.singularValues()(1)) continue;
        return A;
    }
}

const RootKind kAllKinds[10] = {RootKind::Gr,  RootKind::Gc, RootKind::Gcc, RootKind::IIr,
                                RootKind::IIc, RootKind::III, RootKind::Dr,  RootKind::Dc,
                                RootKind::N,   RootKind::O};

}  // namespace

TEST_CASE("canonical quartics land on their root types") {
    using pk::petrov::classify;
    using pk::petrov::oracle_classify;

    WeylQuartic zero;
    auto t0 = classify(zero, 1e-3);
    CHECK(t0.kind == RootKind::O);
    CHECK(t0.roots.empty());
    CHECK(!t0.uncertain);
    CHECK(oracle_classify(zero).kind == RootKind::O);

    // W = lambda^4: quadruple root at the origin.
    WeylQuartic n4;
    n4.psi[4] = 1.0;
    auto tn = classify(n4, 1e-3);
    CHECK(tn.kind == RootKind::N);
    REQUIRE(tn.roots.size() == 1);
    CHECK(tn.roots[0].multiplicity == 4);
    CHECK(!tn.roots[0].at_infinity);
    CHECK(std::abs(tn.roots[0].z) < 1e-6);
    CHECK(tn.roots[0].real);
    CHECK(oracle_classify(n4).kind == RootKind::N);

    // (l-1)(l-2)(l-3)(l-4) = l^4 - 10 l^3 + 35 l^2 - 50 l + 24.
    WeylQuartic gr = from_poly({24.0, -50.0, 35.0, -10.0, 1.0});
    auto tg = classify(gr, 1e-3);
    CHECK(tg.kind == RootKind::Gr);
    CHECK(oracle_classify(gr).kind == RootKind::Gr);
    for (double r : {1.0, 2.0, 3.0, 4.0}) {
        bool found = false;
        for (const auto& root : tg.roots)
            if (!root.at_infinity && std::abs(root.z - cplx(r, 0.0)) < 1e-8) found = root.real;
        CHECK(found);
    }

    // psi2 = psi4 = 1: W = l^4 + 6 l^2 = l^2 (l^2 + 6).
    WeylQuartic iic;
    iic.psi[2] = 1.0;
    iic.psi[4] = 1.0;
    CHECK(classify(iic, 1e-3).kind == RootKind::IIc);
    CHECK(oracle_classify(iic).kind == RootKind::IIc);

    // Flipping the leading sign makes the simple pair real: -l^2 (l^2 - 6).
    WeylQuartic iir = iic;
    iir.psi[4] = -1.0;
    CHECK(classify(iir, 1e-3).kind == RootKind::IIr);
    CHECK(oracle_classify(iir).kind == RootKind::IIr);

    // (l^2 + 1)^2: conjugate double pair.
    WeylQuartic dc = from_poly(expand({{0, 1}, {0, -1}, {0, 1}, {0, -1}}));
    CHECK(classify(dc, 1e-3).kind == RootKind::Dc);
    CHECK(oracle_classify(dc).kind == RootKind::Dc);

    // l^3 (l - 1).
    WeylQuartic iii = from_poly({0.0, 0.0, 0.0, -1.0, 1.0});
    auto t3 = classify(iii, 1e-3);
    CHECK(t3.kind == RootKind::III);
    CHECK(oracle_classify(iii).kind == RootKind::III);

    // Vanishing leading coefficients push roots to infinity: a cubic with
    // three simple real roots still has four projective roots.
    WeylQuartic inf1 = from_poly(expand({{-1.0, 0.0}, {0.5, 0.0}, {2.0, 0.0}}));
    auto ti = classify(inf1, 1e-3);
    CHECK(ti.kind == RootKind::Gr);
    bool has_inf = false;
    for (const auto& r : ti.roots)
        if (r.at_infinity) has_inf = r.multiplicity == 1 && r.real;
    CHECK(has_inf);
    CHECK(oracle_classify(inf1).kind == RootKind::Gr);
}

TEST_CASE("classification matches the exact rational oracle on planted roots") {
    std::mt19937_64 rng(2026);
    for (RootKind kind : kAllKinds) {
        for (int trial = 0; trial < 100; ++trial) {
            Planted p = plant(kind, rng, trial % 4 == 3);
            auto t = pk::petrov::classify(p.q, 1e-3);
            CHECK(t.kind == p.kind);
            CHECK(!t.uncertain);
            auto o = pk::petrov::oracle_classify(p.q);
            CHECK(o.kind == p.kind);
            if (kind == RootKind::O) {
                CHECK(t.roots.empty());
                CHECK(o.roots.empty());
                continue;
            }
            check_reported_roots(t, p);
            int osum = 0;
            for (const auto& r : o.roots) osum += r.multiplicity;
            CHECK(osum == 4);
        }
    }
}

TEST_CASE("root types are invariant under projective coframe changes") {
    std::mt19937_64 rng(7);
    for (RootKind kind : kAllKinds) {
        Planted p = plant(kind, rng, false);
        for (int i = 0; i < 200; ++i) {
            Eigen::Matrix2d A = random_gl2(rng);
            WeylQuartic qt = pk::petrov::transform(p.q, A);
            CHECK(pk::petrov::classify(qt, 1e-3).kind == p.kind);
        }
    }
}

TEST_CASE("transforms compose") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        WeylQuartic q;
        q.side = trial % 2 == 0 ? Side::anti_self_dual : Side::self_dual;
        for (int k = 0; k < 5; ++k) q.psi[k] = u(rng);
        Eigen::Matrix2d A = random_gl2(rng);
        Eigen::Matrix2d B = random_gl2(rng);
        WeylQuartic lhs = pk::petrov::transform(q, Eigen::Matrix2d(A * B));
        WeylQuartic rhs = pk::petrov::transform(pk::petrov::transform(q, B), A);
        double scale = 0.0;
        for (int k = 0; k < 5; ++k) scale = std::max(scale, std::abs(lhs.psi[k]));
        for (int k = 0; k < 5; ++k) CHECK(std::abs(lhs.psi[k] - rhs.psi[k]) <= 1e-10 * scale);
    }
}

TEST_CASE("transform matches the closed form of the lowest coefficient") {
    // Substituting the adjugate into the homogenized quartic and dividing by
    // det(A) must reproduce, at the x^4 slot,
    //   psi0~ = (a10^4 psi4 - 4 a10^3 a11 psi3 + 6 a10^2 a11^2 psi2
    //            - 4 a10 a11^3 psi1 + a11^4 psi0) / det(A),
    // the expansion of (1/det) w(a11, -a10).
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        WeylQuartic q;
        for (int k = 0; k < 5; ++k) q.psi[k] = u(rng);
        Eigen::Matrix2d A = random_gl2(rng);
        double det = A.determinant();
        double a10 = A(1, 0), a11 = A(1, 1);
        double want = (std::pow(a10, 4) * q.psi[4] - 4.0 * std::pow(a10, 3) * a11 * q.psi[3] +
                       6.0 * a10 * a10 * a11 * a11 * q.psi[2] - 4.0 * a10 * std::pow(a11, 3) * q.psi[1] +
                       std::pow(a11, 4) * q.psi[0]) /
                      det;
        WeylQuartic qt = pk::petrov::transform(q, A);
        CHECK(std::abs(qt.psi[0] - want) <= 1e-12 * std::max(1.0, std::abs(want)));
    }
}

TEST_CASE("identity transform is exact and a root translation zeroes psi0") {
    std::mt19937_64 rng(17);
    Planted p = plant(RootKind::Gr, rng, false);

    WeylQuartic same = pk::petrov::transform(p.q, Eigen::Matrix2d::Identity());
    for (int k = 0; k < 5; ++k) CHECK(same.psi[k] == p.q.psi[k]);

    // Moving a planted root lambda0 to the origin: psi0~ = W(lambda0) = 0.
    double lambda0 = p.finite[0].first.real();
    CHECK(std::abs(p.q.eval(lambda0)) <= 1e-12);
    Eigen::Matrix2d tr;
    tr << 1.0, 0.0, -lambda0, 1.0;
    WeylQuartic moved = pk::petrov::transform(p.q, tr);
    double scale = 0.0;
    for (int k = 0; k < 5; ++k) scale = std::max(scale, std::abs(p.q.psi[k]));
    CHECK(std::abs(moved.psi[0]) <= 1e-13 * scale);
    CHECK(pk::petrov::classify(moved, 1e-3).kind == RootKind::Gr);
}

TEST_CASE("self-dual coefficients carry determinant weights") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    WeylQuartic q;
    q.side = Side::self_dual;
    for (int k = 0; k < 5; ++k) q.psi[k] = u(rng);
    Eigen::Matrix2d A = random_gl2(rng);
    double det = A.determinant();
    WeylQuartic qt = pk::petrov::transform(q, A);
    CHECK(qt.side == Side::self_dual);
    CHECK(qt.psi[2] == q.psi[2]);  // weight zero: exactly invariant
    for (int k = 0; k < 5; ++k)
        CHECK(qt.psi[k] == doctest::Approx(std::pow(det, 2 - k) * q.psi[k]).epsilon(1e-14));
    // The weights implement mu -> det * mu on roots, so the type survives.
    Planted p = plant(RootKind::IIc, rng, false);
    p.q.side = Side::self_dual;
    WeylQuartic pt = pk::petrov::transform(p.q, A);
    CHECK(pk::petrov::classify(pt, 1e-3).kind == RootKind::IIc);
}

TEST_CASE("borderline clusterings and near-zero quartics report both candidates") {
    using pk::petrov::classify;

    // Two roots separated by 1.5 tol: split at tol, merged at 2 tol.
    WeylQuartic near_double = from_poly(expand({{0.0, 0.0}, {0.0015, 0.0}, {1.0, 0.0}, {2.0, 0.0}}));
    auto t = classify(near_double, 1e-3);
    CHECK(t.kind == RootKind::Gr);
    CHECK(t.uncertain);
    CHECK(t.alt_kind == RootKind::IIr);

    // Comfortably separated roots carry no flag.
    WeylQuartic clean = from_poly(expand({{0.0, 0.0}, {0.5, 0.0}, {1.0, 0.0}, {2.0, 0.0}}));
    CHECK(!classify(clean, 1e-3).uncertain);

    // Coefficients straddling the zero threshold: O from below with the
    // root pattern as alternative, pattern from above with O as alternative.
    WeylQuartic small;
    for (int k = 0; k < 5; ++k) small.psi[k] = 0.8e-3;  // W = a (l + 1)^4
    auto lo = classify(small, 1e-3, 1.0);
    CHECK(lo.kind == RootKind::O);
    CHECK(lo.uncertain);
    CHECK(lo.alt_kind == RootKind::N);

    for (int k = 0; k < 5; ++k) small.psi[k] = 1.5e-3;
    auto hi = classify(small, 1e-3, 1.0);
    CHECK(hi.kind == RootKind::N);
    CHECK(hi.uncertain);
    CHECK(hi.alt_kind == RootKind::O);

    for (int k = 0; k < 5; ++k) small.psi[k] = 1e-5;
    auto deep = classify(small, 1e-3, 1.0);
    CHECK(deep.kind == RootKind::O);
    CHECK(!deep.uncertain);
}

TEST_CASE("petrov interfaces validate their inputs") {
    WeylQuartic q;
    q.psi[4] = 1.0;
    CHECK_THROWS_AS(pk::petrov::classify(q, 0.0), pk::ConfigError);
    CHECK_THROWS_AS(pk::petrov::classify(q, 0.5), pk::ConfigError);
    CHECK_THROWS_AS(pk::petrov::classify(q, -1e-3), pk::ConfigError);

    Eigen::Matrix2d sing;
    sing << 1.0, 2.0, 0.5, 1.0;
    CHECK_THROWS_AS(pk::petrov::transform(q, sing), pk::ConfigError);

    CHECK(std::string(pk::petrov::to_string(RootKind::Gcc)) == "Gcc");
    CHECK(std::string(pk::petrov::to_string(RootKind::O)) == "O");
}

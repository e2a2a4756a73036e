#include <array>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <doctest.h>

#include "pk/catalog.hpp"
#include "pk/curvature.hpp"
#include "pk/errors.hpp"
#include "pk/expr.hpp"
#include "pk/forms.hpp"
#include "pk/jets.hpp"
#include "pk/petrov.hpp"

namespace {

using pk::catalog::Family;
using pk::catalog::MetricSpec;
using pk::expr::Expr;
using pk::forms::CoframeSample;
using pk::forms::FormValue;
using pk::jets::Jet;
using pk::petrov::RootKind;

constexpr std::array<Family, 10> kFamilies{
    Family::potential,     Family::dancing,       Family::homogeneous_d, Family::typed_generic,
    Family::typed_branch2, Family::typed_branch3, Family::typeii_ym,     Family::typeiii,
    Family::typen,         Family::typeo};

struct CurvatureProbe {
    double scalar = 0.0;             // scalar curvature
    double tracefree = 0.0;          // max |Ric_ab - (R/4) g_ab|
    std::array<double, 5> psi{};     // anti-self-dual quartic coefficients
    std::array<double, 5> psip{};    // self-dual quartic coefficients
    double closure = 0.0;            // max |d(theta^1^theta^3 + theta^2^theta^4)|
    RootKind kind = RootKind::O;
};

CurvatureProbe run_probe(const CoframeSample& cof, double ambient) {
    CurvatureProbe out;
    auto conn = pk::curv::solve_levi_civita(cof);
    auto riem = pk::curv::riemann(conn, cof);
    out.scalar = riem.scalar().value();
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            out.tracefree = std::max(
                out.tracefree,
                std::abs(riem.ricci(a, b).value() - out.scalar / 4.0 * cof.g(a, b)));
    auto dec = pk::curv::decompose(riem, cof);
    for (int i = 0; i < 5; ++i) {
        out.psi[i] = dec.psi[i].value();
        out.psip[i] = dec.psip[i].value();
    }
    FormValue rho = pk::forms::wedge(cof.theta[0], cof.theta[2]);
    rho += pk::forms::wedge(cof.theta[1], cof.theta[3]);
    FormValue drho = pk::forms::ext_d(rho);
    for (int p = 0; p < 4; ++p)
        out.closure = std::max(out.closure, std::abs(drho.comp(p).value()));
    pk::petrov::WeylQuartic q;
    q.psi = out.psi;
    q.side = pk::petrov::Side::anti_self_dual;
    out.kind = pk::petrov::classify(q, 1e-3, ambient).kind;
    return out;
}

// Metric entries from the coframe against a dense 4x4 of expected values.
void check_metric_matches(const CoframeSample& cof, const std::array<std::array<double, 4>, 4>& g,
                          double tol) {
    auto m = pk::catalog::metric_components(cof);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(std::abs(m[i][j].value() - g[i][j]) < tol);
}

}  // namespace

TEST_CASE("catalog: family names round-trip") {
    for (Family f : kFamilies) {
        auto back = pk::catalog::family_from_name(pk::catalog::to_string(f));
        REQUIRE(back.has_value());
        CHECK(*back == f);
    }
    CHECK(!pk::catalog::family_from_name("no-such-family").has_value());
    CHECK(*pk::catalog::family_from_name("homogeneous-D") == Family::homogeneous_d);
}

TEST_CASE("catalog: homogeneous model coframe is the identity at the origin") {
    auto spec = pk::catalog::default_spec(Family::homogeneous_d);
    auto cof = pk::catalog::build_coframe(spec, {0.0, 0.0, 0.0, 0.0});
    for (int a = 0; a < 4; ++a)
        for (int i = 0; i < 4; ++i)
            CHECK(cof.theta[a].comp(i).value() == doctest::Approx(a == i ? 1.0 : 0.0));

    // Off the origin, theta^1 and theta^3 scale by 1/(1 - (3/2) y1 y3),
    // theta^2 and theta^4 by 1/(1 - (3/2) y2 y4).
    std::array<double, 4> p{0.2, -0.1, 0.3, 0.4};
    auto c2 = pk::catalog::build_coframe(spec, p);
    const double i13 = 1.0 / (1.0 - 1.5 * p[0] * p[2]);
    const double i24 = 1.0 / (1.0 - 1.5 * p[1] * p[3]);
    CHECK(c2.theta[0].comp(0).value() == doctest::Approx(i13));
    CHECK(c2.theta[1].comp(1).value() == doctest::Approx(i24));
    CHECK(c2.theta[2].comp(2).value() == doctest::Approx(i13));
    CHECK(c2.theta[3].comp(3).value() == doctest::Approx(i24));
}

TEST_CASE("catalog: conformally flat model pins its sign pattern") {
    auto spec = pk::catalog::default_spec(Family::typeo);
    spec.box.lo[1] = 0.5;  // admit y2 = 1
    // At y = (0,1,0,0) the denominator is psi2p * (y2 + y1 y3 - y4) = 1.
    auto cof = pk::catalog::build_coframe(spec, {0.0, 1.0, 0.0, 0.0});
    const std::array<std::array<double, 4>, 4> expect{
        {{1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0}, {0.0, 0.0, -1.0, 0.0},
         {0.0, 0.0, 0.0, -1.0}}};
    for (int a = 0; a < 4; ++a)
        for (int i = 0; i < 4; ++i)
            CHECK(cof.theta[a].comp(i).value() == doctest::Approx(expect[a][i]));
}

TEST_CASE("catalog: generic type D coframe components and its margin wall") {
    auto spec = pk::catalog::default_spec(Family::typed_generic);
    std::array<double, 4> p{0.3, -0.2, 0.25, 0.8};
    auto cof = pk::catalog::build_coframe(spec, p);
    // theta^1 = (y4)^2 (1 - y3) dy1 - y4 dy2
    CHECK(cof.theta[0].comp(0).value() == doctest::Approx(0.8 * 0.8 * 0.75));
    CHECK(cof.theta[0].comp(1).value() == doctest::Approx(-0.8));
    CHECK(cof.theta[0].comp(2).value() == doctest::Approx(0.0));
    CHECK(cof.theta[0].comp(3).value() == doctest::Approx(0.0));
    // y4 = 0 collapses the coframe and must be rejected, box or not.
    CHECK_THROWS_AS(pk::catalog::build_coframe(spec, {0.3, -0.2, 0.25, 0.0}),
                    pk::MarginViolation);
    CHECK(!pk::catalog::admissible(spec, {0.3, -0.2, 0.25, 0.05}));
}

TEST_CASE("catalog: quadratic-in-x family matches its stated coframe") {
    auto spec = pk::catalog::default_spec(Family::typeii_ym);
    const double P = spec.psi2p;
    // chart (a,b,x,y); defaults f1 = a, f2 = b, f3 = b, f4 = a
    std::array<double, 4> p{1.2, 1.5, 0.5, 0.75};
    auto cof = pk::catalog::build_coframe(spec, p);
    // theta^1 = dx - (3/2) psi2p (x^2 + x f1 + f2) da
    CHECK(cof.theta[0].comp(2).value() == doctest::Approx(1.0));
    CHECK(cof.theta[0].comp(0).value() ==
          doctest::Approx(-1.5 * P * (0.5 * 0.5 + 0.5 * 1.2 + 1.5)));
    // theta^2 = db, theta^3 = da
    CHECK(cof.theta[1].comp(1).value() == doctest::Approx(1.0));
    CHECK(cof.theta[2].comp(0).value() == doctest::Approx(1.0));
    // theta^4 = dy - (3/2) psi2p (y^2 + y f3 + f4) db
    CHECK(cof.theta[3].comp(3).value() == doctest::Approx(1.0));
    CHECK(cof.theta[3].comp(1).value() ==
          doctest::Approx(-1.5 * P * (0.75 * 0.75 + 0.75 * 1.5 + 1.2)));
}

TEST_CASE("catalog: log potential reproduces its closed-form metric") {
    Expr v = Expr::parse("-(1/psi2p) * log(b + a*x - y)");
    const double P = 2.0;
    for (std::array<double, 4> p : {std::array<double, 4>{0.3, 2.0, -0.2, 0.4},
                                    std::array<double, 4>{-0.1, 1.7, 0.35, -0.25}}) {
        auto cof = pk::catalog::build_from_potential(v, p, P, 2);
        const double s = p[1] + p[0] * p[2] - p[3];
        const double d = 1.0 / (P * s * s);
        // g = 2 da dV_a + 2 db dV_b with V_ax = (y-b) d, V_ay = -x d,
        // V_bx = a d, V_by = -d
        std::array<std::array<double, 4>, 4> g{};
        g[0][2] = g[2][0] = (p[3] - p[1]) * d;
        g[0][3] = g[3][0] = -p[2] * d;
        g[1][2] = g[2][1] = p[0] * d;
        g[1][3] = g[3][1] = -d;
        check_metric_matches(cof, g, 1e-10);
    }
}

TEST_CASE("catalog: product-log potential reproduces its closed-form metric") {
    Expr v = Expr::parse("-(2/(3*psi2p)) * log((1 - (3/2)*psi2p*a*x) * (1 - (3/2)*psi2p*b*y))");
    const double P = 1.0;
    std::array<double, 4> p{0.3, -0.2, 0.25, 0.15};
    auto cof = pk::catalog::build_from_potential(v, p, P, 2);
    const double u = 1.0 - 1.5 * P * p[0] * p[2];
    const double w = 1.0 - 1.5 * P * p[1] * p[3];
    std::array<std::array<double, 4>, 4> g{};
    g[0][2] = g[2][0] = 1.0 / (u * u);
    g[1][3] = g[3][1] = 1.0 / (w * w);
    check_metric_matches(cof, g, 1e-10);
}

TEST_CASE("catalog: bilinear potential gives the flat product metric") {
    Expr v = Expr::parse("a*x + b*y");
    auto cof = pk::catalog::build_from_potential(v, {0.4, -0.3, 0.2, 0.6}, 1.0, 2);
    std::array<std::array<double, 4>, 4> g{};
    g[0][2] = g[2][0] = 1.0;
    g[1][3] = g[3][1] = 1.0;
    check_metric_matches(cof, g, 1e-12);
    auto pr = run_probe(cof, 1.0);
    CHECK(std::abs(pr.scalar) < 1e-12);
    CHECK(pr.tracefree < 1e-12);
    for (int i = 0; i < 5; ++i) {
        CHECK(std::abs(pr.psi[i]) < 1e-12);
        CHECK(std::abs(pr.psip[i]) < 1e-12);
    }
    CHECK(pr.kind == RootKind::O);
}

TEST_CASE("catalog: potential construction rejects bad inputs") {
    Expr v = Expr::parse("a*x + b*y");
    CHECK_THROWS_AS(pk::catalog::build_from_potential(v, {0, 0, 0, 0}, 1.0, 3),
                    pk::ConfigError);
    CHECK_THROWS_AS(
        pk::catalog::build_from_potential(v, {0, 0, 0, 0},
                                          std::numeric_limits<double>::quiet_NaN(), 2),
        pk::ConfigError);
    // Degenerate Hessian block: V = a*x has det = 0 everywhere.
    CHECK_THROWS_AS(pk::catalog::build_from_potential(Expr::parse("a*x"), {0, 0, 0, 0}, 1.0, 2),
                    pk::MarginViolation);
    // Symbols outside {a,b,x,y} + params are rejected up front.
    CHECK_THROWS_AS(pk::catalog::build_from_potential(Expr::parse("a*x + b*y + z"),
                                                      {0, 0, 0, 0}, 1.0, 2),
                    pk::ConfigError);
}

TEST_CASE("catalog: Einstein residual of potential metrics") {
    std::vector<std::array<double, 4>> pts{{0.3, 2.0, -0.2, 0.4},
                                           {-0.1, 1.7, 0.35, -0.25},
                                           {0.2, 2.3, 0.1, 0.3}};
    // log potential: det = 1/(psi2p^2 s^3) = c1 c2 exp(-lambda V) with
    // lambda = -3 psi2p, c1 c2 = 1/psi2p^2.
    const double P = 2.0;
    auto rep = pk::catalog::check_einstein_pde(
        Expr::parse("-(1/psi2p) * log(b + a*x - y)"), -3.0 * P,
        Expr::parse("1/(psi2p*psi2p)"), Expr::parse("1"), pts, {{"psi2p", P}});
    CHECK(rep.entries.size() == pts.size());
    CHECK(rep.max_residual < 1e-10);

    // product-log potential: c1 c2 = 1
    std::vector<std::array<double, 4>> pts2{{0.3, -0.2, 0.25, 0.15}, {-0.3, 0.2, 0.3, 0.35}};
    auto rep2 = pk::catalog::check_einstein_pde(
        Expr::parse("-(2/(3*psi2p)) * log((1 - (3/2)*psi2p*a*x) * (1 - (3/2)*psi2p*b*y))"),
        -3.0, Expr::parse("1"), Expr::parse("1"), pts2, {{"psi2p", 1.0}});
    CHECK(rep2.max_residual < 1e-10);

    // bilinear potential: lambda = 0, det = 1
    auto rep3 = pk::catalog::check_einstein_pde(Expr::parse("a*x + b*y"), 0.0, Expr::parse("1"),
                                                Expr::parse("1"), pts2);
    CHECK(rep3.max_residual < 1e-14);

    // c1 is a function of (a,b) only
    CHECK_THROWS_AS(pk::catalog::check_einstein_pde(Expr::parse("a*x + b*y"), 0.0,
                                                    Expr::parse("x"), Expr::parse("1"), pts2),
                    pk::ConfigError);
}

TEST_CASE("catalog: separable solutions of the exponential equation") {
    std::vector<std::array<double, 2>> pts{{0.3, 0.7}, {-0.4, 1.1}, {0.1, 0.5}};
    auto rep = pk::catalog::check_liouville(Expr::parse("6*psi2p*y1"), Expr::parse("4/y3"), 1.0,
                                            pts);
    CHECK(rep.max_residual < 1e-10);

    // negative psi2p wants p' q' > 0
    auto rep2 = pk::catalog::check_liouville(Expr::parse("y1*y1*y1 + 2*y1"),
                                             Expr::parse("-1/(y3 + 2)"), -0.7, pts);
    CHECK(rep2.max_residual < 1e-9);

    // p = q makes the solution singular everywhere
    CHECK_THROWS_AS(
        pk::catalog::check_liouville(Expr::parse("y1"), Expr::parse("y3"), 1.0, {{0.2, 0.2}}),
        pk::MarginViolation);
    CHECK_THROWS_AS(
        pk::catalog::check_liouville(Expr::parse("1"), Expr::parse("y3"), 1.0, {{0.2, 0.7}}),
        pk::MarginViolation);
    CHECK_THROWS_AS(pk::catalog::check_liouville(Expr::parse("y1"), Expr::parse("y3"), 0.0,
                                                 {{0.2, 0.7}}),
                    pk::ConfigError);
}

TEST_CASE("catalog: every family is Einstein with matching scalar curvature") {
    std::mt19937_64 rng(20240817);
    for (Family f : kFamilies) {
        CAPTURE(pk::catalog::to_string(f));
        auto spec = pk::catalog::default_spec(f);
        auto profile = pk::catalog::expected_profile(spec);
        std::array<double, 5> first_psi{};
        for (int k = 0; k < 20; ++k) {
            auto p = pk::catalog::sample_point(spec, rng);
            auto cof = pk::catalog::build_coframe(spec, p);
            auto pr = run_probe(cof, std::abs(spec.psi2p));
            CHECK(std::abs(pr.scalar + 12.0 * spec.psi2p) < 1e-8);
            CHECK(pr.tracefree < 1e-8);
            CHECK(pr.closure < 1e-9);
            for (int i = 0; i < 5; ++i)
                CHECK(std::abs(pr.psip[i] - (i == 2 ? spec.psi2p : 0.0)) < 1e-8);
            if (profile.has_expected_type) CHECK(pr.kind == profile.weyl_minus);
            if (profile.weyl_minus_vanishes)
                for (int i = 0; i < 5; ++i) CHECK(std::abs(pr.psi[i]) < 1e-10);
            if (profile.psi2_equals_psi2p)
                CHECK(std::abs(pr.psi[2] - spec.psi2p) < 1e-8);
            if (k == 0) first_psi = pr.psi;
            if (profile.homogeneous)
                for (int i = 0; i < 5; ++i) CHECK(std::abs(pr.psi[i] - first_psi[i]) < 1e-8);
        }
    }
}

TEST_CASE("catalog: scalar curvature tracks the requested coefficient") {
    // Same contract as the default sweep, but at non-default psi2p of both
    // signs; catches builders that scale more than one coframe pair.
    std::mt19937_64 rng(911);
    for (Family f : kFamilies) {
        for (double P : {2.0, 0.5, -1.5}) {
            CAPTURE(pk::catalog::to_string(f));
            CAPTURE(P);
            auto spec = pk::catalog::default_spec(f);
            spec.psi2p = P;
            for (int k = 0; k < 4; ++k) {
                auto p = pk::catalog::sample_point(spec, rng);
                auto cof = pk::catalog::build_coframe(spec, p);
                auto pr = run_probe(cof, std::abs(P));
                CHECK(std::abs(pr.scalar + 12.0 * P) < 1e-8);
                CHECK(pr.tracefree < 1e-8);
                for (int i = 0; i < 5; ++i)
                    CHECK(std::abs(pr.psip[i] - (i == 2 ? P : 0.0)) < 1e-8);
            }
        }
    }
}

TEST_CASE("catalog: quadratic-in-x family curvature closed form") {
    auto spec = pk::catalog::default_spec(Family::typeii_ym);
    const double P = spec.psi2p;
    std::mt19937_64 rng(7);
    for (int k = 0; k < 8; ++k) {
        auto p = pk::catalog::sample_point(spec, rng);
        auto cof = pk::catalog::build_coframe(spec, p);
        auto pr = run_probe(cof, std::abs(P));
        // with f1 = a, f2 = b, f3 = b, f4 = a:
        //   psi4 = -(9/4) psi2p^2 (a + b + 2x + 2y), psi0 = psi1 = psi3 = 0
        const double want = -2.25 * P * P * (p[0] + p[1] + 2.0 * p[2] + 2.0 * p[3]);
        CHECK(std::abs(pr.psi[4] - want) < 1e-8);
        CHECK(std::abs(pr.psi[2] - P) < 1e-8);
        CHECK(std::abs(pr.psi[0]) < 1e-8);
        CHECK(std::abs(pr.psi[1]) < 1e-8);
        CHECK(std::abs(pr.psi[3]) < 1e-8);
    }
}

TEST_CASE("catalog: triple-root family invariants are scale independent") {
    for (double P : {1.0, 2.5, -0.7}) {
        auto spec = pk::catalog::default_spec(Family::typeiii);
        spec.psi2p = P;
        std::mt19937_64 rng(11);
        for (int k = 0; k < 4; ++k) {
            auto p = pk::catalog::sample_point(spec, rng);
            auto pr = run_probe(pk::catalog::build_coframe(spec, p), std::abs(P));
            // normalized so the first nonzero quartic coefficient is exactly 1
            CHECK(std::abs(pr.psi[0]) < 1e-9);
            CHECK(std::abs(pr.psi[1]) < 1e-9);
            CHECK(std::abs(pr.psi[2]) < 1e-9);
            CHECK(std::abs(pr.psi[3] - 1.0) < 1e-9);
            CHECK(pr.kind == RootKind::III);
        }
    }
}

TEST_CASE("catalog: quadruple-root family invariants are scale independent") {
    for (double P : {1.0, 2.5, -0.7}) {
        auto spec = pk::catalog::default_spec(Family::typen);
        spec.psi2p = P;
        std::mt19937_64 rng(13);
        for (int k = 0; k < 4; ++k) {
            auto p = pk::catalog::sample_point(spec, rng);
            auto pr = run_probe(pk::catalog::build_coframe(spec, p), std::abs(P));
            for (int i = 0; i < 4; ++i) CHECK(std::abs(pr.psi[i]) < 1e-9);
            CHECK(std::abs(pr.psi[4] - 0.5) < 1e-9);
            CHECK(pr.kind == RootKind::N);
        }
    }
}

TEST_CASE("catalog: default boxes accept nearly all uniform draws") {
    std::mt19937_64 rng(99);
    for (Family f : kFamilies) {
        CAPTURE(pk::catalog::to_string(f));
        auto spec = pk::catalog::default_spec(f);
        int accepted = 0;
        const int total = 400;
        for (int k = 0; k < total; ++k) {
            std::array<double, 4> p{};
            for (int i = 0; i < 4; ++i) {
                const double u = double(rng() >> 11) * 0x1.0p-53;
                p[i] = spec.box.lo[i] + (spec.box.hi[i] - spec.box.lo[i]) * u;
            }
            if (pk::catalog::admissible(spec, p)) ++accepted;
        }
        CHECK(accepted >= 380);
    }
}

TEST_CASE("catalog: malformed specs fail loudly") {
    auto spec = pk::catalog::default_spec(Family::typeiii);
    std::array<double, 4> p{0.1, 0.2, -0.1, 0.3};

    SUBCASE("zero psi2p violates the standing assumption") {
        spec.psi2p = 0.0;
        CHECK_THROWS_AS(pk::catalog::build_coframe(spec, p), pk::AssumptionViolation);
    }
    SUBCASE("free functions are differentiated twice, so order tops out at 2") {
        spec.jet_order = 3;
        CHECK_THROWS_AS(pk::catalog::build_coframe(spec, p), pk::ConfigError);
    }
    SUBCASE("missing free function") {
        spec.funcs.erase("U");
        CHECK_THROWS_AS(pk::catalog::build_coframe(spec, p), pk::ConfigError);
    }
    SUBCASE("free function using a coordinate outside its allowed slots") {
        spec.funcs.at("U") = Expr::parse("y1*y4");
        CHECK_THROWS_AS(pk::catalog::build_coframe(spec, p), pk::ConfigError);
    }
    SUBCASE("missing family constant") {
        auto g = pk::catalog::default_spec(Family::typed_generic);
        g.params.erase("k3");
        CHECK_THROWS_AS(pk::catalog::build_coframe(g, {0.1, 0.2, -0.1, 0.8}), pk::ConfigError);
    }
    SUBCASE("jet order outside 1..4") {
        auto h = pk::catalog::default_spec(Family::homogeneous_d);
        h.jet_order = 0;
        CHECK_THROWS_AS(pk::catalog::build_coframe(h, {0, 0, 0, 0}), pk::ConfigError);
    }
}

TEST_CASE("catalog: sampling gives up on a fully excluded box") {
    auto spec = pk::catalog::default_spec(Family::typeo);
    // Pin the box to a point where y2 + y1 y3 - y4 = 0.
    spec.box.lo = spec.box.hi = {0.0, 0.5, 0.0, 0.5};
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(pk::catalog::sample_point(spec, rng), pk::SamplingExhausted);
    CHECK(!pk::catalog::admissible(spec, {0.0, 0.5, 0.0, 0.5}));
    // Outside the box is inadmissible no matter the margins.
    CHECK(!pk::catalog::admissible(spec, {50.0, 1.5, 0.0, 0.0}));
}

TEST_CASE("catalog: dancing family metric agrees with its potential") {
    auto spec = pk::catalog::default_spec(Family::dancing);
    std::mt19937_64 rng(5);
    for (int k = 0; k < 5; ++k) {
        auto p = pk::catalog::sample_point(spec, rng);
        auto cof = pk::catalog::build_coframe(spec, p);
        const double P = spec.psi2p;
        const double s = p[1] + p[0] * p[2] - p[3];
        const double d = 1.0 / (P * s * s);
        std::array<std::array<double, 4>, 4> g{};
        g[0][2] = g[2][0] = (p[3] - p[1]) * d;
        g[0][3] = g[3][0] = -p[2] * d;
        g[1][2] = g[2][1] = p[0] * d;
        g[1][3] = g[3][1] = -d;
        check_metric_matches(cof, g, 1e-10);
    }
}

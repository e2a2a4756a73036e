#include <doctest.h>

#include <map>
#include <string>

#include "pk/errors.hpp"
#include "pk/expr.hpp"
#include "pk/jets.hpp"

using pk::expr::Expr;
using pk::jets::Jet;

namespace {

std::map<std::string, Jet> chart4(double a, double b, double x, double y, int order) {
    double pt[4] = {a, b, x, y};
    return {{"a", pk::jets::seed(pt, 0, order)},
            {"b", pk::jets::seed(pt, 1, order)},
            {"x", pk::jets::seed(pt, 2, order)},
            {"y", pk::jets::seed(pt, 3, order)}};
}

}  // namespace

TEST_CASE("numeric literals and precedence") {
    auto env = chart4(0, 0, 0, 0, 1);
    CHECK(Expr::parse("3.5").eval(env, {}).value() == 3.5);
    CHECK(Expr::parse("2+3*4").eval(env, {}).value() == 14.0);
    CHECK(Expr::parse("2*3^2").eval(env, {}).value() == 18.0);
    CHECK(Expr::parse("-3^2").eval(env, {}).value() == -9.0);
    CHECK(Expr::parse("(2+3)*4").eval(env, {}).value() == 20.0);
    CHECK(Expr::parse("1 - 2 - 3").eval(env, {}).value() == -4.0);
    CHECK(Expr::parse("12/4/3").eval(env, {}).value() == 1.0);
    CHECK(Expr::parse("2^-1").eval(env, {}).value() == 0.5);
    CHECK(Expr::parse("1e-3").eval(env, {}).value() == 1e-3);
}

TEST_CASE("constant expression keeps zero derivatives") {
    auto env = chart4(1, 2, 3, 4, 2);
    Jet c = Expr::parse("7.25").eval(env, {});
    CHECK(c.value() == 7.25);
    for (int v = 0; v < 4; ++v) CHECK(c.partial(v) == 0.0);
}

TEST_CASE("product of coordinates carries the product rule") {
    auto env = chart4(0, 0, 3, 5, 2);
    Jet p = Expr::parse("x*y").eval(env, {});
    CHECK(p.value() == 15.0);
    CHECK(p.partial(2) == 5.0);
    CHECK(p.partial(3) == 3.0);
    CHECK(p.coeff({0, 0, 1, 1}) == 1.0);
}

TEST_CASE("mixed second partials of a bilinear potential") {
    auto env = chart4(0.7, -0.3, 0.2, 0.9, 2);
    Jet v = Expr::parse("a*x + b*y").eval(env, {});
    CHECK(v.coeff({1, 0, 1, 0}) == 1.0);  // V_ax
    CHECK(v.coeff({0, 1, 0, 1}) == 1.0);  // V_by
    CHECK(v.coeff({1, 0, 0, 1}) == 0.0);  // V_ay
    CHECK(v.coeff({0, 1, 1, 0}) == 0.0);  // V_bx
}

TEST_CASE("logarithmic potential at its reference point") {
    // V = -(1/Psi) log(b + a x - y) with Psi = 1 at (a,b,x,y) = (0,1,0,0).
    // Hand differentiation with w = b + a x - y (w = 1 there):
    // V = 0, V_a = -x/w = 0, V_b = -1/w = -1, V_x = -a/w = 0, V_y = 1/w = 1,
    // V_bb = 1/w^2 = 1, V_ax = -1/w + a x/w^2 = -1, V_by = -1/w^2 = -1.
    auto env = chart4(0.0, 1.0, 0.0, 0.0, 2);
    Jet v = Expr::parse("-(1/Psi)*log(b + a*x - y)").eval(env, {{"Psi", 1.0}});
    CHECK(v.value() == 0.0);
    CHECK(v.partial(0) == 0.0);
    CHECK(v.partial(1) == -1.0);
    CHECK(v.partial(2) == 0.0);
    CHECK(v.partial(3) == 1.0);
    CHECK(v.coeff({0, 2, 0, 0}) == doctest::Approx(0.5).epsilon(1e-14));   // V_bb / 2!
    CHECK(v.coeff({1, 0, 1, 0}) == doctest::Approx(-1.0).epsilon(1e-14));  // V_ax
    CHECK(v.coeff({0, 1, 0, 1}) == doctest::Approx(-1.0).epsilon(1e-14));  // V_by
}

TEST_CASE("parameters act as constants") {
    auto env = chart4(2, 0, 0, 0, 2);
    Jet v = Expr::parse("k*a^2").eval(env, {{"k", 3.0}});
    CHECK(v.value() == 12.0);
    CHECK(v.partial(0) == 12.0);
    CHECK(v.coeff({2, 0, 0, 0}) == 3.0);
}

TEST_CASE("exponent must be constant") {
    auto env = chart4(2, 3, 0, 0, 2);
    CHECK(Expr::parse("a^k").eval(env, {{"k", 2.0}}).value() == 4.0);
    CHECK_THROWS_AS(Expr::parse("a^b").eval(env, {}), pk::ConfigError);
}

TEST_CASE("functions compose") {
    auto env = chart4(0, 0, 0, 1.0, 3);
    Jet v = Expr::parse("exp(log(y))").eval(env, {});
    CHECK(v.value() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(v.partial(3) == doctest::Approx(1.0).epsilon(1e-13));
    Jet s = Expr::parse("sqrt(y)").eval(env, {});
    CHECK(s.partial(3) == 0.5);
}

TEST_CASE("unbound symbol is rejected") {
    auto env = chart4(0, 0, 0, 0, 1);
    CHECK_THROWS_AS(Expr::parse("x + z").eval(env, {}), pk::ConfigError);
}

TEST_CASE("free symbols are reported") {
    Expr e = Expr::parse("-(1/Psi)*log(b + a*x - y)");
    auto syms = e.symbols();
    CHECK(syms == std::set<std::string>{"Psi", "a", "b", "x", "y"});
}

TEST_CASE("malformed input is a parse error") {
    CHECK_THROWS_AS(Expr::parse("x +"), pk::ParseError);
    CHECK_THROWS_AS(Expr::parse("log(x"), pk::ParseError);
    CHECK_THROWS_AS(Expr::parse("(a+b"), pk::ParseError);
    CHECK_THROWS_AS(Expr::parse("sin(x)"), pk::ParseError);
    CHECK_THROWS_AS(Expr::parse("a b"), pk::ParseError);
    CHECK_THROWS_AS(Expr::parse(""), pk::ParseError);
}

TEST_CASE("singular evaluation propagates") {
    auto env = chart4(0, 0, 0, 0, 2);
    CHECK_THROWS_AS(Expr::parse("1/x").eval(env, {}), pk::SingularEval);
    CHECK_THROWS_AS(Expr::parse("log(a - 1)").eval(env, {}), pk::SingularEval);
}

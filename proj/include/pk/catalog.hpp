#pragma once

#include <array>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "pk/expr.hpp"
#include "pk/forms.hpp"
#include "pk/petrov.hpp"

// Catalog of explicit split-signature Einstein metrics built from null
// coframes theta^1..theta^4 with g = 2 theta^1 theta^3 + 2 theta^2 theta^4.
// Every family carries a constant self-dual Weyl coefficient psi2p != 0 and
// is Einstein with scalar curvature R = -12 psi2p.  Families differ in the
// root type of the anti-self-dual Weyl quartic at generic points.
namespace pk::catalog {

enum class Family {
    potential,       // coframe from a user potential V(a,b,x,y)
    dancing,         // logarithmic potential; anti-self-dual Weyl vanishes
    homogeneous_d,   // homogeneous type D model, all scalar invariants constant
    typed_generic,   // type D, four extra constants k1..k4
    typed_branch2,   // type D branch with constants k1, k2
    typed_branch3,   // typed_branch2 with theta^1<->theta^2, theta^3<->theta^4
    typeii_ym,       // type II family with free f1(a), f2(b), f3(b), f4(a)
    typeiii,         // type III family with free U(y1,y3), W(y3,y4)
    typen,           // type N family with free F1(y2), F2(y2)
    typeo,           // conformally flat model; anti-self-dual Weyl vanishes
};

const char* to_string(Family f);
std::optional<Family> family_from_name(std::string_view name);

struct Box {
    std::array<double, 4> lo{};
    std::array<double, 4> hi{};
    bool contains(const std::array<double, 4>& p) const;
};

// A sampled member of one family.  `params` holds the family constants
// (k1..k4), `funcs` the free functions; both are consulted by name.  Margins
// exclude the zero sets of coframe denominators and, for typeii_ym, points
// where f2' or f4' vanish.  Free-function expressions may also use `params`
// entries and `psi2p` as symbols.
struct MetricSpec {
    Family family = Family::homogeneous_d;
    double psi2p = 1.0;  // constant self-dual Weyl coefficient, != 0
    std::map<std::string, double> params;
    std::map<std::string, expr::Expr> funcs;
    Box box;
    double margin = 0.1;
    int jet_order = 3;
};

// Family defaults: box, margin, jet order, parameter values, and free
// functions chosen so that uniform draws from the box are accepted at a rate
// of at least 95% and the generic root type is realized throughout.
MetricSpec default_spec(Family f);

// What the family guarantees at generic accepted points (for the default
// free functions where those matter).
struct ExpectedProfile {
    bool has_expected_type = false;
    petrov::RootKind weyl_minus = petrov::RootKind::O;
    bool weyl_minus_vanishes = false;  // whole anti-self-dual Weyl part is zero
    bool homogeneous = false;          // scalar invariants constant in space
    bool psi2_equals_psi2p = false;    // middle coefficients agree on both sides
};
ExpectedProfile expected_profile(const MetricSpec& spec);

// Margin predicate for a point of the box; false outside the box.  Does not
// throw on excluded points.  May throw ConfigError for malformed specs
// (unbound functions, bad jet order).
bool admissible(const MetricSpec& spec, const std::array<double, 4>& point);

// Uniform draw from the box, rejecting inadmissible points.  Throws
// SamplingExhausted after 1000 consecutive rejections.
std::array<double, 4> sample_point(const MetricSpec& spec, std::mt19937_64& rng);

// Null coframe of the family at an admissible point, as coordinate-basis
// jets of order spec.jet_order.  Coordinates are (y1,y2,y3,y4), except for
// potential, dancing, and typeii_ym which use (a,b,x,y).  Throws
// MarginViolation on excluded points, AssumptionViolation when psi2p == 0 or
// a family constraint fails, ConfigError for missing parameters or
// free-function symbols outside the family's allowed set.
forms::CoframeSample build_coframe(const MetricSpec& spec, const std::array<double, 4>& point);

// Coframe {da, db, V_ax dx + V_ay dy, V_bx dx + V_by dy} of the metric
// 2 da dV_a + 2 db dV_b on (a,b,x,y).  The symbol psi2p is bound to the
// given value inside V.  V is evaluated two orders above `order`, so
// order <= 2.  Throws MarginViolation when the Hessian block
// det(V_ax V_by - V_ay V_bx) is within `margin` of zero.
forms::CoframeSample build_from_potential(const expr::Expr& v, const std::array<double, 4>& point,
                                          double psi2p, int order, double margin = 1e-6,
                                          const std::map<std::string, double>& params = {});

// Symmetric matrix of the metric 2 theta^1 theta^3 + 2 theta^2 theta^4 (or
// generally sum g_ab theta^a theta^b) in the coordinate basis.
std::array<std::array<jets::Jet, 4>, 4> metric_components(const forms::CoframeSample& cof);

struct ResidualReport {
    struct Entry {
        std::array<double, 4> point{};
        double residual = 0.0;
    };
    std::vector<Entry> entries;
    double max_residual = 0.0;
};

// Residual of the Einstein condition for a potential metric,
//   det(V_ax V_by - V_ay V_bx) - c1(a,b) c2(x,y) exp(-lambda V),
// at each point.  c1 may use symbols {a,b} and c2 {x,y} only.
ResidualReport check_einstein_pde(const expr::Expr& v, double lambda, const expr::Expr& c1,
                                  const expr::Expr& c2,
                                  const std::vector<std::array<double, 4>>& points,
                                  const std::map<std::string, double>& params = {});

// Residual of d2F/dy1 dy3 - 3 psi2p exp(F) for the separable solution
//   F = log(2 p'(y1) q'(y3) / (-3 psi2p (p - q)^2))
// at each (y1, y3) point.  Requires |p'|, |q'|, |p - q| >= margin there;
// throws MarginViolation otherwise.
ResidualReport check_liouville(const expr::Expr& p, const expr::Expr& q, double psi2p,
                               const std::vector<std::array<double, 2>>& points,
                               double margin = 1e-6);

}  // namespace pk::catalog

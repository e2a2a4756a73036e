#include "pk/catalog.hpp"

#include <cmath>
#include <sstream>

#include "pk/errors.hpp"
#include "pk/jets.hpp"

namespace pk::catalog {

namespace {

using expr::Expr;
using forms::Basis;
using forms::CoframeSample;
using forms::FormValue;
using jets::Jet;

constexpr int kDim = 4;

// Coordinate names per chart.  Potential-built families and typeii_ym live
// on (a,b,x,y); everything else on (y1,y2,y3,y4).
const char* const kABXY[4] = {"a", "b", "x", "y"};
const char* const kY[4] = {"y1", "y2", "y3", "y4"};

std::string point_str(const std::array<double, 4>& p) {
    std::ostringstream os;
    os << "(" << p[0] << ", " << p[1] << ", " << p[2] << ", " << p[3] << ")";
    return os.str();
}

double param(const MetricSpec& s, const char* name) {
    auto it = s.params.find(name);
    if (it == s.params.end())
        throw ConfigError(std::string("family ") + to_string(s.family) +
                          " needs parameter '" + name + "'");
    if (!std::isfinite(it->second))
        throw ConfigError(std::string("parameter '") + name + "' is not finite");
    return it->second;
}

const Expr& func(const MetricSpec& s, const char* name) {
    auto it = s.funcs.find(name);
    if (it == s.funcs.end())
        throw ConfigError(std::string("family ") + to_string(s.family) +
                          " needs free function '" + name + "'");
    return it->second;
}

// Aborts when e uses a symbol outside the allowed coordinate set, the spec
// parameters, and psi2p.
void check_symbols(const Expr& e, const char* fname, std::initializer_list<const char*> vars,
                   const std::map<std::string, double>& params) {
    for (const auto& sym : e.symbols()) {
        bool ok = sym == "psi2p" || params.count(sym) > 0;
        for (const char* v : vars) ok = ok || sym == v;
        if (!ok)
            throw ConfigError(std::string("free function ") + fname + " = '" + e.text() +
                              "' uses symbol '" + sym + "' outside its allowed arguments");
    }
}

std::map<std::string, Jet> coord_env(const char* const names[4], const std::array<double, 4>& p,
                                     int order) {
    std::map<std::string, Jet> env;
    for (int i = 0; i < 4; ++i) env.emplace(names[i], jets::seed(p, i, order));
    return env;
}

std::map<std::string, double> eval_params(const MetricSpec& s) {
    auto ps = s.params;
    ps["psi2p"] = s.psi2p;
    return ps;
}

FormValue zero1(int order) { return FormValue::zero(4, 1, Basis::coordinate, kDim, order); }

Jet cjet(int order, double v) { return Jet::constant(kDim, order, v); }

CoframeSample make_sample(std::vector<FormValue> th) {
    CoframeSample c;
    c.n = 4;
    c.theta = std::move(th);
    c.g = forms::null_metric4();
    c.vol_coeff = 1.0;
    c.cond_bound = 1e8;
    return c;
}

// ---- margin predicates -------------------------------------------------

void require_margin(bool ok, const std::string& what, const std::array<double, 4>& p) {
    if (!ok) throw MarginViolation(what + " at point " + point_str(p));
}

// Throws MarginViolation when `point` lies outside the box or inside an
// exclusion margin of the family.
void require_admissible(const MetricSpec& s, const std::array<double, 4>& p) {
    for (int i = 0; i < 4; ++i)
        if (!std::isfinite(p[i])) throw ConfigError("sample point is not finite");
    require_margin(s.box.contains(p), "point outside the sample box", p);
    const double m = s.margin;
    const double P = s.psi2p;
    switch (s.family) {
        case Family::potential: {
            const Expr& v = func(s, "V");
            try {
                auto env = coord_env(kABXY, p, 2);
                Jet vj = v.eval(env, eval_params(s));
                double det = vj.deriv(0).deriv(2).value() * vj.deriv(1).deriv(3).value() -
                             vj.deriv(0).deriv(3).value() * vj.deriv(1).deriv(2).value();
                require_margin(std::abs(det) >= m, "degenerate Hessian block of the potential", p);
            } catch (const SingularEval& e) {
                throw MarginViolation(std::string("potential hits a singular margin at point ") +
                                      point_str(p) + ": " + e.what());
            }
            break;
        }
        case Family::dancing:
            require_margin(std::abs(p[1] + p[0] * p[2] - p[3]) >= m,
                           "logarithm argument b + a*x - y within margin of zero", p);
            break;
        case Family::homogeneous_d:
            require_margin(std::abs(1.0 - 1.5 * P * p[0] * p[2]) >= m &&
                               std::abs(1.0 - 1.5 * P * p[1] * p[3]) >= m,
                           "coframe denominator within margin of zero", p);
            break;
        case Family::typed_generic:
        case Family::typed_branch2:
        case Family::typed_branch3:
            require_margin(std::abs(p[3]) >= m, "coordinate y4 within margin of zero", p);
            break;
        case Family::typeii_ym: {
            auto env = coord_env(kABXY, p, 1);
            auto ps = eval_params(s);
            double f2p = func(s, "f2").eval(env, ps).deriv(1).value();
            double f4p = func(s, "f4").eval(env, ps).deriv(0).value();
            require_margin(std::abs(f2p) >= m && std::abs(f4p) >= m,
                           "derivative of f2 or f4 within margin of zero", p);
            break;
        }
        case Family::typeiii:
        case Family::typen:
            break;
        case Family::typeo:
            require_margin(std::abs(p[1] + p[0] * p[2] - p[3]) >= m,
                           "conformal factor denominator within margin of zero", p);
            break;
    }
}

// ---- family builders ---------------------------------------------------

std::vector<FormValue> build_typed_generic(const MetricSpec& s, const std::array<double, 4>& p) {
    const int n = s.jet_order;
    const double P = s.psi2p;
    const double k1 = param(s, "k1"), k2 = param(s, "k2");
    const double k3 = param(s, "k3"), k4 = param(s, "k4");
    Jet y3 = jets::seed(p, 2, n);
    Jet y4 = jets::seed(p, 3, n);
    Jet iy4 = jets::inv(y4);

    FormValue th1 = zero1(n);
    th1.comp(0) = y4 * y4 * (1.0 - y3);
    th1.comp(1) = -y4;

    FormValue th2 = zero1(n);
    th2.comp(0) = y4 * y4;
    th2 -= th1;

    Jet j1 = -P * jets::pow(y3, 3ll) + k1 * y3 * y3 * iy4 - k2 * y3 * iy4 * iy4 -
             (k3 + 0.5 * k4) * jets::pow(iy4, 3ll);
    FormValue th3 = j1 * th1;
    th3.comp(2) = th3.comp(2) - cjet(n, 1.0);
    th3.comp(3) = th3.comp(3) - y3 * iy4;

    Jet mj3 = P * jets::pow(y3 - 1.0, 3ll) - k1 * (y3 - 1.0) * (y3 - 1.0) * iy4 +
              k2 * (y3 - 1.0) * iy4 * iy4 + k3 * jets::pow(iy4, 3ll);
    FormValue th4 = mj3 * th2;
    th4.comp(2) = th4.comp(2) + cjet(n, 1.0);
    th4.comp(3) = th4.comp(3) + (y3 - 1.0) * iy4;
    return {th1, th2, th3, th4};
}

std::vector<FormValue> build_typed_branch2(const MetricSpec& s, const std::array<double, 4>& p) {
    const int n = s.jet_order;
    const double P = s.psi2p;
    const double k1 = param(s, "k1"), k2 = param(s, "k2");
    Jet y1 = jets::seed(p, 0, n);
    Jet y4 = jets::seed(p, 3, n);
    Jet iy4 = jets::inv(y4);

    FormValue th1 = zero1(n);
    th1.comp(0) = cjet(n, 1.0);
    th1.comp(2) = k2 * y1 * y1 * y4;
    th1.comp(3) = y1 * iy4;

    FormValue th2 = zero1(n);
    th2.comp(1) = iy4;
    th2.comp(2) = y1;

    FormValue th3 = zero1(n);
    th3.comp(2) = cjet(n, 1.0);

    Jet c = k1 * jets::pow(y4, 3ll) + 2.0 * k2 * y4 + 2.0 * P;
    FormValue th4 = zero1(n);
    th4.comp(1) = -0.5 * c * iy4;
    th4.comp(2) = -0.5 * c * y1;
    th4.comp(3) = iy4;
    return {th1, th2, th3, th4};
}

std::vector<FormValue> build_homogeneous_d(const MetricSpec& s, const std::array<double, 4>& p) {
    const int n = s.jet_order;
    const double P = s.psi2p;
    Jet y1 = jets::seed(p, 0, n), y2 = jets::seed(p, 1, n);
    Jet y3 = jets::seed(p, 2, n), y4 = jets::seed(p, 3, n);
    Jet i13 = jets::inv(1.0 - 1.5 * P * y1 * y3);
    Jet i24 = jets::inv(1.0 - 1.5 * P * y2 * y4);
    FormValue th1 = zero1(n), th2 = zero1(n), th3 = zero1(n), th4 = zero1(n);
    th1.comp(0) = i13;
    th2.comp(1) = i24;
    th3.comp(2) = i13;
    th4.comp(3) = i24;
    return {th1, th2, th3, th4};
}

std::vector<FormValue> build_typeo(const MetricSpec& s, const std::array<double, 4>& p) {
    const int n = s.jet_order;
    Jet y1 = jets::seed(p, 0, n), y2 = jets::seed(p, 1, n);
    Jet y3 = jets::seed(p, 2, n), y4 = jets::seed(p, 3, n);
    // The scaling coefficient sits on the first coframe pair only, so the
    // metric scales by 1/psi2p for either sign of psi2p.
    Jet iu = jets::inv(y2 + y1 * y3 - y4);
    Jet id = (1.0 / s.psi2p) * iu;
    FormValue th1 = zero1(n), th2 = zero1(n), th3 = zero1(n), th4 = zero1(n);
    th1.comp(0) = id;
    th2.comp(1) = id;
    th3.comp(2) = (y4 - y2) * iu;
    th3.comp(3) = -y3 * iu;
    th4.comp(2) = y1 * iu;
    th4.comp(3) = -iu;
    return {th1, th2, th3, th4};
}

std::vector<FormValue> build_typeii(const MetricSpec& s, const std::array<double, 4>& p) {
    const int n = s.jet_order;
    const double P = s.psi2p;
    auto ps = eval_params(s);
    check_symbols(func(s, "f1"), "f1", {"a"}, s.params);
    check_symbols(func(s, "f2"), "f2", {"b"}, s.params);
    check_symbols(func(s, "f3"), "f3", {"b"}, s.params);
    check_symbols(func(s, "f4"), "f4", {"a"}, s.params);
    auto env = coord_env(kABXY, p, n);
    Jet f1 = func(s, "f1").eval(env, ps);
    Jet f2 = func(s, "f2").eval(env, ps);
    Jet f3 = func(s, "f3").eval(env, ps);
    Jet f4 = func(s, "f4").eval(env, ps);
    Jet x = env.at("x"), y = env.at("y");
    FormValue th1 = zero1(n), th2 = zero1(n), th3 = zero1(n), th4 = zero1(n);
    th1.comp(2) = cjet(n, 1.0);
    th1.comp(0) = -1.5 * P * (x * x + x * f1 + f2);
    th2.comp(1) = cjet(n, 1.0);
    th3.comp(0) = cjet(n, 1.0);
    th4.comp(3) = cjet(n, 1.0);
    th4.comp(1) = -1.5 * P * (y * y + y * f3 + f4);
    return {th1, th2, th3, th4};
}

std::vector<FormValue> build_typeiii(const MetricSpec& s, const std::array<double, 4>& p) {
    const int n = s.jet_order;
    if (n > jets::kMaxOrder - 2)
        throw ConfigError("typeIII coframe order must be at most 2: free functions are "
                          "differentiated twice");
    const double P = s.psi2p;
    auto ps = eval_params(s);
    check_symbols(func(s, "U"), "U", {"y1", "y3"}, s.params);
    check_symbols(func(s, "W"), "W", {"y3", "y4"}, s.params);
    auto env = coord_env(kY, p, n + 2);
    Jet uj = func(s, "U").eval(env, ps);
    Jet wj = func(s, "W").eval(env, ps);
    auto tr = [n](const Jet& j) { return j.truncated(n); };
    Jet u = tr(uj);
    Jet w3 = tr(wj.deriv(2)), w33 = tr(wj.deriv(2).deriv(2)), w34 = tr(wj.deriv(2).deriv(3));
    Jet y1 = jets::seed(p, 0, n), y2 = jets::seed(p, 1, n), y4 = jets::seed(p, 3, n);
    Jet e1 = jets::exp(y4), emh = jets::exp(-0.5 * y4);
    Jet em1 = jets::exp(-y4), em32 = jets::exp(-1.5 * y4), em2 = jets::exp(-2.0 * y4);

    FormValue th1 = zero1(n);
    th1.comp(0) = -em1 - P * y2 * em2 - y2 * em32 + 0.5 * w3 * em32;
    th1.comp(1) = em32;
    th1.comp(2) = -P * em2 * y2 * y2 +
                  (3.0 * P * y1 * em32 - em1 + P * w3 * em2 - 0.5 * w3 * em32) * y2 +
                  em32 * (-w33 - 3.0 * P * y1 * w3 + 0.5 * w3 * w3 + u) + w3 * em1;
    th1.comp(3) = -w34 * em32;

    FormValue th2 = zero1(n);
    th2.comp(0) = emh;
    th2.comp(2) = (y2 - w3) * emh;

    FormValue th3 = zero1(n);
    th3.comp(2) = e1;

    FormValue th4 = zero1(n);
    th4.comp(0) = -P * emh - 1.0;
    th4.comp(3) = cjet(n, 0.5);
    th4.comp(2) = (P * emh + 0.5) * w3;
    return {th1, th2, th3, th4};
}

std::vector<FormValue> build_typen(const MetricSpec& s, const std::array<double, 4>& p) {
    const int n = s.jet_order;
    const double P = s.psi2p;
    auto ps = eval_params(s);
    check_symbols(func(s, "F1"), "F1", {"y2"}, s.params);
    check_symbols(func(s, "F2"), "F2", {"y2"}, s.params);
    auto env = coord_env(kY, p, n);
    Jet g1 = func(s, "F1").eval(env, ps);
    Jet g2 = func(s, "F2").eval(env, ps);
    Jet y1 = env.at("y1"), y3 = env.at("y3"), y4 = env.at("y4");
    Jet em2 = jets::exp(-2.0 * y4);

    FormValue th1 = zero1(n);
    Jet em3 = jets::exp(-3.0 * y4);
    th1.comp(0) = 2.0 * em3;
    th1.comp(1) = em3 * (-16.0 * y3 * y3 + g1 + y3 * g2);

    FormValue th2 = zero1(n);
    th2.comp(2) = 8.0 * em2;
    th2.comp(1) = -8.0 * em2 * y1;

    FormValue th3 = zero1(n);
    th3.comp(1) = jets::exp(y4);

    FormValue th4 = zero1(n);
    th4.comp(3) = cjet(n, -0.5);
    th4.comp(2) = -0.5 * P * em2;
    th4.comp(1) = 0.5 * P * em2 * y1;
    return {th1, th2, th3, th4};
}

const Expr& dancing_potential() {
    static const Expr v = Expr::parse("-(1/psi2p) * log(b + a*x - y)");
    return v;
}

}  // namespace

const char* to_string(Family f) {
    switch (f) {
        case Family::potential: return "potential";
        case Family::dancing: return "dancing";
        case Family::homogeneous_d: return "homogeneous-D";
        case Family::typed_generic: return "typeD-generic";
        case Family::typed_branch2: return "typeD-branch2";
        case Family::typed_branch3: return "typeD-branch3";
        case Family::typeii_ym: return "typeII-YM";
        case Family::typeiii: return "typeIII";
        case Family::typen: return "typeN";
        case Family::typeo: return "typeO";
    }
    return "?";
}

std::optional<Family> family_from_name(std::string_view name) {
    for (Family f : {Family::potential, Family::dancing, Family::homogeneous_d,
                     Family::typed_generic, Family::typed_branch2, Family::typed_branch3,
                     Family::typeii_ym, Family::typeiii, Family::typen, Family::typeo})
        if (name == to_string(f)) return f;
    return std::nullopt;
}

bool Box::contains(const std::array<double, 4>& p) const {
    for (int i = 0; i < 4; ++i)
        if (!(p[i] >= lo[i] && p[i] <= hi[i])) return false;
    return true;
}

MetricSpec default_spec(Family f) {
    MetricSpec s;
    s.family = f;
    s.psi2p = 1.0;
    switch (f) {
        case Family::potential:
            // product-log potential; solves the Einstein condition with c1*c2 = 1
            s.funcs.emplace("V", Expr::parse("-(2/(3*psi2p)) * log((1 - (3/2)*psi2p*a*x) * "
                                             "(1 - (3/2)*psi2p*b*y))"));
            s.box = {{-0.4, -0.4, -0.4, -0.4}, {0.4, 0.4, 0.4, 0.4}};
            s.margin = 1e-3;
            s.jet_order = 2;
            break;
        case Family::dancing:
            s.box = {{-0.5, 1.5, -0.5, -0.5}, {0.5, 2.5, 0.5, 0.5}};
            s.margin = 0.2;
            s.jet_order = 2;
            break;
        case Family::homogeneous_d:
            s.box = {{-0.6, -0.6, -0.6, -0.6}, {0.6, 0.6, 0.6, 0.6}};
            s.margin = 0.2;
            s.jet_order = 3;
            break;
        case Family::typed_generic:
            s.params = {{"k1", 0.5}, {"k2", -0.3}, {"k3", 0.2}, {"k4", 0.7}};
            s.box = {{-1.0, -1.0, -1.0, 0.5}, {1.0, 1.0, 1.0, 1.5}};
            s.margin = 0.1;
            s.jet_order = 3;
            break;
        case Family::typed_branch2:
        case Family::typed_branch3:
            s.params = {{"k1", 0.4}, {"k2", -0.6}};
            s.box = {{-1.0, -1.0, -1.0, 0.5}, {1.0, 1.0, 1.0, 1.5}};
            s.margin = 0.1;
            s.jet_order = 3;
            break;
        case Family::typeii_ym:
            s.funcs.emplace("f1", Expr::parse("a"));
            s.funcs.emplace("f2", Expr::parse("b"));
            s.funcs.emplace("f3", Expr::parse("b"));
            s.funcs.emplace("f4", Expr::parse("a"));
            s.box = {{1.0, 1.0, 0.25, 0.25}, {2.0, 2.0, 1.0, 1.0}};
            s.margin = 1e-2;
            s.jet_order = 3;
            break;
        case Family::typeiii:
            s.funcs.emplace("U", Expr::parse("y1*y1*y3"));
            s.funcs.emplace("W", Expr::parse("y3*y4*y4"));
            s.box = {{-0.5, -0.5, -0.5, -0.5}, {0.5, 0.5, 0.5, 0.5}};
            s.margin = 1e-2;
            s.jet_order = 2;
            break;
        case Family::typen:
            s.funcs.emplace("F1", Expr::parse("y2"));
            s.funcs.emplace("F2", Expr::parse("y2*y2"));
            s.box = {{-0.5, -0.5, -0.5, -0.5}, {0.5, 0.5, 0.5, 0.5}};
            s.margin = 1e-2;
            s.jet_order = 3;
            break;
        case Family::typeo:
            s.box = {{-0.5, 1.5, -0.5, -0.5}, {0.5, 2.5, 0.5, 0.5}};
            s.margin = 0.2;
            s.jet_order = 3;
            break;
    }
    return s;
}

ExpectedProfile expected_profile(const MetricSpec& spec) {
    ExpectedProfile e;
    using RK = petrov::RootKind;
    switch (spec.family) {
        case Family::potential:
            break;
        case Family::dancing:
        case Family::typeo:
            e.has_expected_type = true;
            e.weyl_minus = RK::O;
            e.weyl_minus_vanishes = true;
            e.homogeneous = true;
            break;
        case Family::homogeneous_d:
            e.has_expected_type = true;
            e.weyl_minus = RK::Dr;
            e.homogeneous = true;
            e.psi2_equals_psi2p = true;
            break;
        case Family::typed_generic:
        case Family::typed_branch2:
        case Family::typed_branch3:
            e.has_expected_type = true;
            e.weyl_minus = RK::Dr;
            break;
        case Family::typeii_ym:
            e.has_expected_type = true;
            e.weyl_minus = RK::IIr;
            e.psi2_equals_psi2p = true;
            break;
        case Family::typeiii:
            e.has_expected_type = true;
            e.weyl_minus = RK::III;
            break;
        case Family::typen:
            e.has_expected_type = true;
            e.weyl_minus = RK::N;
            break;
    }
    return e;
}

bool admissible(const MetricSpec& spec, const std::array<double, 4>& point) {
    try {
        require_admissible(spec, point);
    } catch (const MarginViolation&) {
        return false;
    }
    return true;
}

std::array<double, 4> sample_point(const MetricSpec& spec, std::mt19937_64& rng) {
    std::array<std::uniform_real_distribution<double>, 4> dist;
    for (int i = 0; i < 4; ++i) {
        if (!(spec.box.lo[i] <= spec.box.hi[i]))
            throw ConfigError("sample box has lo > hi");
        dist[i] = std::uniform_real_distribution<double>(spec.box.lo[i], spec.box.hi[i]);
    }
    for (int tries = 0; tries < 1000; ++tries) {
        std::array<double, 4> p;
        for (int i = 0; i < 4; ++i) p[i] = dist[i](rng);
        if (admissible(spec, p)) return p;
    }
    throw SamplingExhausted(std::string("no admissible point in 1000 draws for family ") +
                            to_string(spec.family));
}

forms::CoframeSample build_coframe(const MetricSpec& spec, const std::array<double, 4>& point) {
    if (!std::isfinite(spec.psi2p)) throw ConfigError("psi2p is not finite");
    if (spec.psi2p == 0.0)
        throw AssumptionViolation("psi2p must be nonzero for every catalog family");
    if (spec.jet_order < 1 || spec.jet_order > jets::kMaxOrder)
        throw ConfigError("coframe jet order out of range");
    require_admissible(spec, point);

    std::vector<FormValue> th;
    switch (spec.family) {
        case Family::potential:
            return build_from_potential(func(spec, "V"), point, spec.psi2p, spec.jet_order,
                                        spec.margin, spec.params);
        case Family::dancing:
            return build_from_potential(dancing_potential(), point, spec.psi2p, spec.jet_order,
                                        1e-9, spec.params);
        case Family::homogeneous_d:
            th = build_homogeneous_d(spec, point);
            break;
        case Family::typed_generic:
            th = build_typed_generic(spec, point);
            break;
        case Family::typed_branch2:
            th = build_typed_branch2(spec, point);
            break;
        case Family::typed_branch3:
            th = build_typed_branch2(spec, point);
            std::swap(th[0], th[1]);
            std::swap(th[2], th[3]);
            break;
        case Family::typeii_ym:
            th = build_typeii(spec, point);
            break;
        case Family::typeiii:
            th = build_typeiii(spec, point);
            break;
        case Family::typen:
            th = build_typen(spec, point);
            break;
        case Family::typeo:
            th = build_typeo(spec, point);
            break;
    }
    CoframeSample c = make_sample(std::move(th));
    c.require_invertible();
    return c;
}

forms::CoframeSample build_from_potential(const expr::Expr& v, const std::array<double, 4>& point,
                                          double psi2p, int order, double margin,
                                          const std::map<std::string, double>& params) {
    if (order < 1 || order > jets::kMaxOrder - 2)
        throw ConfigError("potential coframe order must be 1 or 2: the potential is "
                          "differentiated twice");
    if (!std::isfinite(psi2p)) throw ConfigError("psi2p is not finite");
    auto prm = params;
    prm["psi2p"] = psi2p;
    check_symbols(v, "V", {"a", "b", "x", "y"}, prm);
    auto env = coord_env(kABXY, point, order + 2);
    Jet vj;
    try {
        vj = v.eval(env, prm);
    } catch (const SingularEval& e) {
        throw MarginViolation(std::string("potential hits a singular margin at point ") +
                              point_str(point) + ": " + e.what());
    }
    Jet vax = vj.deriv(0).deriv(2), vay = vj.deriv(0).deriv(3);
    Jet vbx = vj.deriv(1).deriv(2), vby = vj.deriv(1).deriv(3);
    Jet det = vax * vby - vay * vbx;
    if (!(std::abs(det.value()) >= margin)) {
        std::ostringstream os;
        os << "degenerate Hessian block: |det| = " << std::abs(det.value()) << " < " << margin
           << " at point " << point_str(point);
        throw MarginViolation(os.str());
    }
    FormValue th1 = FormValue::unit(4, 0, Basis::coordinate, kDim, order);
    FormValue th2 = FormValue::unit(4, 1, Basis::coordinate, kDim, order);
    FormValue th3 = zero1(order);
    th3.comp(2) = vax;
    th3.comp(3) = vay;
    FormValue th4 = zero1(order);
    th4.comp(2) = vbx;
    th4.comp(3) = vby;
    CoframeSample c = make_sample({th1, th2, th3, th4});
    c.require_invertible();
    return c;
}

std::array<std::array<jets::Jet, 4>, 4> metric_components(const forms::CoframeSample& cof) {
    if (cof.n != 4 || cof.theta.size() != 4 || cof.theta[0].degree() != 1)
        throw ConfigError("metric components need a 4d coframe of 1-forms");
    const int jd = cof.jet_dim(), jo = cof.jet_order();
    std::array<std::array<Jet, 4>, 4> g;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            Jet acc = Jet::constant(jd, jo, 0.0);
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) {
                    double gab = cof.g(a, b);
                    if (gab == 0.0) continue;
                    acc = acc + gab * (cof.theta[a].comp(i) * cof.theta[b].comp(j));
                }
            g[i][j] = acc;
        }
    return g;
}

ResidualReport check_einstein_pde(const expr::Expr& v, double lambda, const expr::Expr& c1,
                                  const expr::Expr& c2,
                                  const std::vector<std::array<double, 4>>& points,
                                  const std::map<std::string, double>& params) {
    check_symbols(v, "V", {"a", "b", "x", "y"}, params);
    check_symbols(c1, "c1", {"a", "b"}, params);
    check_symbols(c2, "c2", {"x", "y"}, params);
    ResidualReport rep;
    for (const auto& pt : points) {
        auto env = coord_env(kABXY, pt, 2);
        Jet vj = v.eval(env, params);
        double det = vj.deriv(0).deriv(2).value() * vj.deriv(1).deriv(3).value() -
                     vj.deriv(0).deriv(3).value() * vj.deriv(1).deriv(2).value();
        double rhs = c1.eval(env, params).value() * c2.eval(env, params).value() *
                     std::exp(-lambda * vj.value());
        double res = std::abs(det - rhs);
        rep.entries.push_back({pt, res});
        rep.max_residual = std::max(rep.max_residual, res);
    }
    return rep;
}

ResidualReport check_liouville(const expr::Expr& p, const expr::Expr& q, double psi2p,
                               const std::vector<std::array<double, 2>>& points, double margin) {
    if (!std::isfinite(psi2p) || psi2p == 0.0)
        throw ConfigError("psi2p must be finite and nonzero");
    std::map<std::string, double> prm{{"psi2p", psi2p}};
    check_symbols(p, "p", {"y1"}, prm);
    check_symbols(q, "q", {"y3"}, prm);
    ResidualReport rep;
    for (const auto& pt : points) {
        std::array<double, 2> xy{pt[0], pt[1]};
        std::map<std::string, Jet> env;
        env.emplace("y1", jets::seed(xy, 0, 4));
        env.emplace("y3", jets::seed(xy, 1, 4));
        Jet pj = p.eval(env, prm);
        Jet qj = q.eval(env, prm);
        Jet pp = pj.deriv(0), qp = qj.deriv(1);
        std::array<double, 4> where{pt[0], 0.0, pt[1], 0.0};
        require_margin(std::abs(pp.value()) >= margin, "p' within margin of zero", where);
        require_margin(std::abs(qp.value()) >= margin, "q' within margin of zero", where);
        require_margin(std::abs((pj - qj).value()) >= margin, "p - q within margin of zero",
                       where);
        Jet d2 = ((pj - qj) * (pj - qj)).truncated(3);
        Jet arg = (2.0 * pp * qp) / ((-3.0 * psi2p) * d2);
        require_margin(arg.value() > 0.0,
                       "separable solution needs 2 p' q' / (-3 psi2p (p-q)^2) > 0", where);
        Jet f2 = jets::log(arg);
        Jet lhs = f2.deriv(0).deriv(1);
        Jet rhs = (3.0 * psi2p) * jets::exp(f2);
        double res = std::abs((lhs - rhs.truncated(1)).value());
        rep.entries.push_back({where, res});
        rep.max_residual = std::max(rep.max_residual, res);
    }
    return rep;
}

}  // namespace pk::catalog

#include "pk/pke.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "pk/errors.hpp"
#include "pk/jets.hpp"

namespace pk::pke {

namespace {

using forms::Basis;
using forms::CoframeSample;
using forms::FormValue;
using jets::Jet;

void require_null4(const CoframeSample& cof) {
    if (cof.n != 4 || cof.theta.size() != 4) {
        throw ConfigError("pke: expected a 4d coframe sample");
    }
    if (cof.g.rows() != 4 || cof.g.cols() != 4 ||
        (cof.g - forms::null_metric4()).cwiseAbs().maxCoeff() != 0.0) {
        throw ConfigError("pke: coframe metric must be the split null pairing");
    }
}

void require_order(const CoframeSample& cof, int min_order, const char* op) {
    if (cof.jet_order() < min_order) {
        throw OrderBudget(std::string(op) + ": needs jet order >= " +
                          std::to_string(min_order) + ", got " +
                          std::to_string(cof.jet_order()));
    }
}

// Shared derived data: connection at order n-1, curvature and coefficient
// decomposition at order n-2.
struct Core {
    curv::Connection conn;
    curv::Riemann riem;
    curv::Decomp dec;
};

Core make_core(const CoframeSample& cof) {
    Core core;
    core.conn = curv::solve_levi_civita(cof);
    core.riem = curv::riemann(core.conn, cof);
    core.dec = curv::decompose(core.riem, cof);
    return core;
}

// Trace-free matrix entries in the coordinate basis at order n-1, reusing an
// already-solved connection.
std::array<std::array<FormValue, 3>, 3> conn_a_entries(const Core& core,
                                                       const CoframeSample& cof) {
    const int ord = cof.jet_order() - 1;
    const FormValue g11 = forms::change_basis(core.conn.upper(0, 0), cof);
    const FormValue g12 = forms::change_basis(core.conn.upper(0, 1), cof);
    const FormValue g21 = forms::change_basis(core.conn.upper(1, 0), cof);
    const FormValue g22 = forms::change_basis(core.conn.upper(1, 1), cof);
    const FormValue t = (1.0 / 3.0) * (g11 + g22);

    std::array<std::array<FormValue, 3>, 3> a;
    a[0][0] = g11 - t;
    a[0][1] = g12;
    a[0][2] = cof.theta[0].truncated(ord);
    a[1][0] = g21;
    a[1][1] = g22 - t;
    a[1][2] = cof.theta[1].truncated(ord);
    a[2][0] = cof.theta[2].truncated(ord);
    a[2][1] = cof.theta[3].truncated(ord);
    a[2][2] = -t;
    return a;
}

// Curvature dA + A^A of a square matrix of coordinate 1-forms, truncated to
// one order below the entries.
template <size_t N>
std::array<std::array<FormValue, N>, N> matrix_curvature(
    const std::array<std::array<FormValue, N>, N>& a) {
    const int ord = a[0][0].jet_order() - 1;
    std::array<std::array<FormValue, N>, N> k;
    for (size_t i = 0; i < N; ++i) {
        for (size_t j = 0; j < N; ++j) {
            FormValue v = forms::ext_d(a[i][j]);
            for (size_t m = 0; m < N; ++m) {
                v += forms::wedge(a[i][m], a[m][j]).truncated(ord);
            }
            k[i][j] = v;
        }
    }
    return k;
}

// K expressed in the coframe basis, entrywise.
template <size_t N>
std::array<std::array<FormValue, N>, N> to_coframe(
    const std::array<std::array<FormValue, N>, N>& k, const CoframeSample& cof) {
    std::array<std::array<FormValue, N>, N> kc;
    for (size_t i = 0; i < N; ++i) {
        for (size_t j = 0; j < N; ++j) {
            kc[i][j] = forms::change_basis(k[i][j], cof);
        }
    }
    return kc;
}

// The expansion of the trace-free matrix curvature in the invariant 2-form
// triples, with entries built from the coefficient decomposition.
std::array<std::array<FormValue, 3>, 3> expected_curvature_a(const Core& core,
                                                             const CoframeSample& cof) {
    const int jd = cof.jet_dim();
    const int ord = cof.jet_order() - 2;
    const auto& psi = core.dec.psi;
    const Jet& p2 = core.dec.psip[2];
    const Jet one = Jet::constant(jd, ord, 1.0);

    const FormValue m1 = forms::sigma_minus(1, jd, ord);
    const FormValue m2 = forms::sigma_minus(2, jd, ord);
    const FormValue m3 = forms::sigma_minus(3, jd, ord);
    const FormValue p3 = forms::sigma_plus(3, jd, ord);
    const FormValue zero2 = FormValue::zero(4, 2, Basis::coframe, jd, ord);

    std::array<std::array<FormValue, 3>, 3> e;
    for (auto& row : e) row.fill(zero2);

    e[0][0] = psi[1] * m1 + psi[3] * m2 + (0.5 * (one - 2.0 * psi[2] - p2)) * m3 +
              (0.5 * (one - p2)) * p3;
    e[0][1] = (one + psi[2] - p2) * m1 + psi[4] * m2 + (-psi[3]) * m3;
    e[1][0] = (-psi[0]) * m1 + (-(one + psi[2] - p2)) * m2 + psi[1] * m3;
    e[1][1] = (-psi[1]) * m1 + (-psi[3]) * m2 + (0.5 * (p2 + 2.0 * psi[2] - one)) * m3 +
              (0.5 * (one - p2)) * p3;
    e[2][2] = (-(one - p2)) * p3;
    return e;
}

struct CurvatureAData {
    Core core;
    CartanCurvature out;
};

CurvatureAData curvature_a_data(const CoframeSample& cof, double check_tol) {
    require_null4(cof);
    require_order(cof, 2, "curvature_a");
    CurvatureAData d{make_core(cof), {}};

    const auto a = conn_a_entries(d.core, cof);
    const auto k = matrix_curvature<3>(a);
    d.out.k = to_coframe<3>(k, cof);

    const auto expected = expected_curvature_a(d.core, cof);
    double gap = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            gap = std::max(gap, forms::max_comp_diff(d.out.k[i][j], expected[i][j]));
        }
    }
    d.out.closed_form_residual = gap;

    double semi = 0.0;
    const int jd = cof.jet_dim();
    const int ord = cof.jet_order() - 2;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const auto coords = curv::sigma_coords(d.out.k[i][j]);
            FormValue rebuilt = FormValue::zero(4, 2, Basis::coframe, jd, ord);
            for (int s = 0; s < 3; ++s) {
                rebuilt.add_scaled(coords[s], forms::sigma_plus(s + 1, jd, ord));
                rebuilt.add_scaled(coords[s + 3], forms::sigma_minus(s + 1, jd, ord));
            }
            semi = std::max(semi, forms::max_comp_diff(rebuilt, d.out.k[i][j]));
        }
    }
    d.out.semibasic_residual = semi;

    d.out.trace_residual = std::max((a[0][0] + a[1][1] + a[2][2]).max_abs(),
                                    (d.out.k[0][0] + d.out.k[1][1] + d.out.k[2][2]).max_abs());

    if (d.out.closed_form_residual > check_tol) {
        throw ConventionError(
            "curvature_a: computed curvature disagrees with its coefficient "
            "expansion by " +
            std::to_string(d.out.closed_form_residual) +
            " (is the input a verified structure?)");
    }
    return d;
}

}  // namespace

double PkeReport::max_residual() const {
    double r = std::max({gamma14, gamma41, drho, ricci_tracefree, scalar_residual,
                         weyl_sd_off});
    if (psi2p_variation_checked) r = std::max(r, psi2p_variation);
    return r;
}

PkeReport verify_pke(const CoframeSample& cof) {
    require_null4(cof);
    require_order(cof, 2, "verify_pke");
    const Core core = make_core(cof);

    PkeReport rep;
    rep.gamma14 = core.conn.upper(0, 3).max_abs();
    rep.gamma41 = core.conn.upper(3, 0).max_abs();

    const FormValue rho = forms::wedge(cof.theta[0], cof.theta[2]) +
                          forms::wedge(cof.theta[1], cof.theta[3]);
    rep.drho = forms::ext_d(rho).max_abs();

    const Jet scal = core.riem.scalar();
    double tf = 0.0;
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            tf = std::max(tf, (core.riem.ricci(a, b) - 0.25 * cof.g(a, b) * scal).max_abs());
        }
    }
    rep.ricci_tracefree = tf;

    const Jet& p2 = core.dec.psip[2];
    rep.psi2p = p2.value();
    rep.scalar_residual = (scal + 12.0 * p2).max_abs();

    double off = 0.0;
    for (int k : {0, 1, 3, 4}) off = std::max(off, core.dec.psip[k].max_abs());
    rep.weyl_sd_off = off;

    if (cof.jet_order() >= 3) {
        rep.psi2p_variation_checked = true;
        double var = 0.0;
        for (int v = 0; v < cof.jet_dim(); ++v) {
            var = std::max(var, std::abs(p2.partial(v)));
        }
        rep.psi2p_variation = var;
    }
    return rep;
}

PkeReport verify_pke(std::span<const CoframeSample> batch) {
    if (batch.empty()) throw ConfigError("verify_pke: empty batch");
    PkeReport agg;
    double mean = 0.0;
    std::vector<double> vals;
    vals.reserve(batch.size());
    bool first = true;
    for (const auto& cof : batch) {
        const PkeReport r = verify_pke(cof);
        if (first) {
            agg = r;
            first = false;
        } else {
            agg.gamma14 = std::max(agg.gamma14, r.gamma14);
            agg.gamma41 = std::max(agg.gamma41, r.gamma41);
            agg.drho = std::max(agg.drho, r.drho);
            agg.ricci_tracefree = std::max(agg.ricci_tracefree, r.ricci_tracefree);
            agg.scalar_residual = std::max(agg.scalar_residual, r.scalar_residual);
            agg.weyl_sd_off = std::max(agg.weyl_sd_off, r.weyl_sd_off);
            agg.psi2p_variation = std::max(agg.psi2p_variation, r.psi2p_variation);
            agg.psi2p_variation_checked =
                agg.psi2p_variation_checked && r.psi2p_variation_checked;
        }
        vals.push_back(r.psi2p);
        mean += r.psi2p;
    }
    mean /= static_cast<double>(vals.size());
    agg.psi2p = mean;
    double spread = 0.0;
    for (double v : vals) spread = std::max(spread, std::abs(v - mean));
    agg.psi2p_spread = spread;
    return agg;
}

CartanConnA cartan_connection_a(const CoframeSample& cof) {
    require_null4(cof);
    require_order(cof, 1, "cartan_connection_a");
    const Core core = make_core(cof);
    CartanConnA out;
    out.a = conn_a_entries(core, cof);
    out.trace_residual = (out.a[0][0] + out.a[1][1] + out.a[2][2]).max_abs();
    return out;
}

double CartanCurvature::max_abs() const {
    double m = 0.0;
    for (const auto& row : k) {
        for (const auto& v : row) m = std::max(m, v.max_abs());
    }
    return m;
}

CartanCurvature curvature_a(const CoframeSample& cof, double check_tol) {
    return curvature_a_data(cof, check_tol).out;
}

YangMillsA yang_mills_a(const CoframeSample& cof, double tol) {
    const CurvatureAData d = curvature_a_data(cof, 1e-8);
    YangMillsA out;
    double resid = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            resid = std::max(resid, (forms::hodge(d.out.k[i][j], cof) + d.out.k[i][j]).max_abs());
        }
    }
    out.asd_residual = resid;
    out.yang_mills = resid < tol;
    out.psi2p_gap = std::abs(d.core.dec.psip[2].value() - 1.0);
    return out;
}

namespace {

bool is_torus_reduced(catalog::Family f) {
    using catalog::Family;
    return f == Family::homogeneous_d || f == Family::typed_generic ||
           f == Family::typed_branch2 || f == Family::typed_branch3;
}

bool has_reduced_profile(catalog::Family f) {
    using catalog::Family;
    return is_torus_reduced(f) || f == Family::typeii_ym || f == Family::typeiii ||
           f == Family::typen;
}

// Coefficient vanishing pattern of a family: which anti-self-dual slots must
// vanish, and which must not.
void family_pattern(catalog::Family f, std::array<bool, 5>& zero, int& root) {
    using catalog::Family;
    zero = {false, false, false, false, false};
    if (f == Family::typeii_ym) {
        zero[0] = zero[1] = zero[3] = true;
        root = 2;
    } else if (is_torus_reduced(f)) {
        zero[0] = zero[1] = zero[3] = zero[4] = true;
        root = 2;
    } else if (f == Family::typeiii) {
        zero[0] = zero[1] = zero[2] = true;
        root = 3;
    } else {
        zero[0] = zero[1] = zero[2] = zero[3] = true;
        root = 4;
    }
}

JProfile extract_j_core(const Core& core, const CoframeSample& cof,
                        catalog::Family family, double adapt_tol) {
    if (!has_reduced_profile(family)) {
        throw NotAdapted("extract_j: family has no reduced connection profile");
    }

    const FormValue g21 = core.conn.upper(1, 0);
    const FormValue g12 = core.conn.upper(0, 1);

    double adapt = std::max(g21.comp(0).max_abs(), g21.comp(3).max_abs());
    if (is_torus_reduced(family)) {
        adapt = std::max({adapt, g12.comp(1).max_abs(), g12.comp(2).max_abs()});
    }

    std::array<bool, 5> zero{};
    int root = 2;
    family_pattern(family, zero, root);
    for (int k = 0; k < 5; ++k) {
        if (zero[k]) adapt = std::max(adapt, core.dec.psi[k].max_abs());
    }
    if (std::abs(core.dec.psi[root].value()) <= adapt_tol) {
        throw NotAdapted("extract_j: the family's root coefficient vanishes at this point");
    }
    if (adapt > adapt_tol) {
        throw NotAdapted("extract_j: forbidden slot or coefficient pattern residual " +
                         std::to_string(adapt));
    }

    JProfile jp;
    jp.adaptation_residual = adapt;
    jp.j = {g21.comp(1).value(), g21.comp(2).value(), -g12.comp(0).value(),
            g12.comp(3).value(), g12.comp(2).value(), g12.comp(1).value()};

    if (is_torus_reduced(family)) {
        jp.has_j41 = true;
        const int jd = cof.jet_dim();
        const int ord = cof.jet_order() - 2;
        const Jet j1 = g21.comp(1);
        const Jet j2 = g21.comp(2);
        const Jet j3 = -g12.comp(0);
        const Jet j4 = g12.comp(3);
        const FormValue g11t = core.conn.upper(0, 0).truncated(ord);

        const auto du = [&](const Jet& f) {
            return forms::change_basis(
                forms::ext_d(FormValue::scalar(4, Basis::coordinate, f)), cof);
        };
        const auto th = [&](int a) {
            return FormValue::unit(4, a, Basis::coframe, jd, ord);
        };

        // Remainder of the derivative of J4 after its structure terms; only
        // the first coframe slot survives and holds J41.
        FormValue rem4 = du(j4);
        rem4.add_scaled(-(j3 * j4).truncated(ord), th(1));
        rem4.add_scaled(-(j4 * j4).truncated(ord), th(2));
        rem4.add_scaled(-(2.0 * (j2 * j4)).truncated(ord), th(3));
        rem4 += j4.truncated(ord) * g11t;
        jp.j41 = rem4.comp(0).value();

        // Independent route: the derivative of J1 carries -J41 on the third
        // coframe slot.
        FormValue rem1 = du(j1);
        rem1.add_scaled((j1 * j1).truncated(ord), th(0));
        rem1.add_scaled(-(j1 * j2).truncated(ord), th(3));
        rem1.add_scaled(-(2.0 * (j1 * j3)).truncated(ord), th(1));
        rem1 -= j1.truncated(ord) * g11t;
        const double j41_cross = -rem1.comp(2).value();

        double cross = std::abs(jp.j41 - j41_cross);
        for (int a : {1, 2, 3}) cross = std::max(cross, std::abs(rem4.comp(a).value()));
        for (int a : {0, 1, 3}) cross = std::max(cross, std::abs(rem1.comp(a).value()));
        jp.j41_cross_residual = cross;
    }
    return jp;
}

}  // namespace

JProfile extract_j(const CoframeSample& cof, catalog::Family family, double adapt_tol) {
    require_null4(cof);
    require_order(cof, 2, "extract_j");
    const Core core = make_core(cof);
    return extract_j_core(core, cof, family, adapt_tol);
}

double ReducedCurvature::max_abs() const {
    double m = 0.0;
    for (const auto& row : k) {
        for (const auto& v : row) m = std::max(m, v.max_abs());
    }
    return m;
}

ReducedCurvature curvature_b(const CoframeSample& cof, catalog::Family family,
                             double adapt_tol) {
    using catalog::Family;
    require_null4(cof);
    require_order(cof, 2, "curvature_b");
    if (!(family == Family::typeii_ym || is_torus_reduced(family))) {
        throw NotAdapted("curvature_b: family admits no reduced connection");
    }
    const Core core = make_core(cof);
    const JProfile jp = extract_j_core(core, cof, family, adapt_tol);

    const int jd = cof.jet_dim();
    const int n1 = cof.jet_order() - 1;

    // The reduction presumes a constant middle self-dual coefficient, so the
    // weight enters as a constant jet.
    const double p2v = core.dec.psip[2].value();
    const Jet w = Jet::constant(jd, n1, std::sqrt(1.5 * std::abs(p2v)));

    const FormValue g11 = forms::change_basis(core.conn.upper(0, 0), cof);
    const FormValue g22 = forms::change_basis(core.conn.upper(1, 1), cof);
    const FormValue zero1 = FormValue::zero(4, 1, Basis::coordinate, jd, n1);

    std::array<std::array<FormValue, 4>, 4> b;
    for (auto& row : b) row.fill(zero1);
    b[0][0] = 0.5 * g11;
    b[0][1] = w * cof.theta[0].truncated(n1);
    b[1][0] = w * cof.theta[2].truncated(n1);
    b[1][1] = -0.5 * g11;
    b[2][2] = 0.5 * g22;
    b[2][3] = w * cof.theta[1].truncated(n1);
    b[3][2] = w * cof.theta[3].truncated(n1);
    b[3][3] = -0.5 * g22;

    ReducedCurvature out;
    out.weight = w.value();
    out.k = to_coframe<4>(matrix_curvature<4>(b), cof);

    double sd = 0.0, offp = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const auto coords = curv::sigma_coords(out.k[i][j]);
            for (int s : {0, 1, 2}) sd = std::max(sd, coords[s].max_abs());
            for (int s : {0, 1, 2, 3, 5}) offp = std::max(offp, coords[s].max_abs());
        }
    }
    out.self_dual_residual = sd;
    out.off_pattern_residual = offp;

    double ym = (core.dec.psi[2] - core.dec.psip[2]).max_abs();
    for (int i = 0; i < 4; ++i) ym = std::max(ym, std::abs(jp.j[i]));
    out.yang_mills_residual = ym;
    out.yang_mills = ym < adapt_tol;
    return out;
}

BianchiReport bianchi_consistency(const CoframeSample& cof) {
    require_null4(cof);
    require_order(cof, 3, "bianchi_consistency");
    const Core core = make_core(cof);

    const int ord = cof.jet_order() - 3;
    const auto trunc1 = [&](const FormValue& f) { return f.truncated(ord); };
    const FormValue g11 = trunc1(core.conn.upper(0, 0));
    const FormValue g22 = trunc1(core.conn.upper(1, 1));
    const FormValue g12 = trunc1(core.conn.upper(0, 1));
    const FormValue g21 = trunc1(core.conn.upper(1, 0));
    const FormValue gd = g11 - g22;

    std::array<Jet, 5> psi;
    for (int k = 0; k < 5; ++k) psi[k] = core.dec.psi[k].truncated(ord);

    std::array<FormValue, 5> c;
    c[0] = (2.0 * psi[0]) * gd + (4.0 * psi[1]) * g21;
    c[1] = psi[1] * gd + psi[0] * g12 + (3.0 * psi[2]) * g21;
    c[2] = (2.0 * psi[1]) * g12 + (2.0 * psi[3]) * g21;
    c[3] = (-psi[3]) * gd + (3.0 * psi[2]) * g12 + psi[4] * g21;
    c[4] = (-2.0 * psi[4]) * gd + (4.0 * psi[3]) * g21;

    BianchiReport rep;
    for (int k = 0; k < 5; ++k) {
        const FormValue dpsi = forms::change_basis(
            forms::ext_d(FormValue::scalar(4, Basis::coordinate, core.dec.psi[k])), cof);
        const FormValue r = dpsi - c[k];
        for (int a = 0; a < 4; ++a) rep.coeff[k][a] = r.comp(a).value();
    }

    double cross = 0.0;
    for (int k = 0; k < 4; ++k) {
        cross = std::max(cross, std::abs(rep.coeff[k][1] - rep.coeff[k + 1][0]));
        cross = std::max(cross, std::abs(rep.coeff[k][2] + rep.coeff[k + 1][3]));
    }
    rep.cross_residual = cross;

    rep.dpsi2p =
        forms::ext_d(FormValue::scalar(4, Basis::coordinate, core.dec.psip[2])).max_abs();
    return rep;
}

double cartan_bianchi_residual(const CoframeSample& cof) {
    require_null4(cof);
    require_order(cof, 3, "cartan_bianchi_residual");
    const Core core = make_core(cof);
    const auto a = conn_a_entries(core, cof);
    const auto k = matrix_curvature<3>(a);

    const int ord = cof.jet_order() - 3;
    double resid = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            FormValue v = forms::ext_d(k[i][j]);
            for (int m = 0; m < 3; ++m) {
                v += forms::wedge(a[i][m].truncated(ord + 1), k[m][j].truncated(ord + 1))
                         .truncated(ord);
                v -= forms::wedge(k[i][m].truncated(ord + 1), a[m][j].truncated(ord + 1))
                         .truncated(ord);
            }
            resid = std::max(resid, v.max_abs());
        }
    }
    return resid;
}

forms::CoframeSample gauge_transform(const CoframeSample& cof, const Eigen::Matrix2d& a) {
    require_null4(cof);
    const double det = a.determinant();
    const double scale = a.cwiseAbs().maxCoeff();
    if (!(std::abs(det) > 1e-12 * std::max(1.0, scale * scale))) {
        throw ConfigError("gauge_transform: singular structure-group matrix");
    }
    const Eigen::Matrix2d it = a.inverse().transpose();

    CoframeSample out = cof;
    out.theta[0] = a(0, 0) * cof.theta[0] + a(0, 1) * cof.theta[1];
    out.theta[1] = a(1, 0) * cof.theta[0] + a(1, 1) * cof.theta[1];
    out.theta[2] = it(0, 0) * cof.theta[2] + it(0, 1) * cof.theta[3];
    out.theta[3] = it(1, 0) * cof.theta[2] + it(1, 1) * cof.theta[3];

    Eigen::Matrix4d t = Eigen::Matrix4d::Zero();
    t.block<2, 2>(0, 0) = a;
    t.block<2, 2>(2, 2) = it;
    const Eigen::JacobiSVD<Eigen::Matrix4d> svd(t);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    out.cond_bound = cof.cond_bound * (smax / smin);
    return out;
}

}  // namespace pk::pke

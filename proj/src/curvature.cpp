#include "pk/curvature.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "pk/errors.hpp"

namespace pk::curv {

namespace {

// Signed position of the unordered pair {a, b} in the a<b pair list.
struct PairRef {
    int pos;
    double sign;
};

PairRef pair_ref(const forms::FormTable& t2, int a, int b) {
    if (a == b) return {-1, 0.0};
    uint8_t m = static_cast<uint8_t>((1u << a) | (1u << b));
    return {t2.pos[m], a < b ? 1.0 : -1.0};
}

void check_coframe(const forms::CoframeSample& cof) {
    if (cof.n < 2 || cof.n > 5 || static_cast<int>(cof.theta.size()) != cof.n)
        throw ConfigError("coframe needs n 1-forms, n in 2..5");
    if (cof.g.rows() != cof.n || cof.g.cols() != cof.n)
        throw ConfigError("coframe metric must be n x n");
    if ((cof.g - cof.g.transpose()).cwiseAbs().maxCoeff() != 0.0)
        throw ConfigError("coframe metric must be symmetric");
    for (const auto& th : cof.theta) {
        if (!th.valid() || th.degree() != 1 || th.basis() != forms::Basis::coordinate ||
            th.n() != cof.n)
            throw ConfigError("coframe entries must be coordinate-basis 1-forms");
    }
}

Eigen::MatrixXd metric_inverse(const Eigen::MatrixXd& g) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
    if (!lu.isInvertible()) throw ConfigError("coframe metric is singular");
    return lu.inverse();
}

}  // namespace

forms::FormValue Connection::lowered(int a, int b) const {
    const auto& t2 = forms::FormTable::get(n, 2);
    auto [pos, sign] = pair_ref(t2, a, b);
    if (pos < 0)
        return forms::FormValue::zero(n, 1, forms::Basis::coframe, lower[0].jet_dim(),
                                      lower[0].jet_order());
    if (sign > 0) return lower[pos];
    return -lower[pos];
}

forms::FormValue Connection::upper(int a, int b) const {
    forms::FormValue out = forms::FormValue::zero(n, 1, forms::Basis::coframe,
                                                  lower[0].jet_dim(), lower[0].jet_order());
    for (int c = 0; c < n; ++c) {
        if (ginv(a, c) == 0.0) continue;
        out.add_scaled(ginv(a, c), lowered(c, b));
    }
    return out;
}

Connection solve_levi_civita(const forms::CoframeSample& cof, bool linear_solve_check) {
    check_coframe(cof);
    cof.require_invertible();
    const int n = cof.n;
    const auto& t2 = forms::FormTable::get(n, 2);
    const int np = t2.count;
    Eigen::MatrixXd ginv = metric_inverse(cof.g);

    // d theta^a in the coframe basis: d theta^a = sum_{b<c} D^a_bc theta^b ^ theta^c.
    std::vector<forms::FormValue> dtheta(n);
    for (int a = 0; a < n; ++a)
        dtheta[a] = forms::change_basis(forms::ext_d(cof.theta[a]), cof);
    const int jdim = dtheta[0].jet_dim();
    const int jord = dtheta[0].jet_order();

    auto d_up = [&](int a, int b, int c) {
        auto [pos, sign] = pair_ref(t2, b, c);
        jets::Jet out = jets::Jet::constant(jdim, jord, 0.0);
        if (pos >= 0) out.accumulate(sign, dtheta[a].comp(pos));
        return out;
    };
    // Lowered coefficients D_abc = g_au D^u_bc, stored for b<c.
    std::vector<std::vector<jets::Jet>> dlow(n, std::vector<jets::Jet>(np));
    for (int a = 0; a < n; ++a)
        for (int p = 0; p < np; ++p) {
            jets::Jet s = jets::Jet::constant(jdim, jord, 0.0);
            for (int u = 0; u < n; ++u) {
                if (cof.g(a, u) == 0.0) continue;
                s.accumulate(cof.g(a, u), dtheta[u].comp(p));
            }
            dlow[a][p] = s;
        }
    auto d_low = [&](int a, int b, int c) {
        auto [pos, sign] = pair_ref(t2, b, c);
        jets::Jet out = jets::Jet::constant(jdim, jord, 0.0);
        if (pos >= 0) out.accumulate(sign, dlow[a][pos]);
        return out;
    };

    // Index-cyclic solution of the torsion-free metric connection:
    //   2 Gamma_abc = D_abc + D_bca - D_cab.
    Connection conn;
    conn.n = n;
    conn.g = cof.g;
    conn.ginv = ginv;
    conn.lower.resize(np);
    for (int p = 0; p < np; ++p) {
        int a = std::countr_zero(static_cast<unsigned>(t2.mask[p]));
        int b = std::countr_zero(static_cast<unsigned>(t2.mask[p]) & (t2.mask[p] - 1u));
        forms::FormValue form =
            forms::FormValue::zero(n, 1, forms::Basis::coframe, jdim, jord);
        for (int c = 0; c < n; ++c) {
            jets::Jet gam = d_low(a, b, c);
            gam += d_low(b, c, a);
            gam -= d_low(c, a, b);
            gam *= 0.5;
            form.comp(c) = gam;
        }
        conn.lower[p] = form;
    }

    if (linear_solve_check) {
        // Same system as a dense solve on component values: unknowns
        // x[p*n + c] = Gamma_{(pair p) c}, equations from the torsion
        // condition Gamma^a_bc - Gamma^a_cb = D^a_bc for each a and b<c.
        const int nu = np * n;
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nu, nu);
        Eigen::VectorXd rhs(nu);
        for (int a = 0; a < n; ++a)
            for (int p = 0; p < np; ++p) {
                int bb = std::countr_zero(static_cast<unsigned>(t2.mask[p]));
                int cc = std::countr_zero(static_cast<unsigned>(t2.mask[p]) & (t2.mask[p] - 1u));
                int row = a * np + p;
                for (int u = 0; u < n; ++u) {
                    if (ginv(a, u) == 0.0) continue;
                    auto rb = pair_ref(t2, u, bb);
                    if (rb.pos >= 0) A(row, rb.pos * n + cc) += ginv(a, u) * rb.sign;
                    auto rc = pair_ref(t2, u, cc);
                    if (rc.pos >= 0) A(row, rc.pos * n + bb) -= ginv(a, u) * rc.sign;
                }
                rhs(row) = d_up(a, bb, cc).value();
            }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (!lu.isInvertible())
            throw ConventionError("connection component system is singular");
        Eigen::VectorXd x = lu.solve(rhs);
        double worst = 0.0;
        for (int p = 0; p < np; ++p)
            for (int c = 0; c < n; ++c)
                worst = std::max(worst,
                                 std::abs(x(p * n + c) - conn.lower[p].comp(c).value()));
        if (worst > 1e-9)
            throw ConventionError("cyclic formula and linear solve disagree by " +
                                  std::to_string(worst));
    }
    return conn;
}

double torsion_residual(const Connection& conn, const forms::CoframeSample& cof) {
    const int n = conn.n;
    const int jdim = cof.jet_dim();
    const int jord = conn.jet_order();
    double worst = 0.0;
    for (int a = 0; a < n; ++a) {
        forms::FormValue res = forms::change_basis(forms::ext_d(cof.theta[a]), cof);
        for (int b = 0; b < n; ++b) {
            forms::FormValue th = forms::FormValue::unit(n, b, forms::Basis::coframe, jdim, jord);
            res += forms::wedge(conn.upper(a, b), th);
        }
        worst = std::max(worst, res.max_abs());
    }
    return worst;
}

jets::Jet Riemann::low(int a, int b, int c, int d) const {
    jets::Jet out = jets::Jet::constant(jet_dim, jet_order, 0.0);
    for (int e = 0; e < n; ++e) {
        if (g(a, e) == 0.0) continue;
        out.accumulate(g(a, e), up(e, b, c, d));
    }
    return out;
}

jets::Jet Riemann::ricci(int a, int b) const {
    jets::Jet out = jets::Jet::constant(jet_dim, jet_order, 0.0);
    for (int c = 0; c < n; ++c) out += up(c, a, c, b);
    return out;
}

jets::Jet Riemann::scalar() const {
    jets::Jet out = jets::Jet::constant(jet_dim, jet_order, 0.0);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (ginv(a, b) == 0.0) continue;
            out.accumulate(ginv(a, b), ricci(a, b));
        }
    return out;
}

Riemann riemann(const Connection& conn, const forms::CoframeSample& cof) {
    const int n = conn.n;
    const int k1 = conn.jet_order();
    if (k1 < 1)
        throw OrderBudget("jet order budget exhausted: curvature needs one order beyond "
                          "the connection");
    const auto& t2 = forms::FormTable::get(n, 2);

    std::vector<forms::FormValue> up(n * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) up[a * n + b] = conn.upper(a, b);

    Riemann r;
    r.n = n;
    r.jet_dim = cof.jet_dim();
    r.jet_order = k1 - 1;
    r.g = conn.g;
    r.ginv = conn.ginv;
    r.comp.assign(static_cast<size_t>(n) * n * n * n,
                  jets::Jet::constant(r.jet_dim, r.jet_order, 0.0));

    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            forms::FormValue curv = forms::change_basis(
                forms::ext_d(forms::change_basis(up[a * n + b], cof)), cof);
            for (int c = 0; c < n; ++c)
                curv += forms::wedge(up[a * n + c].truncated(k1 - 1),
                                     up[c * n + b].truncated(k1 - 1));
            // curv = 1/2 R^a_bcd theta^c ^ theta^d, so the c<d component is
            // R^a_bcd itself.
            for (int p = 0; p < t2.count; ++p) {
                int d = std::countr_zero(static_cast<unsigned>(t2.mask[p]));
                int c = std::countr_zero(static_cast<unsigned>(t2.mask[p]) & (t2.mask[p] - 1u));
                // mask bits sorted ascending: d is the lower index here.
                r.up(a, b, d, c) = curv.comp(p);
                jets::Jet neg = curv.comp(p);
                neg *= -1.0;
                r.up(a, b, c, d) = neg;
            }
        }
    return r;
}

double riemann_symmetry_residual(const Riemann& r) {
    const int n = r.n;
    double worst = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    jets::Jet t = r.up(a, b, c, d);
                    t += r.up(a, b, d, c);
                    worst = std::max(worst, t.max_abs());

                    jets::Jet fb = r.up(a, b, c, d);
                    fb += r.up(a, c, d, b);
                    fb += r.up(a, d, b, c);
                    worst = std::max(worst, fb.max_abs());

                    jets::Jet lo = r.low(a, b, c, d);
                    jets::Jet sw = lo;
                    sw += r.low(b, a, c, d);
                    worst = std::max(worst, sw.max_abs());

                    jets::Jet pr = lo;
                    pr -= r.low(c, d, a, b);
                    worst = std::max(worst, pr.max_abs());
                }
    return worst;
}

namespace {

// Columns of S express the sigma basis through the theta^a ^ theta^b (a<b)
// components, in the operator ordering (s1+, s3+, s2+, s1-, s3-, s2-).
Eigen::MatrixXd sigma_matrix_operator_order(int jdim) {
    Eigen::MatrixXd S(6, 6);
    const forms::FormValue cols[6] = {
        forms::sigma_plus(1, jdim, 0),  forms::sigma_plus(3, jdim, 0),
        forms::sigma_plus(2, jdim, 0),  forms::sigma_minus(1, jdim, 0),
        forms::sigma_minus(3, jdim, 0), forms::sigma_minus(2, jdim, 0)};
    for (int j = 0; j < 6; ++j)
        for (int p = 0; p < 6; ++p) S(p, j) = cols[j].comp(p).value();
    return S;
}

using JetMat6 = std::array<std::array<jets::Jet, 6>, 6>;

JetMat6 jet_mat6(int jdim, int jord) {
    JetMat6 m;
    for (auto& row : m)
        for (auto& e : row) e = jets::Jet::constant(jdim, jord, 0.0);
    return m;
}

// out = L * M * R with constant L, R.
JetMat6 sandwich(const Eigen::MatrixXd& L, const JetMat6& M, const Eigen::MatrixXd& R,
                 int jdim, int jord) {
    JetMat6 out = jet_mat6(jdim, jord);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            for (int r = 0; r < 6; ++r) {
                if (L(i, r) == 0.0) continue;
                for (int q = 0; q < 6; ++q) {
                    if (R(q, j) == 0.0) continue;
                    out[i][j].accumulate(L(i, r) * R(q, j), M[r][q]);
                }
            }
    return out;
}

}  // namespace

Decomp decompose(const Riemann& riem, const forms::CoframeSample& cof) {
    if (riem.n != 4) throw ConfigError("curvature decomposition needs dimension 4");
    if ((riem.g - forms::null_metric4()).cwiseAbs().maxCoeff() != 0.0)
        throw ConfigError("curvature decomposition needs the null coframe metric");
    if ((riem.g - cof.g).cwiseAbs().maxCoeff() != 0.0)
        throw ConfigError("curvature and coframe samples use different metrics");
    const int n = 4;
    const int jdim = riem.jet_dim;
    const int jord = riem.jet_order;
    const auto& t2 = forms::FormTable::get(4, 2);

    Decomp dec;
    jets::Jet ric[4][4];
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) ric[a][b] = riem.ricci(a, b);
    dec.R = riem.scalar();
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            jets::Jet p = ric[a][b];
            p *= 0.5;
            p.accumulate(-riem.g(a, b) / 12.0, dec.R);
            dec.P[a][b] = p;
        }

    // Weyl part, all indices lowered:
    //   C_abcd = R_abcd + g_ad P_cb - g_ac P_db + g_bc P_da - g_bd P_ca.
    std::vector<jets::Jet> cl(static_cast<size_t>(n) * n * n * n);
    auto cw_low = [&](int a, int b, int c, int d) -> jets::Jet& {
        return cl[((a * n + b) * n + c) * n + d];
    };
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    jets::Jet e = riem.low(a, b, c, d);
                    if (riem.g(a, d) != 0.0) e.accumulate(riem.g(a, d), dec.P[c][b]);
                    if (riem.g(a, c) != 0.0) e.accumulate(-riem.g(a, c), dec.P[d][b]);
                    if (riem.g(b, c) != 0.0) e.accumulate(riem.g(b, c), dec.P[d][a]);
                    if (riem.g(b, d) != 0.0) e.accumulate(-riem.g(b, d), dec.P[c][a]);
                    cw_low(a, b, c, d) = e;
                }

    // Weyl scalars from pinned lowered components (indices 0-based).
    dec.psi[4] = cw_low(1, 2, 1, 2);
    dec.psi[3] = cw_low(0, 2, 1, 2);
    dec.psi[2] = cw_low(0, 3, 1, 2);
    dec.psi[2] *= -1.0;
    dec.psi[1] = cw_low(1, 3, 0, 3);
    dec.psi[0] = cw_low(0, 3, 0, 3);
    dec.psip[4] = cw_low(0, 1, 0, 1);
    dec.psip[3] = cw_low(0, 1, 0, 2);
    dec.psip[2] = cw_low(0, 1, 2, 3);
    dec.psip[1] = cw_low(0, 2, 2, 3);
    dec.psip[0] = cw_low(2, 3, 2, 3);

    // Second path: the matrix of the curvature operator on 2-forms,
    // Riemann(theta^a ^ theta^b) = 1/2 R^{ab}_cd theta^c ^ theta^d, written
    // in the (s1+, s3+, s2+, s1-, s3-, s2-) basis, must reproduce the same
    // scalars in the block pattern
    //   [ W+            Ric blocks ]           R
    //   [ Ric blocks    W-         ]   +  1/12 R  id.
    JetMat6 T = jet_mat6(jdim, jord);
    for (int q = 0; q < 6; ++q) {
        int b = std::countr_zero(static_cast<unsigned>(t2.mask[q]));
        int a = std::countr_zero(static_cast<unsigned>(t2.mask[q]) & (t2.mask[q] - 1u));
        std::swap(a, b);  // mask bits ascending: a < b
        for (int r = 0; r < 6; ++r) {
            int d = std::countr_zero(static_cast<unsigned>(t2.mask[r]));
            int c = std::countr_zero(static_cast<unsigned>(t2.mask[r]) & (t2.mask[r] - 1u));
            std::swap(c, d);
            // R^{ab}_cd = g^{bf} R^a_fcd.
            jets::Jet e = jets::Jet::constant(jdim, jord, 0.0);
            for (int f = 0; f < n; ++f) {
                if (riem.ginv(b, f) == 0.0) continue;
                e.accumulate(riem.ginv(b, f), riem.up(a, f, c, d));
            }
            T[r][q] = e;
        }
    }
    Eigen::MatrixXd S = sigma_matrix_operator_order(jdim);
    Eigen::MatrixXd Sinv = S.inverse();
    JetMat6 Mdir = sandwich(Sinv, T, S, jdim, jord);

    JetMat6 Mmod = jet_mat6(jdim, jord);
    auto set2 = [&](int i, int j, const jets::Jet& v, double s) {
        Mmod[i][j] = v;
        Mmod[i][j] *= s;
    };
    // Self-dual Weyl block.
    set2(0, 0, dec.psip[2], 1.0);
    set2(0, 1, dec.psip[3], -2.0);
    set2(0, 2, dec.psip[4], 1.0);
    set2(1, 0, dec.psip[1], 1.0);
    set2(1, 1, dec.psip[2], -2.0);
    set2(1, 2, dec.psip[3], 1.0);
    set2(2, 0, dec.psip[0], 1.0);
    set2(2, 1, dec.psip[1], -2.0);
    set2(2, 2, dec.psip[2], 1.0);
    // Anti-self-dual Weyl block.
    set2(3, 3, dec.psi[2], 1.0);
    set2(3, 4, dec.psi[1], 2.0);
    set2(3, 5, dec.psi[0], 1.0);
    set2(4, 3, dec.psi[3], -1.0);
    set2(4, 4, dec.psi[2], -2.0);
    set2(4, 5, dec.psi[1], -1.0);
    set2(5, 3, dec.psi[4], 1.0);
    set2(5, 4, dec.psi[3], 2.0);
    set2(5, 5, dec.psi[2], 1.0);
    // Traceless Ricci blocks (P entries 0-based).
    set2(0, 3, dec.P[1][1], 1.0);
    set2(0, 4, dec.P[0][1], 2.0);
    set2(0, 5, dec.P[0][0], 1.0);
    set2(1, 3, dec.P[1][2], 1.0);
    Mmod[1][4] = dec.P[0][2];
    Mmod[1][4] -= dec.P[1][3];
    set2(1, 5, dec.P[0][3], -1.0);
    set2(2, 3, dec.P[2][2], 1.0);
    set2(2, 4, dec.P[2][3], -2.0);
    set2(2, 5, dec.P[3][3], 1.0);
    set2(3, 0, dec.P[3][3], 1.0);
    set2(3, 1, dec.P[0][3], 2.0);
    set2(3, 2, dec.P[0][0], 1.0);
    set2(4, 0, dec.P[2][3], 1.0);
    Mmod[4][1] = dec.P[0][2];
    Mmod[4][1] -= dec.P[1][3];
    set2(4, 2, dec.P[0][1], -1.0);
    set2(5, 0, dec.P[2][2], 1.0);
    set2(5, 1, dec.P[1][2], -2.0);
    set2(5, 2, dec.P[1][1], 1.0);
    // Scalar part on the diagonal.
    for (int i = 0; i < 6; ++i) Mmod[i][i].accumulate(1.0 / 12.0, dec.R);

    double cross = 0.0;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            jets::Jet diff = Mdir[i][j];
            diff -= Mmod[i][j];
            cross = std::max(cross, diff.max_abs());
        }
    dec.cross_residual = cross;
    if (cross > 1e-9)
        throw ConventionError("sigma-basis curvature matrix disagrees with component "
                              "extraction by " +
                              std::to_string(cross));

    // Rebuild the full tensor from the extracted scalars and compare.
    JetMat6 Tmod = sandwich(S, Mmod, Sinv, jdim, jord);
    double recon = 0.0;
    for (int a = 0; a < n; ++a)
        for (int f = 0; f < n; ++f)
            for (int r = 0; r < 6; ++r) {
                int d = std::countr_zero(static_cast<unsigned>(t2.mask[r]));
                int c = std::countr_zero(static_cast<unsigned>(t2.mask[r]) & (t2.mask[r] - 1u));
                std::swap(c, d);
                jets::Jet rebuilt = jets::Jet::constant(jdim, jord, 0.0);
                for (int b = 0; b < n; ++b) {
                    if (riem.g(f, b) == 0.0) continue;
                    auto ref = pair_ref(t2, a, b);
                    if (ref.pos < 0) continue;
                    rebuilt.accumulate(riem.g(f, b) * ref.sign, Tmod[r][ref.pos]);
                }
                rebuilt -= riem.up(a, f, c, d);
                recon = std::max(recon, rebuilt.max_abs());
            }
    dec.recon_residual = recon;
    if (recon > 1e-9)
        throw ConventionError("curvature rebuilt from extracted scalars disagrees by " +
                              std::to_string(recon));
    return dec;
}

std::array<jets::Jet, 6> sigma_coords(const forms::FormValue& omega) {
    if (!omega.valid() || omega.n() != 4 || omega.degree() != 2 ||
        omega.basis() != forms::Basis::coframe)
        throw ConfigError("sigma coordinates need a coframe-basis 2-form in dimension 4");
    const int jdim = omega.jet_dim();
    Eigen::MatrixXd S(6, 6);
    const forms::FormValue cols[6] = {
        forms::sigma_plus(1, jdim, 0),  forms::sigma_plus(2, jdim, 0),
        forms::sigma_plus(3, jdim, 0),  forms::sigma_minus(1, jdim, 0),
        forms::sigma_minus(2, jdim, 0), forms::sigma_minus(3, jdim, 0)};
    for (int j = 0; j < 6; ++j)
        for (int p = 0; p < 6; ++p) S(p, j) = cols[j].comp(p).value();
    Eigen::MatrixXd Sinv = S.inverse();
    std::array<jets::Jet, 6> out;
    for (int i = 0; i < 6; ++i) {
        jets::Jet e = jets::Jet::constant(jdim, omega.jet_order(), 0.0);
        for (int p = 0; p < 6; ++p) {
            if (Sinv(i, p) == 0.0) continue;
            e.accumulate(Sinv(i, p), omega.comp(p));
        }
        out[i] = e;
    }
    return out;
}

jets::Jet Curvature5::weyl_low(int a, int b, int c, int d) const {
    jets::Jet out = jets::Jet::constant(riem.jet_dim, riem.jet_order, 0.0);
    for (int e = 0; e < 5; ++e) {
        if (riem.g(a, e) == 0.0) continue;
        out.accumulate(riem.g(a, e), weyl_up(e, b, c, d));
    }
    return out;
}

Curvature5 solve_levi_civita_5d(const forms::CoframeSample& cof) {
    if (cof.n != 5) throw ConfigError("five-dimensional curvature needs n = 5");
    Curvature5 out;
    out.conn = solve_levi_civita(cof);
    out.riem = riemann(out.conn, cof);
    const int n = 5;

    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) out.ric[a][b] = out.riem.ricci(a, b);
    out.R = out.riem.scalar();
    // Dimension-5 Schouten: P = (Ric - R g / 8) / 3.
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            jets::Jet p = out.ric[a][b];
            p.accumulate(-out.riem.g(a, b) / 8.0, out.R);
            p *= 1.0 / 3.0;
            out.P[a][b] = p;
        }
    // Lowered Weyl part first, C_abcd = R_abcd + g_ad P_cb - g_ac P_db
    // + g_bc P_da - g_bd P_ca, then the first index is raised for storage.
    std::vector<jets::Jet> cl(out.riem.comp.size());
    auto low_at = [&](int a, int b, int c, int d) -> jets::Jet& {
        return cl[((a * n + b) * n + c) * n + d];
    };
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    jets::Jet e = out.riem.low(a, b, c, d);
                    if (out.riem.g(a, d) != 0.0) e.accumulate(out.riem.g(a, d), out.P[c][b]);
                    if (out.riem.g(a, c) != 0.0) e.accumulate(-out.riem.g(a, c), out.P[d][b]);
                    if (out.riem.g(b, c) != 0.0) e.accumulate(out.riem.g(b, c), out.P[d][a]);
                    if (out.riem.g(b, d) != 0.0) e.accumulate(-out.riem.g(b, d), out.P[c][a]);
                    low_at(a, b, c, d) = e;
                }
    out.weyl.assign(cl.size(),
                    jets::Jet::constant(out.riem.jet_dim, out.riem.jet_order, 0.0));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    jets::Jet& e = out.weyl[((a * n + b) * n + c) * n + d];
                    for (int u = 0; u < n; ++u) {
                        if (out.riem.ginv(a, u) == 0.0) continue;
                        e.accumulate(out.riem.ginv(a, u), low_at(u, b, c, d));
                    }
                }
    return out;
}

}  // namespace pk::curv

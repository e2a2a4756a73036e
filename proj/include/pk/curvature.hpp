#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "pk/forms.hpp"
#include "pk/jets.hpp"

namespace pk::curv {

// Metric-compatible connection in a constant-coefficient coframe.  Stored
// through the lowered forms Gamma_ab = g_ac Gamma^c_b, which metricity makes
// antisymmetric; only the a<b entries are kept, so metricity holds exactly
// by construction.
struct Connection {
    int n = 0;
    std::vector<forms::FormValue> lower;  // coframe-basis 1-forms, pair order of FormTable(n,2)
    Eigen::MatrixXd g;
    Eigen::MatrixXd ginv;

    // Gamma_ab for any index pair (signed lookup into the a<b storage).
    forms::FormValue lowered(int a, int b) const;
    // Gamma^a_b = g^{ac} Gamma_cb.
    forms::FormValue upper(int a, int b) const;

    int jet_order() const { return lower.empty() ? 0 : lower[0].jet_order(); }
};

// Solves the first structure equations
//   d theta^a + Gamma^a_b ^ theta^b = 0,   g_ac Gamma^c_b + g_bc Gamma^c_a = 0
// by the index-cyclic formula on the structure coefficients of d theta^a.
// Consumes one jet order.  With `linear_solve_check` set, the same system is
// also solved as a dense linear system on component values and a disagreement
// beyond 1e-9 throws ConventionError.
Connection solve_levi_civita(const forms::CoframeSample& cof, bool linear_solve_check = false);

// Largest coefficient of d theta^a + Gamma^a_b ^ theta^b over all a.
double torsion_residual(const Connection& conn, const forms::CoframeSample& cof);

// Curvature tensor R^a_bcd extracted from the second structure equations
//   d Gamma^a_b + Gamma^a_c ^ Gamma^c_b = 1/2 R^a_bcd theta^c ^ theta^d.
struct Riemann {
    int n = 0;
    int jet_dim = 0;
    int jet_order = 0;
    Eigen::MatrixXd g;
    Eigen::MatrixXd ginv;
    std::vector<jets::Jet> comp;  // R^a_bcd, index ((a*n+b)*n+c)*n+d

    const jets::Jet& up(int a, int b, int c, int d) const {
        return comp[((a * n + b) * n + c) * n + d];
    }
    jets::Jet& up(int a, int b, int c, int d) {
        return comp[((a * n + b) * n + c) * n + d];
    }
    // R_abcd = g_ae R^e_bcd.
    jets::Jet low(int a, int b, int c, int d) const;

    jets::Jet ricci(int a, int b) const;  // R_ab = R^c_acb
    jets::Jet scalar() const;             // R = g^ab R_ab
};

// Consumes one more jet order.
Riemann riemann(const Connection& conn, const forms::CoframeSample& cof);

// Largest violation among: antisymmetry in the last pair, antisymmetry in
// the first pair after lowering, pair symmetry R_abcd = R_cdab, and the
// first Bianchi identity R^a_[bcd] = 0.
double riemann_symmetry_residual(const Riemann& r);

// Pointwise curvature decomposition of a 4d null-coframe metric.
//
// psi[i] and psip[i] are the anti-self-dual and self-dual Weyl components
// read from the lowered Weyl tensor (psi4 = C2323, psi3 = C1323,
// psi2 = -C1423, psi1 = C2414, psi0 = C1414; primed: psi4' = C1212,
// psi3' = C1213, psi2' = C1234, psi1' = C1334, psi0' = C3434, all 1-based).
// P is the Schouten tensor P_ab = R_ab/2 - R g_ab/12 and R the scalar
// curvature.  cross_residual compares this extraction against the 6x6
// matrix of the curvature operator on the sigma basis; recon_residual
// rebuilds the full tensor from the extracted scalars and compares.  Both
// must stay below 1e-9 or the decomposition throws ConventionError.
struct Decomp {
    std::array<jets::Jet, 5> psi;
    std::array<jets::Jet, 5> psip;
    jets::Jet P[4][4];
    jets::Jet R;
    double cross_residual = 0.0;
    double recon_residual = 0.0;
};

Decomp decompose(const Riemann& riem, const forms::CoframeSample& cof);

// Coordinates of a coframe-basis 2-form in the basis
// (sigma1+, sigma2+, sigma3+, sigma1-, sigma2-, sigma3-).
std::array<jets::Jet, 6> sigma_coords(const forms::FormValue& omega);

// Five-dimensional curvature package: Levi-Civita connection of the
// constant-coefficient metric cof.g, curvature, Ricci, Schouten
// P = (Ric - R g/8)/3, and the Weyl tensor of the standard
// dimension-5 decomposition.
struct Curvature5 {
    Connection conn;
    Riemann riem;
    std::vector<jets::Jet> weyl;  // C^a_bcd, same layout as Riemann::comp
    jets::Jet ric[5][5];
    jets::Jet P[5][5];
    jets::Jet R;

    const jets::Jet& weyl_up(int a, int b, int c, int d) const {
        return weyl[((a * 5 + b) * 5 + c) * 5 + d];
    }
    // C_abcd = g_ae C^e_bcd.
    jets::Jet weyl_low(int a, int b, int c, int d) const;
};

Curvature5 solve_levi_civita_5d(const forms::CoframeSample& cof);

}  // namespace pk::curv

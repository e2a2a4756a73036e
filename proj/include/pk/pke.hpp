#pragma once

#include <array>
#include <span>

#include <Eigen/Core>

#include "pk/catalog.hpp"
#include "pk/curvature.hpp"
#include "pk/forms.hpp"

// Certification and gauge-theoretic invariants of para-Kahler-Einstein
// coframes: axiom residual reports, the trace-free 3x3 connection matrix and
// its curvature, the anti-self-duality (Yang-Mills) test, reduced-connection
// coefficient extraction on adapted families, the weighted block-diagonal
// reduced connection and its curvature, and differential consistency checks
// of the curvature coefficients.
//
// Every entry point requires the 4d split null coframe metric (ConfigError
// otherwise) and a minimum jet order (OrderBudget otherwise).
namespace pk::pke {

// Residuals certifying the para-Kahler-Einstein axioms at one sample, or the
// entrywise maxima over a batch.  All residuals are max-abs over full jets.
struct PkeReport {
    double gamma14 = 0.0;          // corner connection form Gamma^1_4
    double gamma41 = 0.0;          // corner connection form Gamma^4_1
    double drho = 0.0;             // d(theta^1^theta^3 + theta^2^theta^4)
    double ricci_tracefree = 0.0;  // Ric - (R/4) g
    double scalar_residual = 0.0;  // R + 12 psi2p
    double weyl_sd_off = 0.0;      // self-dual Weyl outside its middle slot
    double psi2p = 0.0;            // middle self-dual coefficient (value)
    // First-derivative coefficients of psi2p; available from jet order 3.
    double psi2p_variation = 0.0;
    bool psi2p_variation_checked = false;
    // Max |psi2p - batch mean| over a batch; 0 for a single sample.
    double psi2p_spread = 0.0;

    // Largest certification residual (excludes psi2p and psi2p_spread).
    double max_residual() const;
};

// Requires jet order >= 2; the psi2p constancy check runs from order 3.
PkeReport verify_pke(const forms::CoframeSample& cof);
PkeReport verify_pke(std::span<const forms::CoframeSample> batch);

// Trace-free 3x3 matrix of 1-forms: the metric connection block bordered by
// the coframe legs, with a third of the block trace removed from the
// diagonal.  Entries are coordinate-basis 1-forms at one order below the
// coframe.
struct CartanConnA {
    std::array<std::array<forms::FormValue, 3>, 3> a;
    double trace_residual = 0.0;  // max-abs of the entry sum a00+a11+a22
};

// Requires jet order >= 1.
CartanConnA cartan_connection_a(const forms::CoframeSample& cof);

// Curvature K = dA + A^A of the trace-free connection matrix, expanded in
// the coframe basis, two orders below the coframe.
struct CartanCurvature {
    std::array<std::array<forms::FormValue, 3>, 3> k;
    // Worst entrywise gap to the expansion of K in the invariant 2-form
    // triples with curvature-coefficient weights.
    double closed_form_residual = 0.0;
    // Worst entrywise defect of rebuilding an entry from its six invariant
    // 2-form coordinates.
    double semibasic_residual = 0.0;
    double trace_residual = 0.0;  // max-abs of the entry sum k00+k11+k22
    double max_abs() const;       // largest entry max-abs
};

// Cross-checks the computed curvature entrywise against its expansion in
// curvature coefficients and throws ConventionError beyond check_tol.  The
// input must satisfy the para-Kahler-Einstein axioms (see verify_pke): on
// such input a mismatch can only be a sign or convention defect.  Requires
// jet order >= 2.
CartanCurvature curvature_a(const forms::CoframeSample& cof,
                            double check_tol = 1e-8);

// Anti-self-duality test of the connection-matrix curvature.
struct YangMillsA {
    bool yang_mills = false;
    double asd_residual = 0.0;  // max entrywise |*K + K|
    double psi2p_gap = 0.0;     // |psi2p - 1|
};

// Requires jet order >= 2.  yang_mills is asd_residual < tol.
YangMillsA yang_mills_a(const forms::CoframeSample& cof, double tol = 1e-8);

// Connection coefficients read off the reduced slots of an adapted coframe.
// j[0..5] hold J1..J6: J1, J2 from the lower-left block form, J3..J6 from
// the upper-right one.  The torus-reduced families additionally determine a
// second-order coefficient J41 through two independent derivative routes.
struct JProfile {
    std::array<double, 6> j{};
    bool has_j41 = false;
    double j41 = 0.0;
    double j41_cross_residual = 0.0;  // gap between the two routes
    // Worst forbidden-slot or coefficient-pattern magnitude found while
    // checking adaptation; always <= adapt_tol on successful return.
    double adaptation_residual = 0.0;
};

// Families with a reduced connection profile: typeii_ym, typeiii, typen,
// homogeneous_d, typed_generic, typed_branch2, typed_branch3.  Throws
// NotAdapted for other families, or when a forbidden connection slot or the
// family's coefficient vanishing pattern exceeds adapt_tol.  Requires jet
// order >= 2.
JProfile extract_j(const forms::CoframeSample& cof, catalog::Family family,
                   double adapt_tol = 1e-8);

// Block-diagonal 4x4 reduced connection curvature.  Each 2x2 block pairs a
// half connection-diagonal with a coframe leg weighted by
// w = sqrt(1.5 |psi2p|).  Entries are coframe-basis 2-forms.
struct ReducedCurvature {
    std::array<std::array<forms::FormValue, 4>, 4> k;
    double weight = 0.0;  // w at the base point
    // Leakage of any entry into the self-dual 2-form triple.
    double self_dual_residual = 0.0;
    // Leakage outside the single anti-self-dual slot that the Yang-Mills
    // families populate.
    double off_pattern_residual = 0.0;
    // Algebraic Yang-Mills criterion: |psi2 - psi2p| and |J1..J4|.
    double yang_mills_residual = 0.0;
    bool yang_mills = false;
    double max_abs() const;  // largest entry max-abs
};

// Families admitting the reduction: typeii_ym, homogeneous_d, typed_generic,
// typed_branch2, typed_branch3; throws NotAdapted otherwise (adaptation is
// enforced through extract_j).  Requires jet order >= 2.
ReducedCurvature curvature_b(const forms::CoframeSample& cof,
                             catalog::Family family, double adapt_tol = 1e-8);

// Differential consistency of the five anti-self-dual curvature
// coefficients: the exterior derivative of each, minus its connection-form
// terms, leaves a coframe-component remainder row; consecutive rows must
// overlap (row k repeats entry 1 as entry 0 of row k+1 and entry 2 as minus
// entry 3 of row k+1), and the middle self-dual coefficient must be closed.
struct BianchiReport {
    // coeff[k][a]: coframe component a of remainder row k, as values.
    std::array<std::array<double, 4>, 5> coeff{};
    double cross_residual = 0.0;  // worst overlap-identity violation
    double dpsi2p = 0.0;          // max-abs of d(psi2p)
};

// Requires jet order >= 3.
BianchiReport bianchi_consistency(const forms::CoframeSample& cof);

// Max-abs residual of the exterior identity dK + A^K - K^A of the
// connection-matrix curvature.  Requires jet order >= 3.
double cartan_bianchi_residual(const forms::CoframeSample& cof);

// Constant structure-group change of coframe: the matrix a acts on the first
// coframe pair, its inverse transpose on the second, preserving the split
// null metric and the volume normalization.  Throws ConfigError on a
// singular matrix.
forms::CoframeSample gauge_transform(const forms::CoframeSample& cof,
                                     const Eigen::Matrix2d& a);

}  // namespace pk::pke

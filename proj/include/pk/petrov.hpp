#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <vector>

namespace pk::petrov {

enum class Side { anti_self_dual, self_dual };

// Real binary quartic W(lambda) = psi4 l^4 + 4 psi3 l^3 + 6 psi2 l^2
// + 4 psi1 l + psi0, treated projectively: vanishing leading coefficients
// put roots at lambda = infinity.
struct WeylQuartic {
    std::array<double, 5> psi{};  // psi[k] multiplies binom(4,k) lambda^k
    Side side = Side::anti_self_dual;

    double eval(double lambda) const;
};

// The ten real root types of a binary quartic.
enum class RootKind { Gr, Gc, Gcc, IIr, IIc, III, Dr, Dc, N, O };
const char* to_string(RootKind k);

struct ProjRoot {
    bool at_infinity = false;
    std::complex<double> z{0.0, 0.0};  // representative when finite
    int multiplicity = 0;
    bool real = true;
};

// Root type plus located roots.  When a clustering or zero-threshold
// decision sits inside the tolerance band, `uncertain` is set and alt_kind
// carries the competing classification; this is a result, not an error.
struct PetrovType {
    RootKind kind = RootKind::O;
    std::vector<ProjRoot> roots;  // empty for type O
    bool uncertain = false;
    RootKind alt_kind = RootKind::O;
};

// Root-type classification at a relative tolerance, tol in (0, 1e-2].
// Projective roots come from companion-matrix eigenvalues (infinity
// handled by degree deficiency) and are merged by single linkage in the
// chordal metric on the projective line, which is scale-free.  Type O
// means every |psi| < tol * ambient_scale; ambient_scale defaults to the
// quartic's own largest coefficient.  Roots of multiplicity k are only
// resolved to about eps^(1/k), so quartics expected to carry triple or
// quadruple roots want tol around 1e-3.
PetrovType classify(const WeylQuartic& q, double tol, double ambient_scale = 0.0);

// Coefficient transformation under a structure-group element acting on the
// coframe.  Anti-self-dual quartics pull back projectively with one power
// of det(A) removed, so a root at lambda0 moves to the root of the
// transformed quartic at A<lambda0>; self-dual coefficients are weighted
// scalars, psi'_k -> det(A)^(2-k) psi'_k.
WeylQuartic transform(const WeylQuartic& q, const Eigen::Matrix2d& A);

// Independent classification through exact rational arithmetic: square-free
// decomposition (Yun) for the multiplicity pattern and Sturm chains for
// root reality.  Every finite double is an exact rational, so no tolerance
// enters.  Reported roots carry multiplicity and reality but no location.
PetrovType oracle_classify(const WeylQuartic& q);

}  // namespace pk::petrov

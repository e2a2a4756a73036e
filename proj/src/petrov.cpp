#include "pk/petrov.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "pk/errors.hpp"

namespace pk::petrov {

namespace {

constexpr double kBinom[5] = {1.0, 4.0, 6.0, 4.0, 1.0};

// Relative threshold below which a leading coefficient is treated as an
// exact zero (a root at infinity).  Kept far below any classification
// tolerance: a merely small leading coefficient yields a huge finite root,
// which the chordal metric already places next to infinity.
constexpr double kLeadTrim = 1e-13;

struct HRoot {
    bool inf = false;
    std::complex<double> z{0.0, 0.0};
};

// Chordal distance between points of the projective line, computed on the
// unit representatives (1, z)/|(1, z)| and (0, 1).  Bounded by 1 and
// invariant under the choice of affine chart.
double chordal(const HRoot& u, const HRoot& v) {
    if (u.inf && v.inf) return 0.0;
    if (u.inf || v.inf) {
        const std::complex<double>& z = u.inf ? v.z : u.z;
        return 1.0 / std::sqrt(1.0 + std::norm(z));
    }
    double nu = std::sqrt(1.0 + std::norm(u.z));
    double nv = std::sqrt(1.0 + std::norm(v.z));
    return std::abs(u.z - v.z) / (nu * nv);
}

int uf_find(std::vector<int>& p, int i) {
    while (p[i] != i) {
        p[i] = p[p[i]];
        i = p[i];
    }
    return i;
}

struct Cluster {
    bool inf = false;
    std::complex<double> centroid{0.0, 0.0};
    int multiplicity = 0;
    bool real = true;
};

// Single-linkage merge of the projective roots at threshold t, then a
// reality call per cluster: a cluster is real when it is indistinguishable
// from its own conjugate at the same threshold.  Points at infinity are
// real outright.
std::vector<Cluster> cluster_at(const std::vector<HRoot>& roots, double t) {
    const int n = static_cast<int>(roots.size());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (chordal(roots[i], roots[j]) <= t)
                parent[uf_find(parent, i)] = uf_find(parent, j);

    std::vector<Cluster> out;
    std::vector<int> root_of(n, -1);
    for (int i = 0; i < n; ++i) {
        int r = uf_find(parent, i);
        int c = root_of[r];
        if (c < 0) {
            c = static_cast<int>(out.size());
            root_of[r] = c;
            out.push_back({});
        }
        Cluster& cl = out[c];
        ++cl.multiplicity;
        if (roots[i].inf)
            cl.inf = true;
        else
            cl.centroid += roots[i].z;
    }
    for (Cluster& cl : out) {
        if (cl.inf) {
            cl.centroid = {0.0, 0.0};
            cl.real = true;
            continue;
        }
        cl.centroid /= static_cast<double>(cl.multiplicity);
        HRoot c{false, cl.centroid};
        HRoot cc{false, std::conj(cl.centroid)};
        cl.real = chordal(c, cc) <= t;
        if (cl.real) cl.centroid.imag(0.0);
    }
    std::sort(out.begin(), out.end(), [](const Cluster& a, const Cluster& b) {
        if (a.multiplicity != b.multiplicity) return a.multiplicity > b.multiplicity;
        if (a.inf != b.inf) return a.inf < b.inf;
        if (a.centroid.real() != b.centroid.real()) return a.centroid.real() < b.centroid.real();
        return a.centroid.imag() < b.centroid.imag();
    });
    return out;
}

// Multiplicity pattern plus reality -> root type.  Entries are
// (multiplicity, real) per projective root; complex roots of a real
// quartic arrive in conjugate pairs, so mixed patterns cannot occur.
RootKind kind_from_entries(std::vector<std::pair<int, bool>> entries) {
    if (entries.empty()) return RootKind::O;
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<int> mults;
    int reals = 0;
    for (const auto& [m, re] : entries) {
        mults.push_back(m);
        if (re) ++reals;
    }
    if (mults == std::vector<int>{4}) return RootKind::N;
    if (mults == std::vector<int>{3, 1}) return RootKind::III;
    if (mults == std::vector<int>{2, 2}) return reals == 2 ? RootKind::Dr : RootKind::Dc;
    if (mults == std::vector<int>{2, 1, 1}) {
        int simple_reals = 0;
        for (const auto& [m, re] : entries)
            if (m == 1 && re) ++simple_reals;
        return simple_reals == 2 ? RootKind::IIr : RootKind::IIc;
    }
    if (mults == std::vector<int>{1, 1, 1, 1}) {
        if (reals == 4) return RootKind::Gr;
        if (reals == 2) return RootKind::Gc;
        return RootKind::Gcc;
    }
    // Chains produced by extreme linkage still sum to four; fold them onto
    // the nearest standard pattern by treating the largest cluster as the
    // repeated root.
    if (mults.size() == 1) return RootKind::N;
    if (mults.size() == 2) return mults[0] == 3 ? RootKind::III : RootKind::Dr;
    return RootKind::IIr;
}

std::vector<HRoot> projective_roots(const std::array<double, 5>& psi) {
    double a[5];
    for (int k = 0; k < 5; ++k) a[k] = kBinom[k] * psi[k];
    double amax = 0.0;
    for (double c : a) amax = std::max(amax, std::abs(c));

    int deg = 4;
    int m_inf = 0;
    while (deg > 0 && std::abs(a[deg]) <= kLeadTrim * amax) {
        --deg;
        ++m_inf;
    }

    std::vector<HRoot> roots;
    for (int i = 0; i < m_inf; ++i) roots.push_back({true, {0.0, 0.0}});
    if (deg >= 1) {
        Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
        for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
        for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -a[i] / a[deg];
        Eigen::EigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
        if (es.info() != Eigen::Success)
            throw Error("companion eigenvalue iteration failed");
        for (int i = 0; i < deg; ++i) roots.push_back({false, es.eigenvalues()(i)});
    }
    return roots;
}

PetrovType typed_at(const std::vector<HRoot>& hroots, double t) {
    std::vector<Cluster> clusters = cluster_at(hroots, t);
    std::vector<std::pair<int, bool>> entries;
    PetrovType out;
    for (const Cluster& c : clusters) {
        entries.emplace_back(c.multiplicity, c.real);
        ProjRoot r;
        r.at_infinity = c.inf;
        r.z = c.centroid;
        r.multiplicity = c.multiplicity;
        r.real = c.real;
        out.roots.push_back(r);
    }
    out.kind = kind_from_entries(std::move(entries));
    return out;
}

}  // namespace

double WeylQuartic::eval(double lambda) const {
    // Horner on the expanded coefficients.
    double acc = kBinom[4] * psi[4];
    for (int k = 3; k >= 0; --k) acc = acc * lambda + kBinom[k] * psi[k];
    return acc;
}

const char* to_string(RootKind k) {
    switch (k) {
        case RootKind::Gr: return "Gr";
        case RootKind::Gc: return "Gc";
        case RootKind::Gcc: return "Gcc";
        case RootKind::IIr: return "IIr";
        case RootKind::IIc: return "IIc";
        case RootKind::III: return "III";
        case RootKind::Dr: return "Dr";
        case RootKind::Dc: return "Dc";
        case RootKind::N: return "N";
        case RootKind::O: return "O";
    }
    return "?";
}

PetrovType classify(const WeylQuartic& q, double tol, double ambient_scale) {
    if (!(tol > 0.0) || tol > 1e-2)
        throw ConfigError("classification tolerance must lie in (0, 1e-2], got " +
                          std::to_string(tol));
    if (ambient_scale < 0.0 || !std::isfinite(ambient_scale))
        throw ConfigError("ambient scale must be finite and non-negative");
    for (double c : q.psi)
        if (!std::isfinite(c)) throw ConfigError("quartic coefficient is not finite");

    double m = 0.0;
    for (double c : q.psi) m = std::max(m, std::abs(c));
    double scale = ambient_scale > 0.0 ? ambient_scale : m;

    PetrovType out;
    if (m == 0.0 || scale == 0.0) return out;  // exact O, certain

    const double zero_cut = tol * scale;
    if (m <= 0.5 * zero_cut) return out;  // O with margin, certain

    std::vector<HRoot> hroots = projective_roots(q.psi);
    PetrovType typed = typed_at(hroots, tol);

    if (m <= zero_cut) {
        // Type O, but close enough to the threshold that the root pattern
        // is worth reporting as the alternative.
        out.uncertain = true;
        out.alt_kind = typed.kind;
        return out;
    }

    out = std::move(typed);
    if (m <= 2.0 * zero_cut) {
        out.uncertain = true;
        out.alt_kind = RootKind::O;
        return out;
    }

    // Clustering is stable when halving or doubling the tolerance does not
    // change the outcome; otherwise report both candidates.
    RootKind lo = typed_at(hroots, 0.5 * tol).kind;
    RootKind hi = typed_at(hroots, 2.0 * tol).kind;
    if (lo != hi) {
        out.uncertain = true;
        out.alt_kind = (lo == out.kind) ? hi : lo;
    }
    return out;
}

WeylQuartic transform(const WeylQuartic& q, const Eigen::Matrix2d& A) {
    if (!A.allFinite()) throw ConfigError("transformation matrix is not finite");
    double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
    double amax = A.cwiseAbs().maxCoeff();
    if (std::abs(det) <= 1e-14 * std::max(1.0, amax * amax))
        throw ConfigError("transformation matrix is singular");

    WeylQuartic out;
    out.side = q.side;

    if (q.side == Side::self_dual) {
        // Weighted scalars: psi'_k picks up det^(2-k).
        for (int k = 0; k < 5; ++k)
            out.psi[k] = std::pow(det, 2 - k) * q.psi[k];
        return out;
    }

    // Projective substitution.  With w(x, y) = sum_k binom(4,k) psi_k y^k
    // x^(4-k) on homogeneous coordinates (x, y), the transformed quartic is
    // w~(xi) = det(A)^3 w(A^(-1) xi) = (1/det) w(adj(A) xi), which keeps the
    // coefficients polynomial in A.  Roots move by xi -> A xi.
    const double m00 = A(1, 1), m01 = -A(0, 1);  // adj(A)
    const double m10 = -A(1, 0), m11 = A(0, 0);

    // c[j]: coefficient of y^j x^(4-j) in w(adj(A) xi), built by convolving
    // binomial expansions of (m00 x + m01 y)^(4-k) and (m10 x + m11 y)^k.
    double c[5] = {0.0, 0.0, 0.0, 0.0, 0.0};
    for (int k = 0; k < 5; ++k) {
        double b = kBinom[k] * q.psi[k];
        if (b == 0.0) continue;
        double e0[5] = {0.0, 0.0, 0.0, 0.0, 0.0};  // (m00 x + m01 y)^(4-k)
        double e1[5] = {0.0, 0.0, 0.0, 0.0, 0.0};  // (m10 x + m11 y)^k
        int n0 = 4 - k;
        auto fill = [](double* e, int n, double p, double q_) {
            // e[i] = C(n, i) p^(n-i) q^i
            double coef = 1.0;
            for (int i = 0; i <= n; ++i) {
                double pw = 1.0;
                for (int t = 0; t < n - i; ++t) pw *= p;
                double qw = 1.0;
                for (int t = 0; t < i; ++t) qw *= q_;
                e[i] = coef * pw * qw;
                coef = coef * (n - i) / (i + 1);
            }
        };
        fill(e0, n0, m00, m01);
        fill(e1, k, m10, m11);
        for (int i = 0; i <= n0; ++i)
            for (int j = 0; j <= k; ++j) c[i + j] += b * e0[i] * e1[j];
    }
    for (int k = 0; k < 5; ++k) out.psi[k] = c[k] / (det * kBinom[k]);
    return out;
}

// ---------------------------------------------------------------------------
// Exact rational classification.

namespace {

using Rat = boost::multiprecision::cpp_rational;
using Poly = std::vector<Rat>;  // coefficient of lambda^k at index k

void trim(Poly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

int degree(const Poly& p) { return static_cast<int>(p.size()) - 1; }

Poly derivative(const Poly& p) {
    Poly d;
    for (int k = 1; k <= degree(p); ++k) d.push_back(Rat(k) * p[k]);
    trim(d);
    return d;
}

// Exact division with remainder.
std::pair<Poly, Poly> divmod(const Poly& num, const Poly& den) {
    Poly r = num, q;
    int dd = degree(den);
    if (dd < 0) throw Error("polynomial division by zero");
    int dr = degree(r);
    if (dr >= dd) q.assign(dr - dd + 1, Rat(0));
    while (degree(r) >= dd) {
        int k = degree(r) - dd;
        Rat f = r.back() / den.back();
        q[k] = f;
        for (int i = 0; i <= dd; ++i) r[i + k] -= f * den[i];
        r.pop_back();  // leading term cancelled exactly
        trim(r);
    }
    trim(q);
    return {q, r};
}

Poly monic(Poly p) {
    trim(p);
    if (p.empty()) return p;
    Rat lead = p.back();
    for (Rat& c : p) c /= lead;
    return p;
}

Poly gcd_poly(Poly a, Poly b) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        Poly r = divmod(a, b).second;
        a = std::move(b);
        b = std::move(r);
    }
    return monic(a);
}

Poly poly_sub(Poly a, const Poly& b) {
    if (a.size() < b.size()) a.resize(b.size(), Rat(0));
    for (int k = 0; k <= degree(b); ++k) a[k] -= b[k];
    trim(a);
    return a;
}

// Yun's algorithm: factor[i] collects the roots of multiplicity i+1
// (index 0 holds the simple part).
std::vector<Poly> squarefree_parts(const Poly& p) {
    std::vector<Poly> parts;
    Poly dp = derivative(p);
    Poly a = gcd_poly(p, dp);
    if (degree(a) <= 0) {
        parts.push_back(monic(p));
        return parts;
    }
    Poly b = divmod(p, a).first;
    Poly c = divmod(dp, a).first;
    Poly d = poly_sub(c, derivative(b));
    while (degree(b) > 0) {
        Poly f = gcd_poly(b, d);
        parts.push_back(f);
        b = divmod(b, f).first;
        d = poly_sub(divmod(d, f).first, derivative(b));
    }
    return parts;
}

int sign_of(const Rat& r) {
    if (r > 0) return 1;
    if (r < 0) return -1;
    return 0;
}

// Number of distinct real roots of a square-free polynomial, by the sign
// variation of its Sturm chain between -inf and +inf.
int sturm_real_roots(const Poly& f) {
    int d = degree(f);
    if (d <= 0) return 0;
    if (d == 1) return 1;
    std::vector<Poly> chain{f, derivative(f)};
    while (degree(chain.back()) > 0) {
        Poly r = divmod(chain[chain.size() - 2], chain.back()).second;
        for (Rat& c : r) c = -c;
        trim(r);
        if (r.empty()) break;  // not square-free; callers guarantee otherwise
        chain.push_back(std::move(r));
    }
    auto variations = [&chain](bool at_plus_inf) {
        int count = 0, prev = 0;
        for (const Poly& p : chain) {
            int dp = degree(p);
            int s = sign_of(p.back());
            if (!at_plus_inf && (dp % 2 == 1)) s = -s;
            if (s != 0 && prev != 0 && s != prev) ++count;
            if (s != 0) prev = s;
        }
        return count;
    };
    return variations(false) - variations(true);
}

}  // namespace

PetrovType oracle_classify(const WeylQuartic& q) {
    for (double c : q.psi)
        if (!std::isfinite(c)) throw ConfigError("quartic coefficient is not finite");

    // Every finite double is an exact rational; binom factors are integers.
    Poly p(5, Rat(0));
    bool any = false;
    for (int k = 0; k < 5; ++k) {
        p[k] = Rat(kBinom[k]) * Rat(q.psi[k]);
        if (q.psi[k] != 0.0) any = true;
    }
    PetrovType out;
    if (!any) return out;  // O

    trim(p);
    int m_inf = 4 - degree(p);

    std::vector<std::pair<int, bool>> entries;
    if (m_inf > 0) {
        entries.emplace_back(m_inf, true);
        ProjRoot r;
        r.at_infinity = true;
        r.multiplicity = m_inf;
        r.real = true;
        out.roots.push_back(r);
    }

    if (degree(p) >= 1) {
        std::vector<Poly> parts = squarefree_parts(p);
        for (int i = 0; i < static_cast<int>(parts.size()); ++i) {
            int mult = i + 1;
            int dnum = degree(parts[i]);
            if (dnum <= 0) continue;
            int reals = sturm_real_roots(parts[i]);
            int pairs = (dnum - reals) / 2;
            for (int r = 0; r < reals; ++r) {
                entries.emplace_back(mult, true);
                ProjRoot pr;
                pr.multiplicity = mult;
                pr.real = true;
                out.roots.push_back(pr);
            }
            for (int r = 0; r < 2 * pairs; ++r) {
                entries.emplace_back(mult, false);
                ProjRoot pr;
                pr.multiplicity = mult;
                pr.real = false;
                out.roots.push_back(pr);
            }
        }
    }
    out.kind = kind_from_entries(std::move(entries));
    return out;
}

}  // namespace pk::petrov

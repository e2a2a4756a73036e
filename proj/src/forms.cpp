#include "pk/forms.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "pk/errors.hpp"

namespace pk::forms {

namespace {

constexpr int kMaxDeg = 5;

void gen_tuples(int n, int k, int next, uint32_t cur, std::vector<uint8_t>& out) {
    if (k == 0) {
        out.push_back(static_cast<uint8_t>(cur));
        return;
    }
    for (int v = next; v <= n - k; ++v)
        gen_tuples(n, k - 1, v + 1, cur | (1u << v), out);
}

struct FormTableStore {
    FormTable t[jets::kMaxDim][kMaxDeg + 1];
    FormTableStore() {
        for (int n = 1; n <= jets::kMaxDim; ++n)
            for (int k = 0; k <= kMaxDeg; ++k) {
                FormTable& ft = t[n - 1][k];
                ft.n = n;
                ft.k = k;
                ft.pos.fill(-1);
                if (k <= n) gen_tuples(n, k, 0, 0, ft.mask);
                ft.count = static_cast<int>(ft.mask.size());
                for (int p = 0; p < ft.count; ++p) ft.pos[ft.mask[p]] = static_cast<int8_t>(p);
            }
    }
};

void check_same(const FormValue& a, const FormValue& b, const char* what) {
    if (!a.valid() || !b.valid()) throw ConfigError(std::string(what) + " on an empty form");
    if (a.n() != b.n() || a.basis() != b.basis() || a.jet_dim() != b.jet_dim() ||
        a.jet_order() != b.jet_order())
        throw ConfigError(std::string(what) + ": mismatched form shapes");
}

void check_same_degree(const FormValue& a, const FormValue& b, const char* what) {
    check_same(a, b, what);
    if (a.degree() != b.degree())
        throw ConfigError(std::string(what) + ": mismatched form degrees");
}

}  // namespace

const FormTable& FormTable::get(int n, int k) {
    static const FormTableStore store;
    if (n < 1 || n > jets::kMaxDim)
        throw ConfigError("form ambient dimension " + std::to_string(n) + " outside [1, 5]");
    if (k < 0 || k > kMaxDeg)
        throw ConfigError("form degree " + std::to_string(k) + " outside [0, 5]");
    return store.t[n - 1][k];
}

int merge_sign(uint8_t ma, uint8_t mb) {
    int inversions = 0;
    for (int i = 0; i < 8; ++i)
        if (ma & (1u << i))
            inversions += std::popcount(static_cast<unsigned>(mb & ((1u << i) - 1)));
    return (inversions % 2 == 0) ? 1 : -1;
}

FormValue FormValue::zero(int n, int k, Basis basis, int jet_dim, int jet_order) {
    FormValue f;
    f.tab_ = &FormTable::get(n, k);
    f.basis_ = basis;
    f.jet_dim_ = jet_dim;
    f.jet_order_ = jet_order;
    f.c_.assign(f.tab_->count, jets::Jet::constant(jet_dim, jet_order, 0.0));
    return f;
}

FormValue FormValue::scalar(int n, Basis basis, const jets::Jet& f) {
    FormValue out = zero(n, 0, basis, f.dim(), f.order());
    out.c_[0] = f;
    return out;
}

FormValue FormValue::unit(int n, int a, Basis basis, int jet_dim, int jet_order) {
    if (a < 0 || a >= n)
        throw ConfigError("unit form index " + std::to_string(a) + " outside dimension " +
                          std::to_string(n));
    FormValue out = zero(n, 1, basis, jet_dim, jet_order);
    out.c_[a] = jets::Jet::constant(jet_dim, jet_order, 1.0);
    return out;
}

const jets::Jet& FormValue::at_mask(uint8_t m) const {
    const int p = tab_ ? tab_->pos[m] : -1;
    if (p < 0) throw ConfigError("component mask not present in this form");
    return c_[p];
}

jets::Jet& FormValue::at_mask(uint8_t m) {
    const int p = tab_ ? tab_->pos[m] : -1;
    if (p < 0) throw ConfigError("component mask not present in this form");
    return c_[p];
}

const jets::Jet& FormValue::at(std::initializer_list<int> idx) const {
    uint8_t m = 0;
    int prev = -1;
    for (int i : idx) {
        if (i <= prev) throw ConfigError("component indices must be strictly increasing");
        if (i < 0 || i >= n()) throw ConfigError("component index outside ambient dimension");
        m |= static_cast<uint8_t>(1u << i);
        prev = i;
    }
    return at_mask(m);
}

double FormValue::max_abs() const {
    double m = 0.0;
    for (const auto& j : c_) m = std::max(m, j.max_abs());
    return m;
}

void FormValue::add_scaled(const jets::Jet& s, const FormValue& other) {
    check_same_degree(*this, other, "add_scaled");
    for (int p = 0; p < count(); ++p) c_[p] += s * other.c_[p];
}

void FormValue::add_scaled(double s, const FormValue& other) {
    check_same_degree(*this, other, "add_scaled");
    for (int p = 0; p < count(); ++p) c_[p].accumulate(s, other.c_[p]);
}

FormValue& FormValue::operator+=(const FormValue& rhs) {
    check_same_degree(*this, rhs, "operator+=");
    for (int p = 0; p < count(); ++p) c_[p] += rhs.c_[p];
    return *this;
}

FormValue& FormValue::operator-=(const FormValue& rhs) {
    check_same_degree(*this, rhs, "operator-=");
    for (int p = 0; p < count(); ++p) c_[p] -= rhs.c_[p];
    return *this;
}

FormValue& FormValue::operator*=(double s) {
    for (auto& j : c_) j *= s;
    return *this;
}

FormValue FormValue::truncated(int new_order) const {
    FormValue out = *this;
    for (auto& j : out.c_) j = j.truncated(new_order);
    out.jet_order_ = new_order;
    return out;
}

FormValue FormValue::promoted(int new_jet_dim) const {
    FormValue out = *this;
    for (auto& j : out.c_) j = j.promoted(new_jet_dim);
    out.jet_dim_ = new_jet_dim;
    return out;
}

FormValue FormValue::with_basis(Basis b) const {
    FormValue out = *this;
    out.basis_ = b;
    return out;
}

FormValue operator+(const FormValue& a, const FormValue& b) {
    FormValue out = a;
    out += b;
    return out;
}

FormValue operator-(const FormValue& a, const FormValue& b) {
    FormValue out = a;
    out -= b;
    return out;
}

FormValue operator-(const FormValue& a) {
    FormValue out = a;
    out *= -1.0;
    return out;
}

FormValue operator*(double s, const FormValue& a) {
    FormValue out = a;
    out *= s;
    return out;
}

FormValue operator*(const FormValue& a, double s) { return s * a; }

FormValue operator*(const jets::Jet& s, const FormValue& a) {
    FormValue out = FormValue::zero(a.n(), a.degree(), a.basis(), a.jet_dim(), a.jet_order());
    out.add_scaled(s, a);
    return out;
}

FormValue wedge(const FormValue& a, const FormValue& b) {
    check_same(a, b, "wedge");
    FormValue out = FormValue::zero(a.n(), a.degree() + b.degree(), a.basis(), a.jet_dim(),
                                    a.jet_order());
    if (out.count() == 0) return out;  // degree above n: the zero form
    const FormTable& ta = FormTable::get(a.n(), a.degree());
    const FormTable& tb = FormTable::get(b.n(), b.degree());
    for (int pa = 0; pa < a.count(); ++pa) {
        for (int pb = 0; pb < b.count(); ++pb) {
            const uint8_t ma = ta.mask[pa];
            const uint8_t mb = tb.mask[pb];
            if (ma & mb) continue;
            const int s = merge_sign(ma, mb);
            jets::Jet prod = a.comp(pa) * b.comp(pb);
            out.at_mask(ma | mb).accumulate(s, prod);
        }
    }
    return out;
}

FormValue ext_d(const FormValue& omega) {
    if (!omega.valid()) throw ConfigError("ext_d on an empty form");
    if (omega.basis() != Basis::coordinate)
        throw ConfigError("ext_d is defined on coordinate-basis components");
    if (omega.jet_dim() != omega.n())
        throw ConfigError("ext_d needs jet variables matching the ambient dimension");
    if (omega.jet_order() < 1)
        throw OrderBudget("jet order budget exhausted: exterior derivative needs order >= 1");
    const int n = omega.n();
    FormValue out = FormValue::zero(n, omega.degree() + 1, Basis::coordinate, n,
                                    omega.jet_order() - 1);
    if (out.count() == 0) return out;
    const FormTable& t = FormTable::get(n, omega.degree());
    for (int p = 0; p < omega.count(); ++p) {
        const uint8_t m = t.mask[p];
        for (int v = 0; v < n; ++v) {
            if (m & (1u << v)) continue;
            const int s = merge_sign(static_cast<uint8_t>(1u << v), m);
            out.at_mask(m | (1u << v)).accumulate(s, omega.comp(p).deriv(v));
        }
    }
    return out;
}

FormValue interior(std::span<const jets::Jet> x, const FormValue& omega) {
    if (!omega.valid()) throw ConfigError("interior product on an empty form");
    if (static_cast<int>(x.size()) != omega.n())
        throw ConfigError("interior product: vector length must match ambient dimension");
    if (omega.degree() == 0)
        throw ConfigError("interior product of a 0-form is undefined");
    FormValue out = FormValue::zero(omega.n(), omega.degree() - 1, omega.basis(),
                                    omega.jet_dim(), omega.jet_order());
    const FormTable& t = FormTable::get(omega.n(), omega.degree());
    for (int p = 0; p < omega.count(); ++p) {
        const uint8_t m = t.mask[p];
        int slot = 0;
        for (int v = 0; v < omega.n(); ++v) {
            if (!(m & (1u << v))) continue;
            jets::Jet prod = x[v] * omega.comp(p);
            out.at_mask(m & ~(1u << v)).accumulate(slot % 2 == 0 ? 1.0 : -1.0, prod);
            ++slot;
        }
    }
    return out;
}

double CoframeSample::condition_number() const {
    Eigen::MatrixXd e(n, n);
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i) e(a, i) = theta[a].comp(i).value();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(e);
    const double smin = svd.singularValues()(n - 1);
    const double smax = svd.singularValues()(0);
    if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
    return smax / smin;
}

void CoframeSample::require_invertible() const {
    if (static_cast<int>(theta.size()) != n || n == 0)
        throw ConfigError("coframe sample holds the wrong number of 1-forms");
    const double c = condition_number();
    if (!(c < cond_bound))
        throw MarginViolation("coframe matrix condition number " + std::to_string(c) +
                              " exceeds bound " + std::to_string(cond_bound));
}

Eigen::MatrixXd null_metric4() {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
    g(0, 2) = g(2, 0) = 1.0;
    g(1, 3) = g(3, 1) = 1.0;
    return g;
}

namespace {

using JetMatrix = std::vector<std::vector<jets::Jet>>;

// Gauss-Jordan with value-pivoting over jet entries.
JetMatrix invert_jet_matrix(JetMatrix a, int n, int jet_dim, int jet_order) {
    JetMatrix inv(n, std::vector<jets::Jet>(n));
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            inv[r][c] = jets::Jet::constant(jet_dim, jet_order, r == c ? 1.0 : 0.0);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col].value()) > std::abs(a[piv][col].value())) piv = r;
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        jets::Jet f = jets::inv(a[col][col]);
        for (int c = 0; c < n; ++c) {
            a[col][c] = f * a[col][c];
            inv[col][c] = f * inv[col][c];
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            jets::Jet m = a[r][col];
            for (int c = 0; c < n; ++c) {
                a[r][c] -= m * a[col][c];
                inv[r][c] -= m * inv[col][c];
            }
        }
    }
    return inv;
}

// omega rewritten through the given per-axis 1-form images; identity on
// 0-forms apart from the basis tag.
FormValue rewrite(const FormValue& omega, const std::vector<FormValue>& image, Basis out_basis) {
    const int n = omega.n();
    FormValue out = FormValue::zero(n, omega.degree(), out_basis, omega.jet_dim(),
                                    omega.jet_order());
    if (omega.degree() == 0) {
        out.comp(0) = omega.comp(0);
        return out;
    }
    const FormTable& t = FormTable::get(n, omega.degree());
    for (int p = 0; p < omega.count(); ++p) {
        const uint8_t m = t.mask[p];
        FormValue prod;
        bool first = true;
        for (int v = 0; v < n; ++v) {
            if (!(m & (1u << v))) continue;
            prod = first ? image[v] : wedge(prod, image[v]);
            first = false;
        }
        out.add_scaled(omega.comp(p), prod);
    }
    return out;
}

}  // namespace

FormValue change_basis(const FormValue& omega, const CoframeSample& cof) {
    if (!omega.valid()) throw ConfigError("change_basis on an empty form");
    if (omega.n() != cof.n || omega.jet_dim() != cof.jet_dim())
        throw ConfigError("change_basis: form and coframe shapes differ");
    cof.require_invertible();
    if (omega.jet_order() > cof.jet_order())
        throw OrderBudget("coframe jets carry fewer orders than the form being converted");
    const int n = cof.n;

    std::vector<FormValue> image;
    image.reserve(n);
    if (omega.basis() == Basis::coframe) {
        // theta^a expressed over the chart, aligned to omega's order.
        for (int a = 0; a < n; ++a) image.push_back(cof.theta[a].truncated(omega.jet_order()));
        return rewrite(omega, image, Basis::coordinate);
    }
    // dx^i = (E^{-1})_ia theta^a with E_ai the jet components of theta^a.
    JetMatrix e(n, std::vector<jets::Jet>(n));
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i) e[a][i] = cof.theta[a].comp(i).truncated(omega.jet_order());
    JetMatrix einv = invert_jet_matrix(std::move(e), n, omega.jet_dim(), omega.jet_order());
    for (int i = 0; i < n; ++i) {
        FormValue one = FormValue::zero(n, 1, Basis::coframe, omega.jet_dim(), omega.jet_order());
        for (int a = 0; a < n; ++a) one.comp(a) = einv[i][a];
        image.push_back(std::move(one));
    }
    return rewrite(omega, image, Basis::coframe);
}

FormValue hodge(const FormValue& omega, const CoframeSample& cof) {
    if (!omega.valid()) throw ConfigError("hodge on an empty form");
    if (omega.basis() != Basis::coframe)
        throw ConfigError("hodge expects coframe-basis components");
    if (omega.n() != 4 || omega.degree() != 2)
        throw ConfigError("hodge is implemented for 2-forms in dimension 4");
    if (cof.g.rows() != 4 || cof.g.cols() != 4)
        throw ConfigError("hodge needs the 4x4 coframe metric");

    // Index-lowered frame vectors: (e_a)^flat = g_ab theta^b.
    std::vector<FormValue> flat;
    flat.reserve(4);
    for (int a = 0; a < 4; ++a) {
        FormValue one = FormValue::zero(4, 1, Basis::coframe, omega.jet_dim(),
                                        omega.jet_order());
        for (int b = 0; b < 4; ++b)
            one.comp(b) = jets::Jet::constant(omega.jet_dim(), omega.jet_order(), cof.g(a, b));
        flat.push_back(std::move(one));
    }

    // *omega(e_a, e_b) vol = omega ^ flat_a ^ flat_b.
    FormValue out = FormValue::zero(4, 2, Basis::coframe, omega.jet_dim(), omega.jet_order());
    const FormTable& t = FormTable::get(4, 2);
    for (int p = 0; p < out.count(); ++p) {
        const uint8_t m = t.mask[p];
        int a = std::countr_zero(static_cast<unsigned>(m));
        int b = std::countr_zero(static_cast<unsigned>(m & (m - 1)));
        FormValue four = wedge(wedge(omega, flat[a]), flat[b]);
        out.comp(p) = (1.0 / cof.vol_coeff) * four.at_mask(0b1111);
    }
    return out;
}

namespace {

FormValue sigma_build(int jet_dim, int jet_order,
                      std::initializer_list<std::pair<uint8_t, double>> terms) {
    FormValue s = FormValue::zero(4, 2, Basis::coframe, jet_dim, jet_order);
    for (const auto& [mask, v] : terms)
        s.at_mask(mask) = jets::Jet::constant(jet_dim, jet_order, v);
    return s;
}

}  // namespace

FormValue sigma_plus(int i, int jet_dim, int jet_order) {
    switch (i) {
        case 1: return sigma_build(jet_dim, jet_order, {{0b0011, 1.0}});
        case 2: return sigma_build(jet_dim, jet_order, {{0b1100, 1.0}});
        case 3: return sigma_build(jet_dim, jet_order, {{0b0101, 1.0}, {0b1010, 1.0}});
        default: throw ConfigError("sigma_plus index must be 1, 2, or 3");
    }
}

FormValue sigma_minus(int i, int jet_dim, int jet_order) {
    switch (i) {
        case 1: return sigma_build(jet_dim, jet_order, {{0b1001, 1.0}});
        case 2: return sigma_build(jet_dim, jet_order, {{0b0110, -1.0}});
        case 3: return sigma_build(jet_dim, jet_order, {{0b0101, 1.0}, {0b1010, -1.0}});
        default: throw ConfigError("sigma_minus index must be 1, 2, or 3");
    }
}

double max_comp_diff(const FormValue& a, const FormValue& b) {
    check_same_degree(a, b, "max_comp_diff");
    double m = 0.0;
    for (int p = 0; p < a.count(); ++p) {
        jets::Jet d = a.comp(p) - b.comp(p);
        m = std::max(m, d.max_abs());
    }
    return m;
}

}  // namespace pk::forms

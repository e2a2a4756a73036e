#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "pk/jets.hpp"

namespace pk::forms {

// Components live either over the chart (coordinate differentials) or over a
// declared coframe.  Mixing bases in one operation is a shape error.
enum class Basis { coordinate, coframe };

// Index tuples for degree-k forms in n variables: strictly increasing tuples
// stored as bitmasks, listed in lexicographic tuple order.
struct FormTable {
    int n = 0;
    int k = 0;
    int count = 0;
    std::vector<uint8_t> mask;    // count entries
    std::array<int8_t, 32> pos{};  // bitmask -> component position, -1 if absent

    static const FormTable& get(int n, int k);  // n in 1..5, k in 0..n
};

// Parity of moving every index of `mb` past the larger indices of `ma`, i.e.
// the sign relating theta^ma ^ theta^mb to theta^(ma|mb).  Zero overlap
// assumed.
int merge_sign(uint8_t ma, uint8_t mb);

// A differential form at one point, with truncated Taylor expansions as
// components.  All components share one jet shape.
class FormValue {
  public:
    FormValue() = default;

    static FormValue zero(int n, int k, Basis basis, int jet_dim, int jet_order);
    // f as a 0-form.
    static FormValue scalar(int n, Basis basis, const jets::Jet& f);
    // The elementary 1-form dx^a (coordinate) or theta^a (coframe), 0-based a.
    static FormValue unit(int n, int a, Basis basis, int jet_dim, int jet_order);

    bool valid() const { return tab_ != nullptr; }
    int n() const { return tab_ ? tab_->n : 0; }
    int degree() const { return tab_ ? tab_->k : 0; }
    int count() const { return tab_ ? tab_->count : 0; }
    Basis basis() const { return basis_; }
    int jet_dim() const { return jet_dim_; }
    int jet_order() const { return jet_order_; }

    const jets::Jet& comp(int p) const { return c_[p]; }
    jets::Jet& comp(int p) { return c_[p]; }
    const jets::Jet& at_mask(uint8_t m) const;
    jets::Jet& at_mask(uint8_t m);
    // Component for 0-based strictly increasing indices, e.g. {0, 2}.
    const jets::Jet& at(std::initializer_list<int> idx) const;

    double max_abs() const;

    // this += s * other, with matching shape, degree, and basis.
    void add_scaled(const jets::Jet& s, const FormValue& other);
    void add_scaled(double s, const FormValue& other);

    FormValue& operator+=(const FormValue& rhs);
    FormValue& operator-=(const FormValue& rhs);
    FormValue& operator*=(double s);

    FormValue truncated(int new_order) const;
    FormValue promoted(int new_jet_dim) const;
    FormValue with_basis(Basis b) const;  // relabel only; no transform

  private:
    const FormTable* tab_ = nullptr;
    Basis basis_ = Basis::coordinate;
    int jet_dim_ = 0;
    int jet_order_ = 0;
    std::vector<jets::Jet> c_;
};

FormValue operator+(const FormValue& a, const FormValue& b);
FormValue operator-(const FormValue& a, const FormValue& b);
FormValue operator-(const FormValue& a);
FormValue operator*(double s, const FormValue& a);
FormValue operator*(const FormValue& a, double s);
FormValue operator*(const jets::Jet& s, const FormValue& a);

// Antisymmetrized product without factorial factors: on 1-forms,
// a ^ b = a (x) b - b (x) a.
FormValue wedge(const FormValue& a, const FormValue& b);

// Exterior derivative in the coordinate basis; consumes one jet order.
FormValue ext_d(const FormValue& omega);

// Interior product with a vector of jet components (X^0, ..., X^{n-1}).
FormValue interior(std::span<const jets::Jet> x, const FormValue& omega);

// A coframe at one point: n independent 1-forms over the chart, with the
// constant metric coefficients valid in that coframe.
struct CoframeSample {
    int n = 0;
    std::vector<FormValue> theta;  // coordinate-basis 1-forms
    Eigen::MatrixXd g;             // constant coframe metric g_ab
    double vol_coeff = 1.0;        // vol = vol_coeff * theta^0 ^ ... ^ theta^{n-1}
    double cond_bound = 1e8;

    // Condition number of the coframe component value matrix.
    double condition_number() const;
    // Throws MarginViolation when the coframe matrix conditioning exceeds
    // the bound.
    void require_invertible() const;

    int jet_dim() const { return theta.empty() ? 0 : theta[0].jet_dim(); }
    int jet_order() const { return theta.empty() ? 0 : theta[0].jet_order(); }
};

// The constant split-signature metric of the 4d null coframe:
// g_13 = g_31 = g_24 = g_42 = 1.
Eigen::MatrixXd null_metric4();

// Re-express between bases; direction read from omega.basis().  Jets of the
// coframe are truncated to omega's order.  Throws MarginViolation on an
// ill-conditioned coframe and OrderBudget if omega outlives the coframe jets.
FormValue change_basis(const FormValue& omega, const CoframeSample& cof);

// Hodge dual of a coframe-basis 2-form in dimension 4, with respect to the
// sample's metric and orientation; an involution on 2-forms.
FormValue hodge(const FormValue& omega, const CoframeSample& cof);

// Self-dual / anti-self-dual basis 2-forms over the null coframe, i in 1..3:
//   sigma^1_+ = theta^1 ^ theta^2        sigma^1_- = theta^1 ^ theta^4
//   sigma^2_+ = theta^3 ^ theta^4        sigma^2_- = theta^3 ^ theta^2
//   sigma^3_+ = theta^1 ^ theta^3        sigma^3_- = theta^1 ^ theta^3
//              + theta^2 ^ theta^4                  - theta^2 ^ theta^4
FormValue sigma_plus(int i, int jet_dim, int jet_order);
FormValue sigma_minus(int i, int jet_dim, int jet_order);

// Largest coefficient difference between two forms of identical shape.
double max_comp_diff(const FormValue& a, const FormValue& b);

}  // namespace pk::forms

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pk/errors.hpp"
#include "pk/kernels.hpp"

namespace pk::jets {

inline constexpr int kMaxDim = 5;
inline constexpr int kMaxOrder = 4;

// Singularity margin for division, log, and fractional powers, relative to
// the operand's largest coefficient magnitude.
inline constexpr double kSingularMargin = 1e-10;

// Shared tables for one (dim, order) pair: the graded-lexicographic monomial
// list, rank lookup, truncated-product plan, and per-variable derivative
// maps. Monomials are grouped by total degree, so the ranks of degree <= d
// form a prefix; truncation is a prefix copy.
struct MonoTable {
    int dim = 0;
    int order = 0;
    int count = 0;
    std::vector<std::array<uint8_t, kMaxDim>> mono;  // exponent tuples
    std::vector<uint8_t> deg;
    std::vector<int32_t> rank_of;                    // base-(kMaxOrder+1) encoding -> rank
    std::array<int32_t, kMaxOrder + 2> prefix{};     // prefix[d] = #monomials of degree < d
    kern::MulPlan plan;
    // dsrc[v][r] = rank of mono[r] + e_v, defined for r with deg[r] < order.
    std::array<std::vector<int32_t>, kMaxDim> dsrc;

    int rank(std::span<const int> alpha) const;
    static const MonoTable& get(int dim, int order);  // throws ConfigError
};

// Truncated multivariate Taylor expansion of a scalar at a chart point.
// coeff(alpha) stores the Taylor coefficient d^alpha f / alpha!, for every
// multi-index of total degree <= order; arithmetic never consults anything
// beyond the stated order.
class Jet {
  public:
    Jet() = default;

    static Jet constant(int dim, int order, double v);
    // The coordinate function X^var at a point: value + unit slope in slot var.
    static Jet variable(int dim, int order, int var, double base_value);

    bool valid() const { return tab_ != nullptr; }
    int dim() const { return tab_ ? tab_->dim : 0; }
    int order() const { return tab_ ? tab_->order : 0; }
    int size() const { return static_cast<int>(c_.size()); }

    double value() const { return c_.empty() ? 0.0 : c_[0]; }
    double coeff(std::span<const int> alpha) const;
    double coeff(std::initializer_list<int> alpha) const {
        return coeff(std::span<const int>(alpha.begin(), alpha.size()));
    }
    // First-order coefficient in slot var, i.e. the partial derivative value.
    double partial(int var) const;
    std::span<const double> coeffs() const { return c_; }
    double& raw(int r) { return c_[r]; }
    double raw(int r) const { return c_[r]; }
    double max_abs() const;

    // Jet of the partial derivative; one order lower, same dimension.
    Jet deriv(int var) const;
    Jet truncated(int new_order) const;
    // Reinterpret in a larger variable set; new variables carry zero partials.
    Jet promoted(int new_dim) const;

    Jet& operator+=(const Jet& rhs);
    Jet& operator-=(const Jet& rhs);
    Jet& operator*=(double s);
    Jet& operator+=(double s);
    Jet& operator-=(double s);

    // dst += s * src, coefficientwise (shape-checked).
    void accumulate(double s, const Jet& src);

  private:
    explicit Jet(const MonoTable& t) : tab_(&t), c_(t.count, 0.0) {}
    static const MonoTable& joint(const Jet& a, const Jet& b);

    friend Jet operator*(const Jet& a, const Jet& b);

    const MonoTable* tab_ = nullptr;
    std::vector<double> c_;
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator-(const Jet& a);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, double s);
Jet operator*(double s, const Jet& a);
Jet operator/(const Jet& a, double s);
Jet operator/(double s, const Jet& a);
Jet operator+(const Jet& a, double s);
Jet operator+(double s, const Jet& a);
Jet operator-(const Jet& a, double s);
Jet operator-(double s, const Jet& a);

Jet inv(const Jet& a);
Jet log(const Jet& a);
Jet exp(const Jet& a);
Jet pow(const Jet& a, long long n);  // repeated multiplication
Jet pow(const Jet& a, double q);     // exp(q log a); integer fast path
Jet sqrt(const Jet& a);

// The jet of the coordinate function corresponding to `var` at `point`.
Jet seed(std::span<const double> point, int var, int order);

}  // namespace pk::jets

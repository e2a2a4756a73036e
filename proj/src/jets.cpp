#include "pk/jets.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pk::jets {

namespace {

constexpr int kBase = kMaxOrder + 1;  // exponents never exceed kMaxOrder

int pow_base(int dim) {
    int p = 1;
    for (int i = 0; i < dim; ++i) p *= kBase;
    return p;
}

int encode(const std::array<uint8_t, kMaxDim>& alpha, int dim) {
    int code = 0, mult = 1;
    for (int i = 0; i < dim; ++i) {
        code += alpha[i] * mult;
        mult *= kBase;
    }
    return code;
}

// Tuples of a fixed total degree, lexicographic on (alpha_1, ..., alpha_dim).
// The per-degree order is independent of the table's truncation order, so a
// monomial's rank agrees across tables of the same dimension; truncation and
// derivative maps rely on that.
void gen_degree(int dim, int degree, std::vector<std::array<uint8_t, kMaxDim>>& out) {
    std::array<uint8_t, kMaxDim> cur{};
    auto rec = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == dim - 1) {
            cur[pos] = static_cast<uint8_t>(remaining);
            out.push_back(cur);
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            cur[pos] = static_cast<uint8_t>(v);
            self(self, pos + 1, remaining - v);
        }
    };
    rec(rec, 0, degree);
}

void build_table(MonoTable& t, int dim, int order) {
    t.dim = dim;
    t.order = order;
    t.prefix[0] = 0;
    for (int d = 0; d <= order; ++d) {
        gen_degree(dim, d, t.mono);
        t.prefix[d + 1] = static_cast<int32_t>(t.mono.size());
    }
    t.count = static_cast<int>(t.mono.size());
    t.deg.resize(t.count);
    for (int r = 0; r < t.count; ++r) {
        int d = 0;
        for (int i = 0; i < dim; ++i) d += t.mono[r][i];
        t.deg[r] = static_cast<uint8_t>(d);
    }
    t.rank_of.assign(pow_base(dim), -1);
    for (int r = 0; r < t.count; ++r) t.rank_of[encode(t.mono[r], dim)] = r;

    // Truncated-product plan, grouped by output rank.
    std::vector<std::vector<std::pair<int32_t, int32_t>>> buckets(t.count);
    for (int i = 0; i < t.count; ++i) {
        for (int j = 0; j < t.count; ++j) {
            if (t.deg[i] + t.deg[j] > order) continue;
            std::array<uint8_t, kMaxDim> sum{};
            for (int v = 0; v < dim; ++v)
                sum[v] = static_cast<uint8_t>(t.mono[i][v] + t.mono[j][v]);
            buckets[t.rank_of[encode(sum, dim)]].emplace_back(i, j);
        }
    }
    t.plan.ncoef = t.count;
    t.plan.start.assign(t.count + 1, 0);
    for (int k = 0; k < t.count; ++k)
        t.plan.start[k + 1] = t.plan.start[k] + static_cast<int32_t>(buckets[k].size());
    t.plan.ia.resize(t.plan.start[t.count]);
    t.plan.ib.resize(t.plan.start[t.count]);
    for (int k = 0; k < t.count; ++k)
        for (size_t q = 0; q < buckets[k].size(); ++q) {
            t.plan.ia[t.plan.start[k] + q] = buckets[k][q].first;
            t.plan.ib[t.plan.start[k] + q] = buckets[k][q].second;
        }

    // Derivative source ranks: target rank r (degree < order) pulls from
    // mono[r] + e_v.
    if (order >= 1) {
        const int dcount = t.prefix[order];
        for (int v = 0; v < dim; ++v) {
            t.dsrc[v].resize(dcount);
            for (int r = 0; r < dcount; ++r) {
                std::array<uint8_t, kMaxDim> up = t.mono[r];
                up[v] = static_cast<uint8_t>(up[v] + 1);
                t.dsrc[v][r] = t.rank_of[encode(up, dim)];
            }
        }
    }
}

struct TableStore {
    MonoTable t[kMaxDim][kMaxOrder + 1];
    TableStore() {
        for (int dim = 1; dim <= kMaxDim; ++dim)
            for (int order = 0; order <= kMaxOrder; ++order)
                build_table(t[dim - 1][order], dim, order);
    }
};

// s[0] + s[1] u + ... + s[m] u^m with u = x - value(x), via Horner.
Jet apply_series(const Jet& x, std::span<const double> s) {
    Jet u = x;
    u.raw(0) = 0.0;
    const int m = static_cast<int>(s.size()) - 1;
    Jet r = Jet::constant(x.dim(), x.order(), s[m]);
    for (int k = m - 1; k >= 0; --k) {
        r = r * u;
        r += s[k];
    }
    return r;
}

}  // namespace

int MonoTable::rank(std::span<const int> alpha) const {
    if (static_cast<int>(alpha.size()) != dim)
        throw ConfigError("multi-index length " + std::to_string(alpha.size()) +
                          " does not match jet dimension " + std::to_string(dim));
    std::array<uint8_t, kMaxDim> a{};
    int total = 0;
    for (int i = 0; i < dim; ++i) {
        if (alpha[i] < 0) throw ConfigError("negative multi-index entry");
        total += alpha[i];
        if (alpha[i] > kMaxOrder || total > order)
            throw ConfigError("multi-index degree exceeds jet order");
        a[i] = static_cast<uint8_t>(alpha[i]);
    }
    return rank_of[encode(a, dim)];
}

const MonoTable& MonoTable::get(int dim, int order) {
    static const TableStore store;
    if (dim < 1 || dim > kMaxDim)
        throw ConfigError("jet dimension " + std::to_string(dim) +
                          " outside supported range [1, " + std::to_string(kMaxDim) + "]");
    if (order < 0 || order > kMaxOrder)
        throw ConfigError("jet order " + std::to_string(order) +
                          " outside supported range [0, " + std::to_string(kMaxOrder) + "]");
    return store.t[dim - 1][order];
}

Jet Jet::constant(int dim, int order, double v) {
    Jet j(MonoTable::get(dim, order));
    j.c_[0] = v;
    return j;
}

Jet Jet::variable(int dim, int order, int var, double base_value) {
    if (var < 0 || var >= dim)
        throw ConfigError("variable index " + std::to_string(var) +
                          " outside dimension " + std::to_string(dim));
    Jet j(MonoTable::get(dim, order));
    j.c_[0] = base_value;
    if (order >= 1) {
        std::array<uint8_t, kMaxDim> e{};
        e[var] = 1;
        j.c_[j.tab_->rank_of[encode(e, dim)]] = 1.0;
    }
    return j;
}

double Jet::coeff(std::span<const int> alpha) const {
    if (!tab_) throw ConfigError("coeff() on an empty jet");
    return c_[tab_->rank(alpha)];
}

double Jet::partial(int var) const {
    if (!tab_ || tab_->order < 1) throw OrderBudget("partial() needs jet order >= 1");
    if (var < 0 || var >= tab_->dim) throw ConfigError("partial() variable out of range");
    std::array<uint8_t, kMaxDim> e{};
    e[var] = 1;
    return c_[tab_->rank_of[encode(e, tab_->dim)]];
}

double Jet::max_abs() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
}

Jet Jet::deriv(int var) const {
    if (!tab_) throw ConfigError("deriv() on an empty jet");
    if (tab_->order < 1)
        throw OrderBudget("jet order budget exhausted: derivative of an order-0 jet");
    if (var < 0 || var >= tab_->dim) throw ConfigError("deriv() variable out of range");
    Jet out(MonoTable::get(tab_->dim, tab_->order - 1));
    const auto& src = tab_->dsrc[var];
    for (int r = 0; r < out.tab_->count; ++r)
        out.c_[r] = (out.tab_->mono[r][var] + 1.0) * c_[src[r]];
    return out;
}

Jet Jet::truncated(int new_order) const {
    if (!tab_) throw ConfigError("truncated() on an empty jet");
    if (new_order == tab_->order) return *this;
    if (new_order > tab_->order)
        throw OrderBudget("cannot raise jet order: higher coefficients are unknown");
    Jet out(MonoTable::get(tab_->dim, new_order));
    std::copy_n(c_.begin(), out.tab_->count, out.c_.begin());
    return out;
}

Jet Jet::promoted(int new_dim) const {
    if (!tab_) throw ConfigError("promoted() on an empty jet");
    if (new_dim == tab_->dim) return *this;
    if (new_dim < tab_->dim) throw ConfigError("promoted() cannot drop variables");
    Jet out(MonoTable::get(new_dim, tab_->order));
    for (int r = 0; r < tab_->count; ++r)
        out.c_[out.tab_->rank_of[encode(tab_->mono[r], new_dim)]] = c_[r];
    return out;
}

const MonoTable& Jet::joint(const Jet& a, const Jet& b) {
    if (!a.tab_ || !b.tab_) throw ConfigError("arithmetic on an empty jet");
    if (a.tab_ != b.tab_)
        throw ConfigError("jet shape mismatch: (" + std::to_string(a.dim()) + "," +
                          std::to_string(a.order()) + ") vs (" + std::to_string(b.dim()) +
                          "," + std::to_string(b.order()) + ")");
    return *a.tab_;
}

Jet& Jet::operator+=(const Jet& rhs) {
    joint(*this, rhs);
    kern::active().add(c_.data(), c_.data(), rhs.c_.data(), size());
    return *this;
}

Jet& Jet::operator-=(const Jet& rhs) {
    joint(*this, rhs);
    kern::active().sub(c_.data(), c_.data(), rhs.c_.data(), size());
    return *this;
}

Jet& Jet::operator*=(double s) {
    kern::active().scale(c_.data(), c_.data(), s, size());
    return *this;
}

Jet& Jet::operator+=(double s) {
    c_[0] += s;
    return *this;
}

Jet& Jet::operator-=(double s) {
    c_[0] -= s;
    return *this;
}

void Jet::accumulate(double s, const Jet& src) {
    joint(*this, src);
    kern::active().axpy(c_.data(), s, src.c_.data(), size());
    return;
}

Jet operator+(const Jet& a, const Jet& b) {
    Jet out = a;
    out += b;
    return out;
}

Jet operator-(const Jet& a, const Jet& b) {
    Jet out = a;
    out -= b;
    return out;
}

Jet operator-(const Jet& a) {
    Jet out = a;
    out *= -1.0;
    return out;
}

Jet operator*(const Jet& a, const Jet& b) {
    Jet out(Jet::joint(a, b));
    kern::active().mul(out.tab_->plan, a.c_.data(), b.c_.data(), out.c_.data());
    return out;
}

Jet operator*(const Jet& a, double s) {
    Jet out = a;
    out *= s;
    return out;
}

Jet operator*(double s, const Jet& a) { return a * s; }

Jet operator/(const Jet& a, const Jet& b) { return a * inv(b); }

Jet operator/(const Jet& a, double s) { return a * (1.0 / s); }

Jet operator/(double s, const Jet& a) { return inv(a) * s; }

Jet operator+(const Jet& a, double s) {
    Jet out = a;
    out += s;
    return out;
}

Jet operator+(double s, const Jet& a) { return a + s; }

Jet operator-(const Jet& a, double s) {
    Jet out = a;
    out -= s;
    return out;
}

Jet operator-(double s, const Jet& a) {
    Jet out = -a;
    out += s;
    return out;
}

Jet inv(const Jet& a) {
    if (!a.valid()) throw ConfigError("inv() on an empty jet");
    const double a0 = a.value();
    if (std::abs(a0) <= kSingularMargin * a.max_abs() || a0 == 0.0)
        throw SingularEval("div", "denominator value " + std::to_string(a0) +
                                      " inside singular margin");
    double s[kMaxOrder + 1];
    double p = 1.0 / a0;
    for (int k = 0; k <= a.order(); ++k) {
        s[k] = (k % 2 == 0) ? p : -p;
        p /= a0;
    }
    return apply_series(a, std::span<const double>(s, a.order() + 1));
}

Jet log(const Jet& a) {
    if (!a.valid()) throw ConfigError("log() on an empty jet");
    const double a0 = a.value();
    if (a0 <= kSingularMargin * a.max_abs() || a0 <= 0.0)
        throw SingularEval("log", "argument value " + std::to_string(a0) +
                                      " inside singular margin");
    double s[kMaxOrder + 1];
    s[0] = std::log(a0);
    double p = 1.0 / a0;
    for (int k = 1; k <= a.order(); ++k) {
        s[k] = ((k % 2 == 1) ? p : -p) / k;
        p /= a0;
    }
    return apply_series(a, std::span<const double>(s, a.order() + 1));
}

Jet exp(const Jet& a) {
    if (!a.valid()) throw ConfigError("exp() on an empty jet");
    double s[kMaxOrder + 1];
    const double e0 = std::exp(a.value());
    double f = 1.0;
    for (int k = 0; k <= a.order(); ++k) {
        if (k > 0) f *= k;
        s[k] = e0 / f;
    }
    return apply_series(a, std::span<const double>(s, a.order() + 1));
}

Jet pow(const Jet& a, long long n) {
    if (!a.valid()) throw ConfigError("pow() on an empty jet");
    if (n == 0) return Jet::constant(a.dim(), a.order(), 1.0);
    if (n < 0) return inv(pow(a, -n));
    Jet result = Jet::constant(a.dim(), a.order(), 1.0);
    Jet base = a;
    long long e = n;
    while (e > 0) {
        if (e & 1) result = result * base;
        e >>= 1;
        if (e > 0) base = base * base;
    }
    return result;
}

Jet pow(const Jet& a, double q) {
    if (!a.valid()) throw ConfigError("pow() on an empty jet");
    if (q == std::rint(q) && std::abs(q) <= 1e6)
        return pow(a, static_cast<long long>(q));
    // Fractional exponents via exp(q log a); log enforces the positivity
    // margin.
    return exp(q * log(a));
}

Jet sqrt(const Jet& a) { return pow(a, 0.5); }

Jet seed(std::span<const double> point, int var, int order) {
    const int dim = static_cast<int>(point.size());
    if (var < 0 || var >= dim)
        throw ConfigError("seed() variable index outside the chart dimension");
    return Jet::variable(dim, order, var, point[var]);
}

}  // namespace pk::jets

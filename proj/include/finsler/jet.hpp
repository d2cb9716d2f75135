#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "finsler/core.hpp"

// Truncated second-order Taylor arithmetic. A Jet carries a value, a gradient
// and a full symmetric Hessian with respect to a fixed set of seed variables
// (at most kMaxVars, enough for base + fiber coordinates of a 4d chart).
// Propagating a Lagrangian through this type yields machine-exact first and
// second derivatives; third and higher orders are obtained elsewhere by
// differencing jet evaluations.

namespace finsler {

class Jet {
public:
    Jet() = default;

    explicit Jet(double value, int nvars = 0) : v_(value), m_(nvars) {
        grad_.fill(0.0);
        hess_.fill(0.0);
    }

    // Seed variable `index` among `nvars`.
    static Jet variable(double value, int index, int nvars) {
        Jet j(value, nvars);
        j.grad_[static_cast<std::size_t>(index)] = 1.0;
        return j;
    }

    double value() const { return v_; }
    int nvars() const { return m_; }
    double grad(int i) const { return grad_[static_cast<std::size_t>(i)]; }
    double hess(int i, int j) const { return hess_[static_cast<std::size_t>(i) * kMaxVars + j]; }

    double& grad(int i) { return grad_[static_cast<std::size_t>(i)]; }
    double& hess(int i, int j) { return hess_[static_cast<std::size_t>(i) * kMaxVars + j]; }

    Jet operator-() const {
        Jet r = *this;
        r.v_ = -r.v_;
        for (int i = 0; i < m_; ++i) {
            r.grad(i) = -r.grad(i);
            for (int j = 0; j < m_; ++j) r.hess(i, j) = -r.hess(i, j);
        }
        return r;
    }

    // Constants may carry fewer seeded variables than full jets; binary
    // operations widen to the larger seed set (slots beyond m_ stay zero).
    Jet& operator+=(const Jet& o) {
        m_ = std::max(m_, o.m_);
        v_ += o.v_;
        for (int i = 0; i < m_; ++i) {
            grad(i) += o.grad(i);
            for (int j = 0; j < m_; ++j) hess(i, j) += o.hess(i, j);
        }
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        m_ = std::max(m_, o.m_);
        v_ -= o.v_;
        for (int i = 0; i < m_; ++i) {
            grad(i) -= o.grad(i);
            for (int j = 0; j < m_; ++j) hess(i, j) -= o.hess(i, j);
        }
        return *this;
    }
    Jet& operator*=(double k) {
        v_ *= k;
        for (int i = 0; i < m_; ++i) {
            grad(i) *= k;
            for (int j = 0; j < m_; ++j) hess(i, j) *= k;
        }
        return *this;
    }

    // Chain rule for a scalar function f with derivatives f1 = f'(v), f2 = f''(v).
    Jet compose(double f, double f1, double f2) const {
        Jet r(f, m_);
        for (int i = 0; i < m_; ++i) r.grad(i) = f1 * grad(i);
        for (int i = 0; i < m_; ++i)
            for (int j = 0; j < m_; ++j)
                r.hess(i, j) = f1 * hess(i, j) + f2 * grad(i) * grad(j);
        return r;
    }

private:
    double v_ = 0.0;
    int m_ = 0;
    std::array<double, kMaxVars> grad_{};
    std::array<double, kMaxVars * kMaxVars> hess_{};
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }

inline Jet operator+(Jet a, double b) {
    Jet r = a;
    return r.compose(a.value() + b, 1.0, 0.0);
}
inline Jet operator+(double a, const Jet& b) { return b + a; }
inline Jet operator-(const Jet& a, double b) { return a + (-b); }
inline Jet operator-(double a, const Jet& b) { return (-b) + a; }

inline Jet operator*(const Jet& a, const Jet& b) {
    const int m = std::max(a.nvars(), b.nvars());
    Jet r(a.value() * b.value(), m);
    for (int i = 0; i < m; ++i) r.grad(i) = a.grad(i) * b.value() + a.value() * b.grad(i);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            r.hess(i, j) = a.hess(i, j) * b.value() + a.value() * b.hess(i, j) +
                           a.grad(i) * b.grad(j) + a.grad(j) * b.grad(i);
    return r;
}
inline Jet operator*(Jet a, double k) { return a *= k; }
inline Jet operator*(double k, Jet a) { return a *= k; }

inline Jet inv(const Jet& a) {
    const double iv = 1.0 / a.value();
    return a.compose(iv, -iv * iv, 2.0 * iv * iv * iv);
}
inline Jet operator/(const Jet& a, const Jet& b) { return a * inv(b); }
inline Jet operator/(const Jet& a, double k) { return a * (1.0 / k); }
inline Jet operator/(double k, const Jet& b) { return inv(b) * k; }

inline Jet sqrt(const Jet& a) {
    const double s = std::sqrt(a.value());
    return a.compose(s, 0.5 / s, -0.25 / (s * a.value()));
}

inline Jet sin(const Jet& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    return a.compose(s, c, -s);
}

inline Jet cos(const Jet& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    return a.compose(c, -s, -c);
}

inline Jet exp(const Jet& a) {
    const double e = std::exp(a.value());
    return a.compose(e, e, e);
}

inline Jet log(const Jet& a) {
    const double iv = 1.0 / a.value();
    return a.compose(std::log(a.value()), iv, -iv * iv);
}

// Real power of a positive base.
inline Jet pow(const Jet& a, double p) {
    const double f = std::pow(a.value(), p);
    const double f1 = p * std::pow(a.value(), p - 1.0);
    const double f2 = p * (p - 1.0) * std::pow(a.value(), p - 2.0);
    return a.compose(f, f1, f2);
}

// Smooth away from zero; callers keep the argument off zero via margins.
inline Jet abs(const Jet& a) { return a.value() >= 0.0 ? a : -a; }

// Generic helpers so model code can be written once for double and Jet.
inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.value(); }

}  // namespace finsler

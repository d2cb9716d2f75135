#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Shared numeric primitives: small dense linear algebra sized for chart
// dimensions n <= 4, flat rank-3/rank-4 tensor storage, tolerance policy,
// and the error taxonomy used across the toolkit.

namespace finsler {

inline constexpr int kMaxDim = 4;   // largest chart dimension in the catalog
inline constexpr int kMaxVars = 8;  // jet variables: base + fiber coordinates

using Vec = std::vector<double>;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error { public: using Error::Error; };
class DegenerateMetric : public Error { public: using Error::Error; };
class NumericalBreakdown : public Error { public: using Error::Error; };
class NotAGeodesic : public Error { public: using Error::Error; };
class NotTimelike : public Error { public: using Error::Error; };
class WrongShell : public Error { public: using Error::Error; };
class NoConvergence : public Error { public: using Error::Error; };
class NoIntersection : public Error { public: using Error::Error; };
class AmbiguousIntersection : public Error { public: using Error::Error; };
class EnergyDriftExceeded : public Error { public: using Error::Error; };
class StepFailure : public Error { public: using Error::Error; };
class LeftRegularDomain : public Error { public: using Error::Error; };
class NotFuturePointed : public Error { public: using Error::Error; };
class VariationConstructionFailed : public Error { public: using Error::Error; };
class DegenerateBoundaryPairing : public Error { public: using Error::Error; };
class EndpointConjugate : public Error { public: using Error::Error; };
class ParseError : public Error { public: using Error::Error; };
class UnknownModel : public Error { public: using Error::Error; };
class BadParameter : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };

// Raised when an evaluation point leaves a model's regular domain. Carries
// the offending state so integration stops can be reported.
class SingularPoint : public Error {
public:
    explicit SingularPoint(const std::string& what) : Error(what) {}
    SingularPoint(const std::string& what, Vec x, Vec y, double s)
        : Error(what), exit_x(std::move(x)), exit_y(std::move(y)), exit_s(s) {}

    Vec exit_x, exit_y;
    double exit_s = 0.0;
};

// ---------------------------------------------------------------------------
// Tolerances
// ---------------------------------------------------------------------------

struct Tolerances {
    double abs_tol = 1e-8;            // invariant checks, absolute part
    double rel_tol = 1e-8;            // invariant checks, relative part
    double margin_floor = 1e-6;       // minimum distance proxy to singular sets
    double degeneracy_factor = 1e-10; // |det g| < factor * scale^n flags degeneracy
    double lightlike_band = 1e-9;     // |L| <= band*(1+|y|^2) counts as lightlike
    double energy_tol = 1e-8;         // admissible L drift along integrated geodesics
    double residual_tol = 1e-6;       // Euler-Lagrange residual at checkpoints

    double band(double abs_scale) const { return abs_tol + rel_tol * std::abs(abs_scale); }
};

inline const Tolerances& default_tolerances() {
    static const Tolerances tol{};
    return tol;
}

// ---------------------------------------------------------------------------
// Vector helpers
// ---------------------------------------------------------------------------

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline Vec scaled(std::span<const double> a, double k) {
    Vec r(a.begin(), a.end());
    for (double& v : r) v *= k;
    return r;
}

inline Vec add(std::span<const double> a, std::span<const double> b) {
    Vec r(a.begin(), a.end());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
}

inline Vec sub(std::span<const double> a, std::span<const double> b) {
    Vec r(a.begin(), a.end());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    return r;
}

inline void axpy(double k, std::span<const double> x, Vec& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += k * x[i];
}

inline double max_abs(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

// ---------------------------------------------------------------------------
// A base point with a nonzero fiber vector: the argument of every Finsler
// quantity. Lives on the slit bundle, so y = 0 is rejected on construction.
// ---------------------------------------------------------------------------

struct PointedVector {
    Vec x;
    Vec y;

    PointedVector() = default;
    PointedVector(Vec x_, Vec y_) : x(std::move(x_)), y(std::move(y_)) {
        if (x.size() != y.size())
            throw DimensionMismatch("pointed vector: base and fiber dimensions differ");
        if (norm(y) == 0.0)
            throw SingularPoint("pointed vector: zero fiber vector is outside the slit bundle");
    }

    int dim() const { return static_cast<int>(x.size()); }
};

// ---------------------------------------------------------------------------
// Dense row-major matrix, sized for n <= 4 charts but not restricted to it.
// ---------------------------------------------------------------------------

class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, 0.0) {}

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static Matrix diag(const Vec& d) {
        Matrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
        for (std::size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

    Vec apply(std::span<const double> v) const {
        Vec r(rows_, 0.0);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r[i] += (*this)(i, j) * v[j];
        return r;
    }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : a_) m = std::max(m, std::abs(v));
        return m;
    }

    double symmetry_defect() const {
        double m = 0.0;
        for (int i = 0; i < rows_; ++i)
            for (int j = i + 1; j < cols_; ++j) m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
        return m;
    }

private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

Matrix operator*(const Matrix& a, const Matrix& b);

// LU with partial pivoting. Throws DegenerateMetric when the pivot collapses.
Vec solve(Matrix a, Vec b);
Matrix inverse(const Matrix& a);
double determinant(Matrix a);

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
Vec symmetric_eigenvalues(Matrix a);

// Singular values of a (possibly rectangular) matrix, descending.
Vec singular_values(const Matrix& a);

// Signs of eigenvalues ordered ascending, e.g. Lorentzian = one minus then pluses.
// `zero_band` decides when an eigenvalue counts as vanishing.
struct Signature {
    int negative = 0;
    int zero = 0;
    int positive = 0;
    bool lorentzian(int n) const { return negative == 1 && zero == 0 && positive == n - 1; }
};
Signature metric_signature(const Matrix& g, double zero_band);

// ---------------------------------------------------------------------------
// Flat rank-3 / rank-4 tensors over one chart dimension.
// ---------------------------------------------------------------------------

class Tensor3 {
public:
    Tensor3() = default;
    explicit Tensor3(int n) : n_(n), a_(static_cast<std::size_t>(n) * n * n, 0.0) {}

    int dim() const { return n_; }
    double& operator()(int i, int j, int k) { return a_[idx(i, j, k)]; }
    double operator()(int i, int j, int k) const { return a_[idx(i, j, k)]; }
    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

    double max_abs() const {
        double m = 0.0;
        for (double v : a_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    std::size_t idx(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
    }
    int n_ = 0;
    std::vector<double> a_;
};

class Tensor4 {
public:
    Tensor4() = default;
    explicit Tensor4(int n) : n_(n), a_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}

    int dim() const { return n_; }
    double& operator()(int i, int j, int k, int l) { return a_[idx(i, j, k, l)]; }
    double operator()(int i, int j, int k, int l) const { return a_[idx(i, j, k, l)]; }
    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

    double max_abs() const {
        double m = 0.0;
        for (double v : a_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    std::size_t idx(int i, int j, int k, int l) const {
        return ((static_cast<std::size_t>(i) * n_ + j) * n_ + k) * n_ + l;
    }
    int n_ = 0;
    std::vector<double> a_;
};

}  // namespace finsler

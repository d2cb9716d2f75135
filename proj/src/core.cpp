#include "finsler/core.hpp"

#include <algorithm>

namespace finsler {

Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

namespace {

// In-place LU factorization with partial pivoting; returns pivot rows and
// the sign of the permutation, or throws on a collapsed pivot.
int lu_factor(Matrix& a, std::vector<int>& piv) {
    const int n = a.rows();
    piv.resize(n);
    int sign = 1;
    double scale = std::max(a.max_abs(), 1e-300);
    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
        piv[k] = p;
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            sign = -sign;
        }
        if (std::abs(a(k, k)) < 1e-14 * scale)
            throw DegenerateMetric("linear solve: pivot below numerical rank threshold");
        for (int i = k + 1; i < n; ++i) {
            a(i, k) /= a(k, k);
            const double lik = a(i, k);
            for (int j = k + 1; j < n; ++j) a(i, j) -= lik * a(k, j);
        }
    }
    return sign;
}

}  // namespace

Vec solve(Matrix a, Vec b) {
    const int n = a.rows();
    if (n != a.cols() || static_cast<int>(b.size()) != n)
        throw DimensionMismatch("linear solve: shape mismatch");
    std::vector<int> piv;
    lu_factor(a, piv);
    for (int k = 0; k < n; ++k)
        if (piv[k] != k) std::swap(b[k], b[piv[k]]);
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < i; ++j) b[i] -= a(i, j) * b[j];
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) b[i] -= a(i, j) * b[j];
        b[i] /= a(i, i);
    }
    return b;
}

Matrix inverse(const Matrix& a) {
    const int n = a.rows();
    Matrix inv(n, n);
    for (int col = 0; col < n; ++col) {
        Vec e(n, 0.0);
        e[col] = 1.0;
        Vec x = solve(a, std::move(e));
        for (int i = 0; i < n; ++i) inv(i, col) = x[i];
    }
    return inv;
}

double determinant(Matrix a) {
    const int n = a.rows();
    std::vector<int> piv;
    int sign;
    try {
        sign = lu_factor(a, piv);
    } catch (const DegenerateMetric&) {
        return 0.0;
    }
    double d = sign;
    for (int i = 0; i < n; ++i) d *= a(i, i);
    return d;
}

Vec symmetric_eigenvalues(Matrix a) {
    const int n = a.rows();
    // Cyclic Jacobi; matrices here are tiny so convergence is quick.
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-30 * std::max(1.0, a.max_abs() * a.max_abs())) break;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
    }
    Vec ev(n);
    for (int i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

Vec singular_values(const Matrix& a) {
    const Matrix ata = a.transposed() * a;
    Vec ev = symmetric_eigenvalues(ata);
    Vec sv(ev.size());
    for (std::size_t i = 0; i < ev.size(); ++i)
        sv[ev.size() - 1 - i] = std::sqrt(std::max(0.0, ev[i]));
    return sv;
}

Signature metric_signature(const Matrix& g, double zero_band) {
    Signature sig;
    for (double ev : symmetric_eigenvalues(g)) {
        if (ev < -zero_band)
            ++sig.negative;
        else if (ev > zero_band)
            ++sig.positive;
        else
            ++sig.zero;
    }
    return sig;
}

}  // namespace finsler

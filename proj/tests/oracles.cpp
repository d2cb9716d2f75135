#include "oracles.hpp"

#include <cmath>

namespace finsler::testing {

MetricFn minkowski_metric(int n) {
    return [n](const Vec&, Matrix& g) {
        g = Matrix(n, n);
        g(0, 0) = -1.0;
        for (int i = 1; i < n; ++i) g(i, i) = 1.0;
    };
}

MetricFn schwarzschild_metric(double m) {
    return [m](const Vec& x, Matrix& g) {
        const double r = x[1], th = x[2];
        const double f = 1.0 - 2.0 * m / r;
        g = Matrix(4, 4);
        g(0, 0) = -f;
        g(1, 1) = 1.0 / f;
        g(2, 2) = r * r;
        g(3, 3) = r * r * std::sin(th) * std::sin(th);
    };
}

MetricFn r_s2_metric() {
    return [](const Vec& x, Matrix& g) {
        g = Matrix(3, 3);
        g(0, 0) = -1.0;
        g(1, 1) = 1.0;
        g(2, 2) = std::sin(x[1]) * std::sin(x[1]);
    };
}

Matrix oracle_metric(const MetricFn& h, const Vec& x) {
    Matrix g;
    h(x, g);
    return g;
}

namespace {

// Five-point first derivative of the metric components along coordinate k.
Matrix d_metric(const MetricFn& h, const Vec& x, int k) {
    const double step = 1e-4 * (1.0 + std::abs(x[static_cast<std::size_t>(k)]));
    Matrix gp1, gm1, gp2, gm2;
    Vec xx = x;
    xx[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] + step;
    h(xx, gp1);
    xx[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] - step;
    h(xx, gm1);
    xx[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] + 2.0 * step;
    h(xx, gp2);
    xx[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] - 2.0 * step;
    h(xx, gm2);
    const int n = gp1.rows();
    Matrix d(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            d(i, j) = (8.0 * (gp1(i, j) - gm1(i, j)) - (gp2(i, j) - gm2(i, j))) / (12.0 * step);
    return d;
}

}  // namespace

Tensor3 oracle_christoffel(const MetricFn& h, const Vec& x) {
    Matrix g;
    h(x, g);
    const int n = g.rows();
    const Matrix ginv = inverse(g);
    std::vector<Matrix> dg;
    dg.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) dg.push_back(d_metric(h, x, k));
    Tensor3 gamma(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double s = 0.0;
                for (int l = 0; l < n; ++l)
                    s += ginv(i, l) * (dg[static_cast<std::size_t>(k)](l, j) -
                                       dg[static_cast<std::size_t>(l)](j, k) +
                                       dg[static_cast<std::size_t>(j)](l, k));
                gamma(i, j, k) = 0.5 * s;
            }
    return gamma;
}

Tensor4 oracle_riemann(const MetricFn& h, const Vec& x) {
    Matrix g;
    h(x, g);
    const int n = g.rows();
    const Tensor3 gamma = oracle_christoffel(h, x);

    // d gamma / dx^k with five-point stencils of the oracle symbols.
    std::vector<Tensor3> dgamma(static_cast<std::size_t>(n), Tensor3(n));
    for (int k = 0; k < n; ++k) {
        const double step = 2e-3 * (1.0 + std::abs(x[static_cast<std::size_t>(k)]));
        Vec xx = x;
        auto at = [&](double off) {
            xx[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] + off;
            return oracle_christoffel(h, xx);
        };
        const Tensor3 p1 = at(step), m1 = at(-step), p2 = at(2 * step), m2 = at(-2 * step);
        Tensor3& d = dgamma[static_cast<std::size_t>(k)];
        for (std::size_t idx = 0; idx < d.data().size(); ++idx)
            d.data()[idx] = (8.0 * (p1.data()[idx] - m1.data()[idx]) -
                             (p2.data()[idx] - m2.data()[idx])) /
                            (12.0 * step);
    }

    Tensor4 R(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double quad = 0.0;
                    for (int hh = 0; hh < n; ++hh)
                        quad += gamma(i, hh, k) * gamma(hh, j, l) -
                                gamma(i, hh, l) * gamma(hh, j, k);
                    R(i, j, k, l) = dgamma[static_cast<std::size_t>(k)](i, j, l) -
                                    dgamma[static_cast<std::size_t>(l)](i, j, k) + quad;
                }
    return R;
}

OraclePath oracle_integrate(const MetricFn& h, Vec x0, Vec v0, double s_end, int steps) {
    const int n = static_cast<int>(x0.size());
    auto accel = [&](const Vec& x, const Vec& v) {
        const Tensor3 gamma = oracle_christoffel(h, x);
        Vec a(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    a[static_cast<std::size_t>(i)] -= gamma(i, j, k) * v[static_cast<std::size_t>(j)] *
                                                      v[static_cast<std::size_t>(k)];
        return a;
    };

    OraclePath path;
    path.s.push_back(0.0);
    path.x.push_back(x0);
    path.v.push_back(v0);
    const double hstep = s_end / steps;
    Vec x = std::move(x0), v = std::move(v0);
    for (int step = 0; step < steps; ++step) {
        const Vec k1x = v, k1v = accel(x, v);
        Vec x2 = x, v2 = v;
        axpy(0.5 * hstep, k1x, x2);
        axpy(0.5 * hstep, k1v, v2);
        const Vec k2x = v2, k2v = accel(x2, v2);
        Vec x3 = x, v3 = v;
        axpy(0.5 * hstep, k2x, x3);
        axpy(0.5 * hstep, k2v, v3);
        const Vec k3x = v3, k3v = accel(x3, v3);
        Vec x4 = x, v4 = v;
        axpy(hstep, k3x, x4);
        axpy(hstep, k3v, v4);
        const Vec k4x = v4, k4v = accel(x4, v4);
        for (int i = 0; i < n; ++i) {
            const std::size_t ii = static_cast<std::size_t>(i);
            x[ii] += hstep / 6.0 * (k1x[ii] + 2 * k2x[ii] + 2 * k3x[ii] + k4x[ii]);
            v[ii] += hstep / 6.0 * (k1v[ii] + 2 * k2v[ii] + 2 * k3v[ii] + k4v[ii]);
        }
        path.s.push_back(hstep * (step + 1));
        path.x.push_back(x);
        path.v.push_back(v);
    }
    return path;
}

OracleJacobi oracle_jacobi_determinant(const MetricFn& h, const OraclePath& path,
                                       const std::vector<Vec>& dY0) {
    const int n = static_cast<int>(path.x.front().size());
    const int cols = static_cast<int>(dY0.size());

    // State per column: (Y, Z) with Y' = Z - Gamma(v)Y, Z' = -R(Y,v)v - Gamma(v)Z.
    std::vector<Vec> Y(static_cast<std::size_t>(cols), Vec(static_cast<std::size_t>(n), 0.0));
    std::vector<Vec> Z = dY0;

    auto gamma_apply = [&](const Tensor3& gamma, const Vec& v, const Vec& a) {
        Vec out(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    out[static_cast<std::size_t>(i)] +=
                        gamma(i, j, k) * v[static_cast<std::size_t>(j)] * a[static_cast<std::size_t>(k)];
        return out;
    };
    auto curv_apply = [&](const Tensor4& R, const Vec& v, const Vec& a) {
        Vec out(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l)
                        out[static_cast<std::size_t>(i)] +=
                            R(i, j, k, l) * v[static_cast<std::size_t>(j)] * a[static_cast<std::size_t>(k)] *
                            v[static_cast<std::size_t>(l)];
        return out;
    };

    OracleJacobi result;
    const std::size_t m = path.s.size();
    for (std::size_t node = 0; node + 1 < m; ++node) {
        const double hstep = path.s[node + 1] - path.s[node];
        // One RK4 step per path interval, coefficients interpolated midway by
        // re-evaluating the oracle at midpoint states.
        Vec xm(static_cast<std::size_t>(n)), vm(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const std::size_t ii = static_cast<std::size_t>(i);
            xm[ii] = 0.5 * (path.x[node][ii] + path.x[node + 1][ii]);
            vm[ii] = 0.5 * (path.v[node][ii] + path.v[node + 1][ii]);
        }
        const Tensor3 G0 = oracle_christoffel(h, path.x[node]);
        const Tensor4 R0 = oracle_riemann(h, path.x[node]);
        const Tensor3 Gm = oracle_christoffel(h, xm);
        const Tensor4 Rm = oracle_riemann(h, xm);
        const Tensor3 G1 = oracle_christoffel(h, path.x[node + 1]);
        const Tensor4 R1 = oracle_riemann(h, path.x[node + 1]);

        for (int c = 0; c < cols; ++c) {
            auto rhs = [&](const Tensor3& G, const Tensor4& R, const Vec& v, const Vec& y,
                           const Vec& z) {
                Vec dy = z;
                const Vec gy = gamma_apply(G, v, y);
                for (int i = 0; i < n; ++i) dy[static_cast<std::size_t>(i)] -= gy[static_cast<std::size_t>(i)];
                Vec dz = curv_apply(R, v, y);
                const Vec gz = gamma_apply(G, v, z);
                for (int i = 0; i < n; ++i)
                    dz[static_cast<std::size_t>(i)] = -dz[static_cast<std::size_t>(i)] - gz[static_cast<std::size_t>(i)];
                return std::pair<Vec, Vec>(std::move(dy), std::move(dz));
            };
            const std::size_t cc = static_cast<std::size_t>(c);
            auto [k1y, k1z] = rhs(G0, R0, path.v[node], Y[cc], Z[cc]);
            Vec y2 = Y[cc], z2 = Z[cc];
            axpy(0.5 * hstep, k1y, y2);
            axpy(0.5 * hstep, k1z, z2);
            auto [k2y, k2z] = rhs(Gm, Rm, vm, y2, z2);
            Vec y3 = Y[cc], z3 = Z[cc];
            axpy(0.5 * hstep, k2y, y3);
            axpy(0.5 * hstep, k2z, z3);
            auto [k3y, k3z] = rhs(Gm, Rm, vm, y3, z3);
            Vec y4 = Y[cc], z4 = Z[cc];
            axpy(hstep, k3y, y4);
            axpy(hstep, k3z, z4);
            auto [k4y, k4z] = rhs(G1, R1, path.v[node + 1], y4, z4);
            for (int i = 0; i < n; ++i) {
                const std::size_t ii = static_cast<std::size_t>(i);
                Y[cc][ii] += hstep / 6.0 * (k1y[ii] + 2 * k2y[ii] + 2 * k3y[ii] + k4y[ii]);
                Z[cc][ii] += hstep / 6.0 * (k1z[ii] + 2 * k2z[ii] + 2 * k3z[ii] + k4z[ii]);
            }
        }

        // Transverse coefficient matrix: components of each column on the dY0
        // directions (chart projection is enough for determinant zeros).
        Matrix M(cols, cols);
        for (int a = 0; a < cols; ++a)
            for (int b = 0; b < cols; ++b)
                M(a, b) = dot(Y[static_cast<std::size_t>(b)], dY0[static_cast<std::size_t>(a)]) /
                          dot(dY0[static_cast<std::size_t>(a)], dY0[static_cast<std::size_t>(a)]);
        result.s.push_back(path.s[node + 1]);
        result.det.push_back(determinant(M));
    }
    return result;
}

double oracle_null_arrival_schwarzschild(double m, double r0, double phi_end) {
    // Equatorial chart (t, r, phi) with hard-coded symbols.
    auto accel = [m](const Vec& x, const Vec& v, Vec& a) {
        const double r = x[1];
        const double f = 1.0 - 2.0 * m / r;
        const double g_ttr = m / (r * r * f);
        const double g_rtt = m * f / (r * r);
        const double g_rrr = -m / (r * r * f);
        const double g_rpp = -r * f;
        const double g_prp = 1.0 / r;
        a[0] = -2.0 * g_ttr * v[0] * v[1];
        a[1] = -(g_rtt * v[0] * v[0] + g_rrr * v[1] * v[1] + g_rpp * v[2] * v[2]);
        a[2] = -2.0 * g_prp * v[1] * v[2];
    };

    // Integrate one ray with launch angle alpha until it crosses r = r0 again.
    auto trace = [&](double alpha, double& phi_exit) {
        const double f0 = 1.0 - 2.0 * m / r0;
        Vec x{0.0, r0, 0.0};
        Vec v{1.0 / std::sqrt(f0), std::sqrt(f0) * std::cos(alpha), std::sin(alpha) / r0};
        const double hstep = 2e-4 * r0;
        Vec a(3);
        double prev_r = r0, prev_t = 0.0, prev_phi = 0.0;
        bool away = false;
        for (int it = 0; it < 4000000; ++it) {
            // RK4 step.
            Vec k1x = v, k1v(3);
            accel(x, v, k1v);
            Vec x2 = x, v2 = v;
            axpy(0.5 * hstep, k1x, x2);
            axpy(0.5 * hstep, k1v, v2);
            Vec k2x = v2, k2v(3);
            accel(x2, v2, k2v);
            Vec x3 = x, v3 = v;
            axpy(0.5 * hstep, k2x, x3);
            axpy(0.5 * hstep, k2v, v3);
            Vec k3x = v3, k3v(3);
            accel(x3, v3, k3v);
            Vec x4 = x, v4 = v;
            axpy(hstep, k3x, x4);
            axpy(hstep, k3v, v4);
            Vec k4x = v4, k4v(3);
            accel(x4, v4, k4v);
            prev_r = x[1];
            prev_t = x[0];
            prev_phi = x[2];
            for (int i = 0; i < 3; ++i) {
                x[static_cast<std::size_t>(i)] += hstep / 6.0 *
                    (k1x[static_cast<std::size_t>(i)] + 2 * k2x[static_cast<std::size_t>(i)] +
                     2 * k3x[static_cast<std::size_t>(i)] + k4x[static_cast<std::size_t>(i)]);
                v[static_cast<std::size_t>(i)] += hstep / 6.0 *
                    (k1v[static_cast<std::size_t>(i)] + 2 * k2v[static_cast<std::size_t>(i)] +
                     2 * k3v[static_cast<std::size_t>(i)] + k4v[static_cast<std::size_t>(i)]);
            }
            if (x[1] < r0 - 1e-9 * r0) away = true;
            if (away && x[1] >= r0) {
                const double w = (r0 - prev_r) / (x[1] - prev_r);
                phi_exit = prev_phi + w * (x[2] - prev_phi);
                return prev_t + w * (x[0] - prev_t);
            }
            if (x[1] < 2.05 * m) break;
        }
        phi_exit = 1e9;
        return 1e9;
    };

    // Secant on alpha so that phi_exit = phi_end.
    double a0 = 0.55 * 3.14159265358979323846, a1 = 0.6 * 3.14159265358979323846;
    double p0, p1;
    trace(a0, p0);
    double t_arr = trace(a1, p1);
    for (int it = 0; it < 60; ++it) {
        const double a2 = a1 - (p1 - phi_end) * (a1 - a0) / (p1 - p0);
        a0 = a1;
        p0 = p1;
        a1 = a2;
        t_arr = trace(a1, p1);
        if (std::abs(p1 - phi_end) < 1e-10) break;
    }
    return t_arr;
}

}  // namespace finsler::testing

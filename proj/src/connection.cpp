#include "finsler/connection.hpp"

#include "finsler/numdiff.hpp"
#include "finsler/vertical.hpp"

namespace finsler {

namespace {

Matrix fiber_hessian(const LagrangianModel& model, const Vec& x, const Vec& y) {
    const int n = model.dimension();
    std::vector<Jet> xs, ys;
    for (int i = 0; i < n; ++i) xs.emplace_back(x[static_cast<std::size_t>(i)], n);
    for (int i = 0; i < n; ++i) ys.push_back(Jet::variable(y[static_cast<std::size_t>(i)], i, n));
    const Jet j = model.evaluate_jet(xs, ys);
    Matrix g(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) g(a, b) = j.hess(a, b);
    return g;
}

// D(k, i, j) = dG_ij / dx^k by extrapolated central differences of the exact
// fiber Hessian.
Tensor3 metric_base_derivatives(const LagrangianModel& model, const PointedVector& p) {
    const int n = model.dimension();
    Tensor3 D(n);
    for (int k = 0; k < n; ++k) {
        const double h0 = 4.0 * fd_step(std::abs(p.x[static_cast<std::size_t>(k)]));
        auto slice = [&](double t) {
            Vec x = p.x;
            x[static_cast<std::size_t>(k)] += t;
            return fiber_hessian(model, x, p.y).data();
        };
        const DerivResult r = richardson_central(slice, h0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) D(k, i, j) = r.value[static_cast<std::size_t>(i * n + j)];
    }
    return D;
}

Tensor3 christoffel_from(const Matrix& ginv, const Tensor3& D) {
    const int n = ginv.rows();
    Tensor3 gamma(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double s = 0.0;
                for (int l = 0; l < n; ++l)
                    s += ginv(i, l) * (D(k, l, j) - D(l, j, k) + D(j, l, k));
                gamma(i, j, k) = 0.5 * s;
            }
    return gamma;
}

struct PointContext {
    Matrix g, ginv;
    Tensor3 dg_dx;   // (k, i, j)
    Tensor3 cartan;  // C_ijk
    Tensor3 gamma2;
    Matrix nmat;
    Tensor3 chern;
};

PointContext point_context(const LagrangianModel& model, const PointedVector& p,
                           const Tolerances& tol) {
    const int n = model.dimension();
    PointContext ctx;
    ctx.g = fiber_hessian(model, p.x, p.y);
    FundamentalTensor gt{ctx.g, p};
    require_nondegenerate(gt, tol);
    ctx.ginv = inverse(ctx.g);
    ctx.dg_dx = metric_base_derivatives(model, p);
    ctx.gamma2 = christoffel_from(ctx.ginv, ctx.dg_dx);
    ctx.cartan = model.quadratic_in_y() ? Tensor3(n) : cartan_tensor(model, p, tol).c;

    // Spray contraction and nonlinear connection.
    Vec spray(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < n; ++k)
        for (int r = 0; r < n; ++r)
            for (int s = 0; s < n; ++s)
                spray[static_cast<std::size_t>(k)] +=
                    ctx.gamma2(k, r, s) * p.y[static_cast<std::size_t>(r)] * p.y[static_cast<std::size_t>(s)];
    ctx.nmat = Matrix(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double v = 0.0;
            for (int k = 0; k < n; ++k) v += ctx.gamma2(i, j, k) * p.y[static_cast<std::size_t>(k)];
            double cterm = 0.0;
            for (int k = 0; k < n; ++k) {
                double cup = 0.0;  // C^i_jk = g^il C_ljk
                for (int l = 0; l < n; ++l) cup += ctx.ginv(i, l) * ctx.cartan(l, j, k);
                cterm += cup * spray[static_cast<std::size_t>(k)];
            }
            ctx.nmat(i, j) = v - cterm;
        }

    if (model.quadratic_in_y()) {
        ctx.chern = ctx.gamma2;  // Cartan terms vanish; delta and plain derivatives agree
        return ctx;
    }

    // delta g_ij / dx^k = dg_ij/dx^k - 2 N^l_k C_ijl, then the Christoffel trick.
    Tensor3 Dh(n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double corr = 0.0;
                for (int l = 0; l < n; ++l) corr += ctx.nmat(l, k) * ctx.cartan(i, j, l);
                Dh(k, i, j) = ctx.dg_dx(k, i, j) - 2.0 * corr;
            }
    ctx.chern = christoffel_from(ctx.ginv, Dh);
    return ctx;
}

}  // namespace

Tensor3 christoffel_formal(const LagrangianModel& model, const PointedVector& p,
                           const Tolerances& tol) {
    model.require_regular(p, tol.margin_floor);
    return point_context(model, p, tol).gamma2;
}

Matrix nonlinear_connection(const LagrangianModel& model, const PointedVector& p,
                            const Tolerances& tol) {
    model.require_regular(p, tol.margin_floor);
    return point_context(model, p, tol).nmat;
}

Tensor3 chern_coefficients(const LagrangianModel& model, const PointedVector& p,
                           const Tolerances& tol) {
    model.require_regular(p, tol.margin_floor);
    return point_context(model, p, tol).chern;
}

ConnectionCoefficients connection_coefficients(const LagrangianModel& model,
                                               const PointedVector& p, const Tolerances& tol) {
    model.require_regular(p, tol.margin_floor);
    PointContext ctx = point_context(model, p, tol);
    return {std::move(ctx.gamma2), std::move(ctx.nmat), std::move(ctx.chern), p};
}

namespace {

// Shared curvature assembly: R^i_jkl = d_k W^i_jl - d_l W^i_jk
//                                      + W^i_hk W^h_jl - W^i_hl W^h_jk
// where W is either the Chern coefficients with adapted-frame derivatives or
// the formal Christoffel symbols with plain base derivatives.
Tensor4 curvature_from(const LagrangianModel& model, const PointedVector& p,
                       const Tolerances& tol, CurvatureRoute route) {
    const int n = model.dimension();
    const PointContext ctx = point_context(model, p, tol);
    const Tensor3& W = (route == CurvatureRoute::chern_hh) ? ctx.chern : ctx.gamma2;

    auto coeffs_at = [&](const Vec& x, const Vec& y) {
        const PointedVector q{x, y};
        const PointContext c = point_context(model, q, tol);
        return (route == CurvatureRoute::chern_hh) ? c.chern.data() : c.gamma2.data();
    };

    // Base derivatives of the coefficient tensor (two-level extrapolation on
    // top of the exact-Hessian differencing inside).
    std::vector<Tensor3> dW_dx(static_cast<std::size_t>(n), Tensor3(n));
    for (int l = 0; l < n; ++l) {
        const double h0 = 2e-3 * (1.0 + std::abs(p.x[static_cast<std::size_t>(l)]));
        auto slice = [&](double t) {
            Vec x = p.x;
            x[static_cast<std::size_t>(l)] += t;
            return coeffs_at(x, p.y);
        };
        const DerivResult r = richardson_central(slice, h0, 2);
        dW_dx[static_cast<std::size_t>(l)].data() = r.value;
    }

    // Fiber derivatives only matter off the quadratic case, and only for the
    // adapted-frame route.
    std::vector<Tensor3> dW_dy;
    if (route == CurvatureRoute::chern_hh && !model.quadratic_in_y()) {
        dW_dy.assign(static_cast<std::size_t>(n), Tensor3(n));
        for (int m = 0; m < n; ++m) {
            const double h0 = 2e-3 * (1.0 + norm(p.y));
            auto slice = [&](double t) {
                Vec y = p.y;
                y[static_cast<std::size_t>(m)] += t;
                return coeffs_at(p.x, y);
            };
            const DerivResult r = richardson_central(slice, h0, 2);
            dW_dy[static_cast<std::size_t>(m)].data() = r.value;
        }
    }

    auto delta = [&](int i, int j, int k, int l) {
        // d W^i_jk / dx^l, with the adapted-frame correction when requested.
        double v = dW_dx[static_cast<std::size_t>(l)](i, j, k);
        if (!dW_dy.empty())
            for (int m = 0; m < n; ++m)
                v -= ctx.nmat(m, l) * dW_dy[static_cast<std::size_t>(m)](i, j, k);
        return v;
    };

    Tensor4 R(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double quad = 0.0;
                    for (int h = 0; h < n; ++h)
                        quad += W(i, h, k) * W(h, j, l) - W(i, h, l) * W(h, j, k);
                    R(i, j, k, l) = delta(i, j, l, k) - delta(i, j, k, l) + quad;
                }
    return R;
}

}  // namespace

CurvatureTensor hh_curvature(const LagrangianModel& model, const PointedVector& p,
                             const Tolerances& tol) {
    model.require_regular(p, tol.margin_floor);
    return {curvature_from(model, p, tol, CurvatureRoute::chern_hh), p};
}

CurvatureTensor riemann_formal(const LagrangianModel& model, const PointedVector& p,
                               const Tolerances& tol) {
    model.require_regular(p, tol.margin_floor);
    return {curvature_from(model, p, tol, CurvatureRoute::formal_riemann), p};
}

// ---------------------------------------------------------------------------
// Frames along geodesics
// ---------------------------------------------------------------------------

namespace {

double catmull_rom(double p0, double p1, double p2, double p3, double u) {
    return 0.5 * (2.0 * p1 + (-p0 + p2) * u + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u * u +
                  (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u * u * u);
}

}  // namespace

Vec CurveFrame::interp(const std::vector<Vec>& field, double s, int comps) const {
    double u = (s - s0_) / h_;
    long cell = static_cast<long>(std::floor(u));
    cell = std::max(0L, std::min(cell, static_cast<long>(nodes_) - 2));
    u -= static_cast<double>(cell);
    auto at = [&](long k) -> const Vec& {
        k = std::max(0L, std::min(k, static_cast<long>(nodes_) - 1));
        return field[static_cast<std::size_t>(k)];
    };
    const Vec &f0 = at(cell - 1), &f1 = at(cell), &f2 = at(cell + 1), &f3 = at(cell + 2);
    Vec out(static_cast<std::size_t>(comps));
    for (int c = 0; c < comps; ++c)
        out[static_cast<std::size_t>(c)] =
            catmull_rom(f0[static_cast<std::size_t>(c)], f1[static_cast<std::size_t>(c)],
                        f2[static_cast<std::size_t>(c)], f3[static_cast<std::size_t>(c)], u);
    return out;
}

Vec CurveFrame::x_at(double s) const { return interp(x_, s, n_); }
Vec CurveFrame::v_at(double s) const { return interp(v_, s, n_); }

Vec CurveFrame::chern_apply(double s, std::span<const double> a) const {
    const Vec G = interp(chern_, s, n_ * n_ * n_);
    const Vec v = v_at(s);
    Vec out(static_cast<std::size_t>(n_), 0.0);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            for (int k = 0; k < n_; ++k)
                out[static_cast<std::size_t>(i)] +=
                    G[static_cast<std::size_t>((i * n_ + j) * n_ + k)] *
                    v[static_cast<std::size_t>(j)] * a[static_cast<std::size_t>(k)];
    return out;
}

Vec CurveFrame::curvature_op(double s, std::span<const double> a) const {
    const Vec R = interp(curv_, s, n_ * n_ * n_ * n_);
    const Vec v = v_at(s);
    Vec out(static_cast<std::size_t>(n_), 0.0);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            for (int k = 0; k < n_; ++k)
                for (int l = 0; l < n_; ++l)
                    out[static_cast<std::size_t>(i)] +=
                        R[static_cast<std::size_t>(((i * n_ + j) * n_ + k) * n_ + l)] *
                        v[static_cast<std::size_t>(j)] * a[static_cast<std::size_t>(k)] *
                        v[static_cast<std::size_t>(l)];
    return out;
}

Vec CurveFrame::covariant_derivative(double s, std::span<const double> a,
                                     std::span<const double> dads) const {
    Vec out = chern_apply(s, a);
    for (int i = 0; i < n_; ++i) out[static_cast<std::size_t>(i)] += dads[static_cast<std::size_t>(i)];
    return out;
}

double CurveFrame::pairing(double s, std::span<const double> u, std::span<const double> w) const {
    const PointedVector p{x_at(s), v_at(s)};
    return metric_pairing(*model_, p, u, w);
}

CurveFrame build_curve_frame(const LagrangianModel& model,
                             const std::function<Vec(double)>& position,
                             const std::function<Vec(double)>& velocity, double s0, double s1,
                             int grid, CurvatureRoute route, const Tolerances& tol) {
    CurveFrame fr;
    fr.model_ = &model;
    fr.n_ = model.dimension();
    fr.s0_ = s0;
    fr.s1_ = s1;
    fr.nodes_ = static_cast<std::size_t>(grid);
    fr.h_ = (fr.s1_ - fr.s0_) / (grid - 1);
    fr.x_.resize(fr.nodes_);
    fr.v_.resize(fr.nodes_);
    fr.chern_.resize(fr.nodes_);
    fr.curv_.resize(fr.nodes_);
    for (int k = 0; k < grid; ++k) {
        const double s = fr.s0_ + fr.h_ * k;
        PointedVector p{position(s), velocity(s)};
        const PointContext ctx = point_context(model, p, tol);
        fr.chern_[static_cast<std::size_t>(k)] =
            (route == CurvatureRoute::chern_hh) ? ctx.chern.data() : ctx.gamma2.data();
        fr.curv_[static_cast<std::size_t>(k)] = curvature_from(model, p, tol, route).data();
        fr.x_[static_cast<std::size_t>(k)] = std::move(p.x);
        fr.v_[static_cast<std::size_t>(k)] = std::move(p.y);
    }
    return fr;
}

CurveFrame build_curve_frame(const LagrangianModel& model, const GeodesicPath& path, int grid,
                             CurvatureRoute route, const Tolerances& tol) {
    return build_curve_frame(
        model, [&path](double s) { return path.position(s); },
        [&path](double s) { return path.velocity(s); }, path.s_begin(), path.s_end(), grid, route,
        tol);
}

std::vector<Vec> covariant_derivative_along(const CurveFrame& frame,
                                            const std::function<Vec(double)>& field,
                                            const std::function<Vec(double)>& field_deriv,
                                            const std::vector<double>& params) {
    std::vector<Vec> out;
    out.reserve(params.size());
    for (double s : params) out.push_back(frame.covariant_derivative(s, field(s), field_deriv(s)));
    return out;
}

}  // namespace finsler

#include "finsler/vertical.hpp"

#include <algorithm>

namespace finsler {

namespace {

Matrix fiber_hessian_at(const LagrangianModel& model, const Vec& x, const Vec& y) {
    const int n = model.dimension();
    std::vector<Jet> xs, ys;
    xs.reserve(n);
    ys.reserve(n);
    for (int i = 0; i < n; ++i) xs.emplace_back(x[static_cast<std::size_t>(i)], n);
    for (int i = 0; i < n; ++i) ys.push_back(Jet::variable(y[static_cast<std::size_t>(i)], i, n));
    const Jet j = model.evaluate_jet(xs, ys);
    Matrix g(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) g(a, b) = j.hess(a, b);
    return g;
}

// d/dy^k of the exact fiber Hessian, by extrapolated central differences.
Tensor3 third_fiber_derivative(const LagrangianModel& model, const PointedVector& p,
                               const Tolerances& tol) {
    const int n = model.dimension();
    Tensor3 d3(n);
    if (model.quadratic_in_y()) return d3;

    const double h0 = 4.0 * fd_step(norm(p.y));
    for (int k = 0; k < n; ++k) {
        auto slice = [&](double t) {
            Vec y = p.y;
            y[static_cast<std::size_t>(k)] += t;
            return fiber_hessian_at(model, p.x, y).data();
        };
        DerivResult r = richardson_central(slice, h0);
        if (!std::isfinite(r.err_estimate) || r.err_estimate > 1e-5 * (1.0 + max_abs(r.value)))
            throw NumericalBreakdown(model.name() +
                                     ": third fiber derivative extrapolation did not converge");
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                d3(i, j, k) = r.value[static_cast<std::size_t>(i * n + j)];
    }
    (void)tol;
    // Full symmetrization; the raw estimate is symmetric up to differencing noise.
    Tensor3 sym(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                sym(i, j, k) = (d3(i, j, k) + d3(i, k, j) + d3(j, i, k) + d3(j, k, i) +
                                d3(k, i, j) + d3(k, j, i)) / 6.0;
    return sym;
}

}  // namespace

double evaluate(const LagrangianModel& model, const PointedVector& p, const Tolerances& tol) {
    model.require_regular(p, tol.margin_floor);
    return model.evaluate_raw(p.x, p.y);
}

DerivativeBundle derivative_bundle(const LagrangianModel& model, const PointedVector& p,
                                   const Tolerances& tol) {
    model.require_regular(p, tol.margin_floor);
    const int n = model.dimension();
    const Jet j = eval_full_jet(model, p);

    DerivativeBundle b;
    b.L = j.value();
    b.dL_dx.resize(static_cast<std::size_t>(n));
    b.dL_dy.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        b.dL_dx[static_cast<std::size_t>(i)] = j.grad(i);
        b.dL_dy[static_cast<std::size_t>(i)] = j.grad(n + i);
    }
    b.d2L_dydy = Matrix(n, n);
    b.d2L_dxdy = Matrix(n, n);
    for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c) {
            b.d2L_dydy(a, c) = j.hess(n + a, n + c);
            b.d2L_dxdy(a, c) = j.hess(a, n + c);  // [x index][y index]
        }
    b.d3L_dydydy = third_fiber_derivative(model, p, tol);
    return b;
}

FundamentalTensor fundamentalTensor_impl(const LagrangianModel& model, const PointedVector& p) {
    FundamentalTensor gt;
    gt.g = fiber_hessian_at(model, p.x, p.y);
    gt.base = p;
    return gt;
}

FundamentalTensor fundamental_tensor(const LagrangianModel& model, const PointedVector& p,
                                     const Tolerances& tol) {
    model.require_regular(p, tol.margin_floor);
    FundamentalTensor gt = fundamentalTensor_impl(model, p);
    require_nondegenerate(gt, tol);
    return gt;
}

void require_nondegenerate(const FundamentalTensor& gt, const Tolerances& tol) {
    const int n = gt.g.rows();
    const double scale = gt.scale();
    if (std::abs(gt.det()) < tol.degeneracy_factor * std::pow(scale, n))
        throw DegenerateMetric("fundamental tensor numerically degenerate, |det| = " +
                               std::to_string(gt.det()));
}

CartanTensor cartan_tensor(const LagrangianModel& model, const PointedVector& p,
                           const Tolerances& tol) {
    model.require_regular(p, tol.margin_floor);
    const int n = model.dimension();
    CartanTensor ct;
    ct.base = p;
    ct.c = Tensor3(n);
    if (model.quadratic_in_y()) return ct;
    const Tensor3 d3 = third_fiber_derivative(model, p, tol);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) ct.c(i, j, k) = 0.5 * d3(i, j, k);
    return ct;
}

double raw_pairing(const LagrangianModel& model, const PointedVector& p,
                   std::span<const double> u, std::span<const double> v) {
    const Matrix g = fiber_hessian_at(model, p.x, p.y);
    double s = 0.0;
    const int n = g.rows();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += g(i, j) * u[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)];
    return s;
}

double metric_pairing(const LagrangianModel& model, const PointedVector& p,
                      std::span<const double> u, std::span<const double> v) {
    return 0.5 * raw_pairing(model, p, u, v);
}

AxiomReport check_axioms(const LagrangianModel& model, const std::vector<PointedVector>& samples,
                         const Tolerances& tol) {
    AxiomReport rep;
    const int n = model.dimension();
    const double ks[] = {0.5, 2.0, 3.0};

    for (const PointedVector& p : samples) {
        model.require_regular(p, tol.margin_floor);
        ++rep.samples;
        const double L = model.evaluate_raw(p.x, p.y);
        const double lscale = 1.0 + std::abs(L);

        for (double k : ks) {
            const double Lk = model.evaluate_raw(p.x, scaled(p.y, k));
            rep.max_homogeneity =
                std::max(rep.max_homogeneity, std::abs(Lk - k * k * L) / lscale);
        }

        const Jet j = eval_fiber_jet(model, p);
        Matrix g(n, n);
        Vec dLdy(static_cast<std::size_t>(n));
        for (int a = 0; a < n; ++a) {
            dLdy[static_cast<std::size_t>(a)] = j.grad(a);
            for (int b = 0; b < n; ++b) g(a, b) = j.hess(a, b);
        }
        const double gscale = 1.0 + g.max_abs();

        double euler_grad = dot(dLdy, p.y) - 2.0 * L;
        rep.max_euler_grad = std::max(rep.max_euler_grad, std::abs(euler_grad) / lscale);

        Vec gy = g.apply(p.y);
        for (int a = 0; a < n; ++a)
            rep.max_euler_metric = std::max(
                rep.max_euler_metric,
                std::abs(gy[static_cast<std::size_t>(a)] - dLdy[static_cast<std::size_t>(a)]) /
                    (gscale * (1.0 + norm(p.y))));

        const double half_gyy = 0.5 * dot(gy, p.y);
        rep.max_euler_value = std::max(rep.max_euler_value, std::abs(half_gyy - L) / lscale);

        rep.max_g_asymmetry = std::max(rep.max_g_asymmetry, g.symmetry_defect() / gscale);

        if (!model.quadratic_in_y()) {
            const CartanTensor ct = cartan_tensor(model, p, tol);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    double contr = 0.0;
                    for (int k = 0; k < n; ++k) contr += ct.c(a, b, k) * p.y[static_cast<std::size_t>(k)];
                    rep.max_cartan_contraction =
                        std::max(rep.max_cartan_contraction, std::abs(contr) / gscale);
                }
        }

        const Signature sig = metric_signature(g, 1e-10 * gscale);
        if (!sig.lorentzian(n)) {
            rep.signature_ok = false;
            ++rep.signature_failures;
        }
    }
    return rep;
}

ReversibilityReport check_reversibility(const LagrangianModel& model,
                                        const std::vector<PointedVector>& samples,
                                        const Tolerances& tol) {
    ReversibilityReport rep;
    double scale = 0.0;
    for (const PointedVector& p : samples) {
        model.require_regular(p, tol.margin_floor);
        PointedVector q{p.x, scaled(p.y, -1.0)};
        // The comparison needs only values of L, so the reversed branch is
        // admitted on the evaluable domain (signature-restricted models keep
        // L smooth across the reversal even where g loses its signature).
        if (model.evaluable_margin(q) <= tol.margin_floor) {
            ++rep.skipped_singular;
            continue;
        }
        const double Lp = model.evaluate_raw(p.x, p.y);
        const double Lm = model.evaluate_raw(q.x, q.y);
        rep.max_deviation = std::max(rep.max_deviation, std::abs(Lp - Lm));
        scale = std::max(scale, std::abs(Lp));
    }
    rep.reversible = rep.max_deviation <= tol.band(scale);
    return rep;
}

}  // namespace finsler

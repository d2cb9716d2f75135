#pragma once

#include "finsler/lagrangian.hpp"
#include "finsler/numdiff.hpp"

// Fiber and base derivatives of the Lagrangian, the fundamental and Cartan
// tensors, and the defining-axiom checks.
//
// Convention, documented once here and used consistently everywhere: the
// stored fundamental tensor is the full vertical Hessian
//
//     G_ij(x,y) = d^2 L / dy^i dy^j,
//
// so Euler's theorem gives dL/dy_i = G_ij y^j and L = (1/2) G_ij y^i y^j
// exactly. For a quadratic Lagrangian L = h(y,y) this makes G = 2h. Reported
// inner products therefore use the half-scaled pairing
//
//     <u,v>_(x,y) = (1/2) G_ij(x,y) u^i v^j,
//
// which reproduces the metric h for quadratic models and satisfies
// <y,y> = L(x,y) for every model. The uniform factor cancels in every sign
// test, orthogonality condition and Hessian ratio downstream.

namespace finsler {

struct FundamentalTensor {
    Matrix g;  // G_ij = d2L/dy^i dy^j
    PointedVector base;

    double det() const { return determinant(g); }
    double scale() const { return std::max(g.max_abs(), 1e-300); }
};

struct CartanTensor {
    Tensor3 c;  // C_ijk = (1/2) dG_ij/dy^k, totally symmetric
    PointedVector base;
};

struct DerivativeBundle {
    double L = 0.0;
    Vec dL_dy;          // n
    Vec dL_dx;          // n
    Matrix d2L_dydy;    // n x n fiber Hessian
    Matrix d2L_dxdy;    // [k][i] = d2L/dx^k dy^i
    Tensor3 d3L_dydydy; // third fiber derivatives
};

struct AxiomReport {
    int samples = 0;
    double max_homogeneity = 0.0;        // |L(x,ky) - k^2 L| / (1+|L|), k in {0.5, 2, 3}
    double max_euler_grad = 0.0;         // |dL/dy . y - 2L| / (1+|L|)
    double max_euler_metric = 0.0;       // |G y - dL/dy| / (1 + |G| |y|)
    double max_euler_value = 0.0;        // |(1/2) G y y - L| / (1+|L|)
    double max_g_asymmetry = 0.0;        // symmetry defect of G / (1+|G|)
    double max_cartan_contraction = 0.0; // |C_ij. y| / (1+|G|)
    bool signature_ok = true;
    int signature_failures = 0;

    double worst() const {
        double w = std::max({max_homogeneity, max_euler_grad, max_euler_metric,
                             max_euler_value, max_g_asymmetry, max_cartan_contraction});
        return w;
    }
};

struct ReversibilityReport {
    bool reversible = false;
    double max_deviation = 0.0;
    int skipped_singular = 0;
};

// L(x,y). Throws SingularPoint outside the regular domain.
double evaluate(const LagrangianModel& model, const PointedVector& p,
                const Tolerances& tol = default_tolerances());

DerivativeBundle derivative_bundle(const LagrangianModel& model, const PointedVector& p,
                                   const Tolerances& tol = default_tolerances());

FundamentalTensor fundamental_tensor(const LagrangianModel& model, const PointedVector& p,
                                     const Tolerances& tol = default_tolerances());

CartanTensor cartan_tensor(const LagrangianModel& model, const PointedVector& p,
                           const Tolerances& tol = default_tolerances());

AxiomReport check_axioms(const LagrangianModel& model, const std::vector<PointedVector>& samples,
                         const Tolerances& tol = default_tolerances());

ReversibilityReport check_reversibility(const LagrangianModel& model,
                                        const std::vector<PointedVector>& samples,
                                        const Tolerances& tol = default_tolerances());

// Stored-tensor contraction G_ij u^i v^j at p.
double raw_pairing(const LagrangianModel& model, const PointedVector& p,
                   std::span<const double> u, std::span<const double> v);

// Half-scaled pairing <u,v> = (1/2) G_ij u^i v^j; <y,y> = L.
double metric_pairing(const LagrangianModel& model, const PointedVector& p,
                      std::span<const double> u, std::span<const double> v);

inline double raw_pairing(const FundamentalTensor& gt, std::span<const double> u,
                          std::span<const double> v) {
    double s = 0.0;
    const int n = gt.g.rows();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += gt.g(i, j) * u[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)];
    return s;
}

inline double metric_pairing(const FundamentalTensor& gt, std::span<const double> u,
                             std::span<const double> v) {
    return 0.5 * raw_pairing(gt, u, v);
}

// Throws DegenerateMetric when |det G| < degeneracy_factor * scale^n.
void require_nondegenerate(const FundamentalTensor& gt, const Tolerances& tol);

}  // namespace finsler

#pragma once

#include "finsler/geodesic.hpp"

// Formal Christoffel symbols, nonlinear connection, Chern coefficients in the
// adapted frame, hh-curvature, and cached evaluation of all of it along a
// geodesic with cubic dense interpolation between grid nodes.

namespace finsler {

struct ConnectionCoefficients {
    Tensor3 gamma2;  // formal second-kind Christoffel symbols
    Matrix nmat;     // nonlinear connection N^i_j
    Tensor3 chern;   // Chern connection coefficients, symmetric lower indices
    PointedVector base;
};

struct CurvatureTensor {
    Tensor4 r;  // R^i_jkl, antisymmetric in (k, l)
    PointedVector base;
};

Tensor3 christoffel_formal(const LagrangianModel& model, const PointedVector& p,
                           const Tolerances& tol = default_tolerances());

Matrix nonlinear_connection(const LagrangianModel& model, const PointedVector& p,
                            const Tolerances& tol = default_tolerances());

Tensor3 chern_coefficients(const LagrangianModel& model, const PointedVector& p,
                           const Tolerances& tol = default_tolerances());

ConnectionCoefficients connection_coefficients(const LagrangianModel& model,
                                               const PointedVector& p,
                                               const Tolerances& tol = default_tolerances());

// Horizontal-horizontal curvature from the Chern coefficients, with the
// adapted-frame derivatives d/dx - N d/dy.
CurvatureTensor hh_curvature(const LagrangianModel& model, const PointedVector& p,
                             const Tolerances& tol = default_tolerances());

// Plain-base-derivative arrangement of the formal Christoffel symbols; agrees
// with the hh-curvature along geodesics.
CurvatureTensor riemann_formal(const LagrangianModel& model, const PointedVector& p,
                               const Tolerances& tol = default_tolerances());

enum class CurvatureRoute { chern_hh, formal_riemann };

// Connection and curvature sampled on a uniform grid along a geodesic, with
// cubic interpolation for continuous queries. The base fiber vector at each
// node is the curve velocity.
class CurveFrame {
public:
    CurveFrame() = default;

    double s_begin() const { return s0_; }
    double s_end() const { return s1_; }
    int grid_size() const { return static_cast<int>(nodes_); }
    int dim() const { return n_; }
    const LagrangianModel& model() const { return *model_; }

    Vec x_at(double s) const;
    Vec v_at(double s) const;

    // Chern coefficients contracted as Gamma(v, a): out^i = Gamma^i_jk v^j a^k.
    Vec chern_apply(double s, std::span<const double> a) const;

    // (R(a, v) v)^i = R^i_jkl v^j a^k v^l.
    Vec curvature_op(double s, std::span<const double> a) const;

    // Covariant derivative along the curve: (da/ds)^i + Gamma^i_jk v^j a^k.
    Vec covariant_derivative(double s, std::span<const double> a,
                             std::span<const double> dads) const;

    // Half-scaled pairing <u, w> at the interpolated base point, evaluated
    // fresh from the model.
    double pairing(double s, std::span<const double> u, std::span<const double> w) const;

    friend CurveFrame build_curve_frame(const LagrangianModel& model,
                                        const std::function<Vec(double)>& position,
                                        const std::function<Vec(double)>& velocity, double s0,
                                        double s1, int grid, CurvatureRoute route,
                                        const Tolerances& tol);

private:
    Vec interp(const std::vector<Vec>& field, double s, int comps) const;

    const LagrangianModel* model_ = nullptr;
    double s0_ = 0.0, s1_ = 1.0, h_ = 0.0;
    std::size_t nodes_ = 0;
    int n_ = 0;
    std::vector<Vec> x_, v_, chern_, curv_;
};

CurveFrame build_curve_frame(const LagrangianModel& model,
                             const std::function<Vec(double)>& position,
                             const std::function<Vec(double)>& velocity, double s0, double s1,
                             int grid = 257, CurvatureRoute route = CurvatureRoute::chern_hh,
                             const Tolerances& tol = default_tolerances());

CurveFrame build_curve_frame(const LagrangianModel& model, const GeodesicPath& path,
                             int grid = 257, CurvatureRoute route = CurvatureRoute::chern_hh,
                             const Tolerances& tol = default_tolerances());

// The reduced (plain-derivative) curvature frame along a geodesic.
inline CurveFrame riemann_along_geodesic(const LagrangianModel& model, const GeodesicPath& path,
                                         int grid = 257,
                                         const Tolerances& tol = default_tolerances()) {
    return build_curve_frame(model, path, grid, CurvatureRoute::formal_riemann, tol);
}

// Samples of the covariant derivative of a field given by callables.
std::vector<Vec> covariant_derivative_along(const CurveFrame& frame,
                                            const std::function<Vec(double)>& field,
                                            const std::function<Vec(double)>& field_deriv,
                                            const std::vector<double>& params);

}  // namespace finsler

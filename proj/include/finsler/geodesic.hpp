#pragma once

#include "finsler/causal.hpp"

// Affine geodesics of the Lagrangian from its Euler-Lagrange equations,
// integrated with an embedded Runge-Kutta 5(4) pair, dense output and
// singular-set event detection. Energy (the value of L along the curve) is
// monitored post hoc, never projected, so drift is an honest quality signal.

namespace finsler {

struct GeodesicIVP {
    Vec x0;
    Vec y0;
    double s0 = 0.0;
    double s1 = 1.0;
};

struct IntegratorOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double initial_step = 1e-3;
    int max_steps = 2000000;
    bool check_energy = true;
    double energy_tol = 1e-8;
};

struct IntegratorStats {
    int steps = 0;
    int rejected = 0;
    double rtol = 0.0;
    double atol = 0.0;
};

// One accepted step's interpolation data (order-4 continuous extension).
struct DenseSegment {
    double s0 = 0.0;
    double h = 0.0;
    std::vector<Vec> rcont;  // five coefficient vectors over the state (x, v)

    Vec eval(double s) const;
};

class GeodesicPath {
public:
    GeodesicPath() = default;
    GeodesicPath(std::vector<CurveSample> nodes, std::vector<double> energies,
                 std::vector<DenseSegment> segments, IntegratorStats stats);

    const std::vector<CurveSample>& nodes() const { return nodes_; }
    const std::vector<double>& energies() const { return energies_; }
    const IntegratorStats& stats() const { return stats_; }

    double s_begin() const { return nodes_.front().s; }
    double s_end() const { return nodes_.back().s; }

    Vec position(double s) const;
    Vec velocity(double s) const;
    CurveSample state(double s) const;

    double energy_level() const { return energies_.front(); }
    double energy_drift() const;

    std::vector<CurveSample> resample(int count) const;

private:
    const DenseSegment& segment_at(double s) const;

    std::vector<CurveSample> nodes_;
    std::vector<double> energies_;
    std::vector<DenseSegment> segments_;
    IntegratorStats stats_;
};

// Acceleration from g_ij xdd^j = dL/dx^i - (d2L/dx^k dy^i) xd^k.
Vec geodesic_acceleration(const LagrangianModel& model, const PointedVector& p,
                          const Tolerances& tol = default_tolerances());

GeodesicPath integrate(const LagrangianModel& model, const GeodesicIVP& ivp,
                       const IntegratorOptions& opts = {},
                       const Tolerances& tol = default_tolerances());

// Recovers an affine parameterization of a pre-geodesic given on a uniform
// sample grid, inferring the proportionality function from the component of
// the acceleration defect parallel to the velocity.
struct AffineReparam {
    GeodesicPath path;      // affine geodesic on [0, 1]
    Vec f_nodes;            // recovered proportionality function at input nodes
    Vec input_params;       // parameter values of the input samples
    double orthogonal_residual = 0.0;
};

AffineReparam affine_reparameterize(const LagrangianModel& model,
                                    const std::vector<CurveSample>& curve,
                                    const IntegratorOptions& opts = {},
                                    const Tolerances& tol = default_tolerances());

// Integral of sqrt(-L) over [r1, r2] on the dense output. The fundamental
// tensor convention makes (1/2) G(v, v) = L, so this is the proper time of
// the half-scaled pairing.
double proper_time(const LagrangianModel& model, const GeodesicPath& path, double r1, double r2,
                   const Tolerances& tol = default_tolerances());

// CSV with 17-significant-digit columns s, x..., xdot..., L.
void export_csv(const LagrangianModel& model, const GeodesicPath& path, std::ostream& os,
                int samples = 201);

// Adaptive Simpson quadrature shared by the path functionals.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 30);

}  // namespace finsler

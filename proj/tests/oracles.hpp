#pragma once

// Independent oracles for the test suites. Everything here differentiates
// metric components directly with plain finite-difference stencils and
// integrates with fixed-step RK4, so it shares no code path with the library
// implementation it checks.

#include <functional>

#include "finsler/core.hpp"

namespace finsler::testing {

using MetricFn = std::function<void(const Vec& x, Matrix& g)>;

MetricFn minkowski_metric(int n);
MetricFn schwarzschild_metric(double m);
MetricFn r_s2_metric();

Matrix oracle_metric(const MetricFn& h, const Vec& x);

// Levi-Civita symbols gamma^i_jk by five-point differencing of h.
Tensor3 oracle_christoffel(const MetricFn& h, const Vec& x);

// Standard curvature arrangement R^i_jkl with (k, l) the antisymmetric pair,
// (R(X, Y) Z)^i = R^i_jkl Z^j X^k Y^l.
Tensor4 oracle_riemann(const MetricFn& h, const Vec& x);

struct OraclePath {
    std::vector<double> s;
    std::vector<Vec> x;
    std::vector<Vec> v;
};

// Fixed-step RK4 on xdd = -gamma(x)(v, v).
OraclePath oracle_integrate(const MetricFn& h, Vec x0, Vec v0, double s_end, int steps);

// Matrix Jacobi system along an oracle path with Y(0) = 0 and the given
// initial covariant derivatives as columns; returns det of the transverse
// coefficient matrix on the path nodes.
struct OracleJacobi {
    std::vector<double> s;
    std::vector<double> det;
};
OracleJacobi oracle_jacobi_determinant(const MetricFn& h, const OraclePath& path,
                                       const std::vector<Vec>& dY0);

// Equatorial Schwarzschild null ray from (r0, phi = 0) to (r0, phi = phi_end),
// solved by secant on the launch angle with hard-coded textbook symbols.
// Returns the coordinate-time arrival.
double oracle_null_arrival_schwarzschild(double m, double r0, double phi_end);

}  // namespace finsler::testing

#pragma once

#include "finsler/connection.hpp"
#include "finsler/interp.hpp"

// Time-arrival functional on admissible curves, two-point shooting onto an
// observer worldline, numerical first and second variations, index form,
// Jacobi fields, conjugate points and the Morse index of the arrival-time
// Hessian.
//
// Chart convention used by the variational machinery: coordinate 0 is the
// time coordinate, observers are parameterized by it, and the energy
// constraint L = -c^2 is restored along perturbed curves by solving for the
// time component of the velocity (a scalar ODE in the time coordinate).

namespace finsler {

// A curve on [0, 1] held as uniform-grid samples with cubic interpolation.
class SampledPath {
public:
    SampledPath() = default;
    SampledPath(std::vector<Vec> positions, std::vector<Vec> velocities);

    Vec position(double s) const { return pos_.at(s); }
    Vec velocity(double s) const { return vel_.at(s); }
    std::size_t size() const { return pos_.size(); }
    std::vector<CurveSample> samples() const;

private:
    UniformGrid pos_, vel_;
};

// Member of the admissible class: starts at q, ends on the observer, has
// constant energy -c^2 and stays future pointed.
struct AdmissibleCurve {
    SampledPath curve;
    std::shared_ptr<const GeodesicPath> geodesic;  // set when produced by shoot
    Vec q;
    double tau = 0.0;
    double c = 0.0;
    double energy_drift = 0.0;
    double endpoint_distance = 0.0;
    bool future_pointed = false;

    Vec position(double s) const;
    Vec velocity(double s) const;
};

// A vector field along a curve: a spatial profile plus the orthogonality
// completion of its time component.
struct VariationField {
    std::function<Vec(double)> spatial;   // n-1 components
    std::function<Vec(double)> dspatial;
    std::function<Vec(double)> full;      // n components, g(v, A) = 0 pointwise
    std::function<Vec(double)> dfull;
};

struct JacobiField {
    std::vector<double> s;
    std::vector<Vec> y;   // Y(s)
    std::vector<Vec> cy;  // covariant derivative of Y
    Vec y_at(double s) const;
    Vec cy_at(double s) const;
    double max_residual = 0.0;  // Jacobi equation defect at checkpoints
};

struct ConjugatePoint {
    double s;
    int multiplicity;
};

enum class CriticalCharacter { local_min, saddle, boundary_case };
std::string to_string(CriticalCharacter c);

struct SecondVariationSample {
    double fd_hessian = 0.0;
    double prediction = 0.0;
    double relative_gap = 0.0;
};

struct FirstVariationReport {
    double max_abs_derivative = 0.0;          // over the generator family
    std::vector<double> derivatives;          // FD dtau/deps per generator
    std::vector<double> formula_values;       // boundary/EL identity route
    double max_formula_gap = 0.0;
};

struct FermatReport {
    std::string model_name;
    std::map<std::string, double> params;
    Vec q;
    std::string observer_desc;
    double c = 0.0;
    double tau = 0.0;
    double first_variation_residual = 0.0;
    std::vector<ConjugatePoint> conjugate_points;
    int morse_index = 0;
    CriticalCharacter character = CriticalCharacter::local_min;
    std::vector<SecondVariationSample> second_variation;
};

// ---------------------------------------------------------------------------
// Arrival parameter and the energy shell
// ---------------------------------------------------------------------------

struct ArrivalOptions {
    double capture_radius = 1e-9;
    int scan_points = 256;
};

// Observer parameter at which `endpoint` meets the worldline: root of the
// distance minimization, with ambiguity detection inside the capture radius.
double time_arrival(const Observer& obs, const Vec& endpoint, const ArrivalOptions& opts = {});

inline double time_arrival(const Observer& obs, const AdmissibleCurve& curve,
                           const ArrivalOptions& opts = {}) {
    return time_arrival(obs, curve.position(1.0), opts);
}

// Positive rescaling onto the shell L = -c^2 (c > 0), or chart normalization
// for c = 0; WrongShell when the causal type does not match.
Vec energy_shell_project(const LagrangianModel& model, const Vec& x, const Vec& y, double c,
                         const Tolerances& tol = default_tolerances());

// ---------------------------------------------------------------------------
// Shooting
// ---------------------------------------------------------------------------

struct ShootOptions {
    int max_iters = 200;
    double capture_radius = 1e-9;
    double fd_eps = 1e-7;
    IntegratorOptions integrator;
};

AdmissibleCurve shoot(const LagrangianModel& model, const Vec& q, const Observer& obs, double c,
                      const TimeOrientation& T, const Vec& initial_direction,
                      const ShootOptions& opts = {}, const Tolerances& tol = default_tolerances());

// ---------------------------------------------------------------------------
// Allowed variations
// ---------------------------------------------------------------------------

struct VariationOptions {
    int grid = 801;
    double fd_step = 1e-3;        // epsilon step for dtau/deps
    double hess_step = 8e-3;      // epsilon step for d2tau/deps2
    int max_endpoint_iters = 12;
    double endpoint_tol = 1e-11;
};

// One-parameter family of admissible curves around a base admissible curve:
// spatial perturbation by eps * A, energy restored through the time
// component, endpoint re-timed onto the observer.
class AllowedVariationFamily {
public:
    AllowedVariationFamily(const LagrangianModel& model, const AdmissibleCurve& base,
                           const Observer& obs, const TimeOrientation& T,
                           std::function<Vec(double)> a_spatial,
                           std::function<Vec(double)> da_spatial,
                           const VariationOptions& opts = {},
                           const Tolerances& tol = default_tolerances());

    double tau(double eps) const;
    SampledPath curve(double eps) const;

    // Realized variation field dLambda/deps at eps = 0 by central differences.
    Vec realized_field(double s, double eps_probe = 1e-4) const;

    const LagrangianModel& model() const { return *model_; }
    int grid() const { return opts_.grid; }

private:
    struct Build {
        SampledPath path;
        double tau;
    };
    Build build(double eps) const;

    const LagrangianModel* model_;
    const Observer* obs_;
    TimeOrientation T_;
    std::function<Vec(double)> base_spatial_, dbase_spatial_, a_spatial_, da_spatial_;
    double t_q_ = 0.0;
    double psi0_ = 1.0;  // initial future branch for the shell solve
    double c_ = 0.0;
    bool moving_observer_ = false;
    VariationOptions opts_;
    Tolerances tol_;
};

// Seeded family of smooth spatial generators vanishing at both endpoints.
std::vector<std::pair<std::function<Vec(double)>, std::function<Vec(double)>>>
variation_generators(int n, int count, std::uint64_t seed);

FirstVariationReport first_variation_tau(const LagrangianModel& model,
                                         const AdmissibleCurve& base, const Observer& obs,
                                         const TimeOrientation& T, int generator_count,
                                         std::uint64_t seed, const VariationOptions& opts = {},
                                         const Tolerances& tol = default_tolerances());

// Admissible curve through a prescribed spatial profile (used for the
// non-geodesic converse probes): energy restored the same way as variations.
AdmissibleCurve admissible_from_spatial(const LagrangianModel& model, const Vec& q,
                                        const Observer& obs, double c, const TimeOrientation& T,
                                        const std::function<Vec(double)>& spatial,
                                        const std::function<Vec(double)>& dspatial,
                                        const VariationOptions& opts = {},
                                        const Tolerances& tol = default_tolerances());

// ---------------------------------------------------------------------------
// Index form and second variation
// ---------------------------------------------------------------------------

// Completion of a spatial profile to a field with g(v, A) = 0 along the base.
VariationField make_transverse_field(const LagrangianModel& model, const AdmissibleCurve& base,
                                     std::function<Vec(double)> spatial,
                                     std::function<Vec(double)> dspatial);

// J(A, B) = int [ <B, R(A,v)v> - <DA, DB> ] ds on the curve frame.
double index_form(const CurveFrame& frame, const VariationField& a, const VariationField& b,
                  double quad_tol = 1e-11);

// Integrated-by-parts arrangement, valid for B vanishing at the endpoints:
// J(A, B) = int <B, DDA + R(A,v)v> ds.
double index_form_by_parts(const CurveFrame& frame, const VariationField& a,
                           const VariationField& b, double quad_tol = 1e-11);

SecondVariationSample second_variation_check(const LagrangianModel& model,
                                             const AdmissibleCurve& base, const Observer& obs,
                                             const TimeOrientation& T, const CurveFrame& frame,
                                             const VariationField& a,
                                             const VariationOptions& opts = {},
                                             const Tolerances& tol = default_tolerances());

// tau-Hessian on a Fourier basis of transverse fields via polarization of the
// diagonal second variations.
Matrix tau_hessian_fourier(const LagrangianModel& model, const AdmissibleCurve& base,
                           const Observer& obs, const TimeOrientation& T, const CurveFrame& frame,
                           int modes, const VariationOptions& opts = {},
                           const Tolerances& tol = default_tolerances());

// ---------------------------------------------------------------------------
// Jacobi fields, conjugate points, Morse index
// ---------------------------------------------------------------------------

JacobiField jacobi_integrate(const CurveFrame& frame, const Vec& y0, const Vec& cy0,
                             int steps = 4000);

struct ConjugateSearch {
    std::vector<ConjugatePoint> points;
    std::vector<double> det_samples;  // transverse determinant on the scan grid
    std::vector<double> s_samples;
};

ConjugateSearch find_conjugate_points(const LagrangianModel& model, const AdmissibleCurve& base,
                                      const CurveFrame& frame,
                                      const Tolerances& tol = default_tolerances());

// Sum of interior multiplicities; EndpointConjugate if a conjugate parameter
// sits at s = 1 within tolerance.
int morse_index(const ConjugateSearch& search, double endpoint_band = 1e-6);

CriticalCharacter classify_critical_point(const ConjugateSearch& search,
                                          double endpoint_band = 1e-6);

// Integral of L along the curve.
double energy_functional(const LagrangianModel& model, const AdmissibleCurve& curve,
                         double quad_tol = 1e-12);

// Connection/curvature frame along an admissible geodesic.
inline CurveFrame frame_for(const LagrangianModel& model, const AdmissibleCurve& base,
                            int grid = 257, const Tolerances& tol = default_tolerances()) {
    return build_curve_frame(
        model, [&base](double s) { return base.position(s); },
        [&base](double s) { return base.velocity(s); }, 0.0, 1.0, grid,
        CurvatureRoute::chern_hh, tol);
}

}  // namespace finsler

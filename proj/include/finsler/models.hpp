#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "finsler/lagrangian.hpp"

// Built-in spacetime catalog: the flat and curved Lorentzian baselines plus
// the non-quadratic families (Rutz, Bogoslovsky, rainbow, bi-metric,
// Berwald-Moor perturbation, dielectric medium, Beem's cone example).
// All charts put the time coordinate first.

namespace finsler {

// A Lorentzian metric field with matching double and jet evaluation channels.
struct MetricField {
    int n = 0;
    std::function<void(const double* x, double* g)> value;  // fills n*n row-major
    std::function<void(const Jet* x, Jet* g)> jet;
};

template <class F>
MetricField make_metric_field(int n, F f) {
    MetricField mf;
    mf.n = n;
    mf.value = [f](const double* x, double* g) { f(x, g); };
    mf.jet = [f](const Jet* x, Jet* g) { f(x, g); };
    return mf;
}

MetricField constant_metric_field(const Matrix& h);

// Factories ------------------------------------------------------------------

ModelPtr minkowski(int n = 4);

ModelPtr lorentzian_from_metric(MetricField field, std::string name,
                                std::function<double(const PointedVector&)> margin = {},
                                std::map<std::string, double> params = {},
                                std::string chart = "coordinate chart, time first",
                                std::vector<PointedVector> reference_points = {});

ModelPtr schwarzschild(double m = 1.0);

// Static product of a timeline with a unit two-sphere, chart (t, theta, phi).
ModelPtr product_r_s2();

ModelPtr rutz(double m = 1.0, double delta = 0.01);

ModelPtr beem_r3();

ModelPtr bogoslovsky(double b = 0.1, Vec null_direction = {1.0, 0.0, 0.0, 1.0});

ModelPtr bimetric(MetricField h_plus, MetricField h_minus, std::string name = "bimetric",
                  std::map<std::string, double> params = {});

ModelPtr dielectric_medium(Vec spatial_weights = {1.0, 1.0, 1.0}, Vec u_form = {1.0, 0.0, 0.0, 0.0});

// Deformation over a constant stationary base metric with observer field W.
ModelPtr rainbow(double c1 = 0.05, double radical_sign = -1.0,
                 Matrix base = Matrix::diag({-1.0, 1.0, 1.0, 1.0}),
                 Vec w = {1.0, 0.0, 0.0, 0.0});

ModelPtr berwald_moor_perturbed(double phi0 = 0.05, int p = 2, double phi_bound = 0.5);

// Catalog --------------------------------------------------------------------

struct ModelCatalogEntry {
    std::string name;
    std::string summary;
    std::map<std::string, double> default_params;
    std::function<ModelPtr(const std::map<std::string, double>&)> build;
    // Proposes candidate points; the generic sampler rejects irregular ones.
    std::function<PointedVector(const LagrangianModel&, std::mt19937_64&)> propose;
};

const std::vector<ModelCatalogEntry>& model_catalog();

const ModelCatalogEntry& catalog_entry(const std::string& name);

// Builds a catalog model; unknown keys in `params` raise BadParameter.
ModelPtr build_catalog_model(const std::string& name,
                             const std::map<std::string, double>& params = {});

// Seeded rejection sampling of regular points.
std::vector<PointedVector> sample_regular_points(const LagrangianModel& model,
                                                 const ModelCatalogEntry& entry,
                                                 std::uint64_t seed, int count);

}  // namespace finsler

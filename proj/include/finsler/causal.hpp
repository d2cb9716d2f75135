#pragma once

#include "finsler/vertical.hpp"

// Causal classification, time orientation and future-pointedness. Inner
// products here are evaluated with the fundamental tensor based at the first
// slot's own fiber vector, so reversal asymmetries of non-reversible models
// show up exactly as they should.

namespace finsler {

enum class CausalClass { timelike, lightlike, spacelike, singular };

std::string to_string(CausalClass c);

struct TimeOrientation {
    std::function<Vec(std::span<const double> x)> field;

    Vec operator()(std::span<const double> x) const { return field(x); }

    static TimeOrientation constant(Vec t);
    static TimeOrientation model_default(const LagrangianModel& model);
};

// A future pointed timelike worldline parameterized by coordinate time:
// pos(t)[0] == t by construction for both built-in families.
class Observer {
public:
    Observer(std::function<Vec(double)> pos, std::function<Vec(double)> vel, double t0, double t1,
             int dim);

    static Observer static_worldline(Vec spatial, double t0, double t1);
    // pos(t) = sum_k coeffs[k] t^k; coefficients must keep pos(t)[0] == t.
    static Observer polynomial(std::vector<Vec> coeffs, double t0, double t1);

    Vec position(double t) const { return pos_(t); }
    Vec velocity(double t) const { return vel_(t); }
    double t_min() const { return t0_; }
    double t_max() const { return t1_; }
    int dim() const { return dim_; }

private:
    std::function<Vec(double)> pos_, vel_;
    double t0_, t1_;
    int dim_;
};

// Throws NotTimelike / NotFuturePointed if the worldline fails either
// condition on a uniform sample grid.
void validate_observer(const LagrangianModel& model, const Observer& obs,
                       const TimeOrientation& T, int samples = 64,
                       const Tolerances& tol = default_tolerances());

// Sign of L with a scale-aware lightlike band: band = tol_band * (1 + |y|^2).
CausalClass classify(const LagrangianModel& model, const PointedVector& p,
                     double tol_band = default_tolerances().lightlike_band,
                     double margin_floor = default_tolerances().margin_floor);

// g_(x,y)(y, T(x)) < 0.
bool is_future_pointed(const LagrangianModel& model, const PointedVector& p,
                       const TimeOrientation& T,
                       const Tolerances& tol = default_tolerances());

// |g_p(y, -Z) + g_p(y, Z)|; the second slot is linear, so this vanishes.
double antisymmetry_in_second_slot(const LagrangianModel& model, const PointedVector& p,
                                   std::span<const double> z,
                                   const Tolerances& tol = default_tolerances());

// The pair (g_{-y}(-y, Z), -g_y(y, Z)); equal for reversible models.
struct ReversalPair {
    double reversed_branch;
    double negated_direct;
    double gap() const { return std::abs(reversed_branch - negated_direct); }
};
ReversalPair reversal_asymmetry(const LagrangianModel& model, const PointedVector& p,
                                std::span<const double> z,
                                const Tolerances& tol = default_tolerances());

// Per-node causal data of a sampled curve.
struct CurveSample {
    double s;
    Vec x;
    Vec v;
};

struct CurveCausality {
    std::vector<CausalClass> node_class;
    bool constant_speed = false;
    double max_speed_drift = 0.0;  // max_s |L - mean L|
    double mean_energy = 0.0;
    bool future_pointed_all = false;
    int first_singular_node = -1;
};

CurveCausality classify_curve(const LagrangianModel& model, const std::vector<CurveSample>& nodes,
                              const TimeOrientation& T,
                              const Tolerances& tol = default_tolerances());

}  // namespace finsler

#pragma once

#include <map>
#include <memory>
#include <string>

#include "finsler/core.hpp"
#include "finsler/jet.hpp"

namespace finsler {

enum class AnalyticLevel { none, first, second, third };

// A callable spacetime definition: the Lagrangian L(x, y) on (a restriction
// of) the slit tangent bundle, with a regularity predicate and enough
// evaluation channels for exact first/second derivatives.
//
// Models are immutable after construction and safe to share across threads.
class LagrangianModel {
public:
    virtual ~LagrangianModel() = default;

    virtual std::string name() const = 0;
    virtual int dimension() const = 0;

    virtual double evaluate_raw(std::span<const double> x, std::span<const double> y) const = 0;

    // Same function propagated through second-order Taylor arithmetic. The
    // jets share one seed set; callers decide which coordinates are seeded.
    virtual Jet evaluate_jet(std::span<const Jet> x, std::span<const Jet> y) const = 0;

    // Positive distance proxy to the singular set; <= 0 means singular.
    // Always excludes y = 0.
    virtual double regularity_margin(const PointedVector& p) const = 0;

    // Where L itself is defined and smooth. Wider than the regular domain for
    // models whose restriction is a signature condition on the vertical
    // Hessian rather than a hole in the Lagrangian (reversibility checks
    // compare plain values of L across y -> -y there).
    virtual double evaluable_margin(const PointedVector& p) const {
        return regularity_margin(p);
    }

    // True for Lagrangians quadratic in y (Lorentzian metrics): their third
    // fiber derivatives vanish identically and the Cartan tensor is zero.
    virtual bool quadratic_in_y() const { return false; }

    virtual AnalyticLevel analytic_level() const { return AnalyticLevel::second; }

    virtual std::map<std::string, double> params() const { return {}; }

    virtual std::string chart_description() const { return "coordinate chart, time first"; }

    // Default time orientation at x; coordinate d/dt where meaningful.
    virtual Vec default_time_orientation(std::span<const double> x) const {
        Vec t(static_cast<std::size_t>(dimension()), 0.0);
        (void)x;
        t[0] = 1.0;
        return t;
    }

    // Known-regular catalog points used by reduction and validation suites.
    virtual std::vector<PointedVector> reference_points() const { return {}; }

    bool is_regular(const PointedVector& p, double margin_floor) const {
        return p.dim() == dimension() && regularity_margin(p) > margin_floor;
    }
    bool is_regular(const PointedVector& p) const {
        return is_regular(p, default_tolerances().margin_floor);
    }

    void require_dimension(const PointedVector& p) const {
        if (p.dim() != dimension())
            throw DimensionMismatch(name() + ": point dimension " + std::to_string(p.dim()) +
                                    " differs from model dimension " + std::to_string(dimension()));
    }

    void require_regular(const PointedVector& p, double margin_floor) const {
        require_dimension(p);
        if (regularity_margin(p) <= margin_floor)
            throw SingularPoint(name() + ": evaluation point within margin of the singular set",
                                p.x, p.y, 0.0);
    }
    void require_regular(const PointedVector& p) const {
        require_regular(p, default_tolerances().margin_floor);
    }
};

using ModelPtr = std::shared_ptr<const LagrangianModel>;

// Implements both evaluation channels from one templated evaluator
// `Derived::eval_impl<T>(const T* x, const T* y) -> T`.
template <class Derived>
class ScalarModel : public LagrangianModel {
public:
    double evaluate_raw(std::span<const double> x, std::span<const double> y) const override {
        return self().template eval_impl<double>(x.data(), y.data());
    }

    Jet evaluate_jet(std::span<const Jet> x, std::span<const Jet> y) const override {
        return self().template eval_impl<Jet>(x.data(), y.data());
    }

private:
    const Derived& self() const { return static_cast<const Derived&>(*this); }
};

// Jet seeding helpers -------------------------------------------------------

// Seeds fiber coordinates as variables 0..n-1; base coordinates constant.
inline Jet eval_fiber_jet(const LagrangianModel& model, const PointedVector& p) {
    const int n = model.dimension();
    std::vector<Jet> xs, ys;
    xs.reserve(n);
    ys.reserve(n);
    for (int i = 0; i < n; ++i) xs.emplace_back(p.x[i], n);
    for (int i = 0; i < n; ++i) ys.push_back(Jet::variable(p.y[i], i, n));
    return model.evaluate_jet(xs, ys);
}

// Seeds base coordinates as variables 0..n-1 and fiber as n..2n-1.
inline Jet eval_full_jet(const LagrangianModel& model, const PointedVector& p) {
    const int n = model.dimension();
    std::vector<Jet> xs, ys;
    xs.reserve(n);
    ys.reserve(n);
    for (int i = 0; i < n; ++i) xs.push_back(Jet::variable(p.x[i], i, 2 * n));
    for (int i = 0; i < n; ++i) ys.push_back(Jet::variable(p.y[i], n + i, 2 * n));
    return model.evaluate_jet(xs, ys);
}

}  // namespace finsler

#include "finsler/causal.hpp"

namespace finsler {

std::string to_string(CausalClass c) {
    switch (c) {
        case CausalClass::timelike: return "timelike";
        case CausalClass::lightlike: return "lightlike";
        case CausalClass::spacelike: return "spacelike";
        case CausalClass::singular: return "singular";
    }
    return "singular";
}

TimeOrientation TimeOrientation::constant(Vec t) {
    return TimeOrientation{[t = std::move(t)](std::span<const double>) { return t; }};
}

TimeOrientation TimeOrientation::model_default(const LagrangianModel& model) {
    // Capture by value through a call into the model each time; models are
    // shared immutable objects owned elsewhere.
    const LagrangianModel* m = &model;
    return TimeOrientation{[m](std::span<const double> x) { return m->default_time_orientation(x); }};
}

Observer::Observer(std::function<Vec(double)> pos, std::function<Vec(double)> vel, double t0,
                   double t1, int dim)
    : pos_(std::move(pos)), vel_(std::move(vel)), t0_(t0), t1_(t1), dim_(dim) {
    if (!(t0_ < t1_)) throw BadParameter("observer: empty parameter interval");
}

Observer Observer::static_worldline(Vec spatial, double t0, double t1) {
    const int n = static_cast<int>(spatial.size()) + 1;
    auto pos = [spatial](double t) {
        Vec p(spatial.size() + 1);
        p[0] = t;
        std::copy(spatial.begin(), spatial.end(), p.begin() + 1);
        return p;
    };
    auto vel = [n](double) {
        Vec v(static_cast<std::size_t>(n), 0.0);
        v[0] = 1.0;
        return v;
    };
    return Observer(pos, vel, t0, t1, n);
}

Observer Observer::polynomial(std::vector<Vec> coeffs, double t0, double t1) {
    if (coeffs.empty()) throw BadParameter("observer: no polynomial coefficients");
    const std::size_t n = coeffs[0].size();
    for (const Vec& c : coeffs)
        if (c.size() != n) throw BadParameter("observer: ragged polynomial coefficients");
    // Coordinate-time parameterization: time component must be exactly t.
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        const double want = (k == 1) ? 1.0 : 0.0;
        if (coeffs[k][0] != want)
            throw BadParameter("observer: polynomial worldlines must satisfy pos(t)[0] == t");
    }
    auto pos = [coeffs, n](double t) {
        Vec p(n, 0.0);
        double tk = 1.0;
        for (const Vec& c : coeffs) {
            for (std::size_t i = 0; i < n; ++i) p[i] += c[i] * tk;
            tk *= t;
        }
        return p;
    };
    auto vel = [coeffs, n](double t) {
        Vec v(n, 0.0);
        double tk = 1.0;
        for (std::size_t k = 1; k < coeffs.size(); ++k) {
            for (std::size_t i = 0; i < n; ++i) v[i] += static_cast<double>(k) * coeffs[k][i] * tk;
            tk *= t;
        }
        return v;
    };
    return Observer(pos, vel, t0, t1, static_cast<int>(n));
}

void validate_observer(const LagrangianModel& model, const Observer& obs,
                       const TimeOrientation& T, int samples, const Tolerances& tol) {
    for (int k = 0; k <= samples; ++k) {
        const double t = obs.t_min() + (obs.t_max() - obs.t_min()) * k / samples;
        PointedVector p{obs.position(t), obs.velocity(t)};
        model.require_regular(p, tol.margin_floor);
        const double L = model.evaluate_raw(p.x, p.y);
        if (L >= -tol.lightlike_band * (1.0 + dot(p.y, p.y)))
            throw NotTimelike("observer worldline is not timelike at t = " + std::to_string(t));
        if (!is_future_pointed(model, p, T, tol))
            throw NotFuturePointed("observer worldline is not future pointed at t = " +
                                   std::to_string(t));
    }
}

CausalClass classify(const LagrangianModel& model, const PointedVector& p, double tol_band,
                     double margin_floor) {
    if (p.dim() != model.dimension() || model.regularity_margin(p) <= margin_floor)
        return CausalClass::singular;
    const double L = model.evaluate_raw(p.x, p.y);
    const double band = tol_band * (1.0 + dot(p.y, p.y));
    if (L < -band) return CausalClass::timelike;
    if (L > band) return CausalClass::spacelike;
    return CausalClass::lightlike;
}

bool is_future_pointed(const LagrangianModel& model, const PointedVector& p,
                       const TimeOrientation& T, const Tolerances& tol) {
    model.require_regular(p, tol.margin_floor);
    const Vec t = T(p.x);
    return raw_pairing(model, p, p.y, t) < 0.0;
}

double antisymmetry_in_second_slot(const LagrangianModel& model, const PointedVector& p,
                                   std::span<const double> z, const Tolerances& tol) {
    model.require_regular(p, tol.margin_floor);
    const Vec mz = scaled(z, -1.0);
    return std::abs(raw_pairing(model, p, p.y, mz) + raw_pairing(model, p, p.y, z));
}

ReversalPair reversal_asymmetry(const LagrangianModel& model, const PointedVector& p,
                                std::span<const double> z, const Tolerances& tol) {
    model.require_regular(p, tol.margin_floor);
    const PointedVector q{p.x, scaled(p.y, -1.0)};
    model.require_regular(q, tol.margin_floor);
    ReversalPair r;
    r.reversed_branch = raw_pairing(model, q, q.y, z);
    r.negated_direct = -raw_pairing(model, p, p.y, z);
    return r;
}

CurveCausality classify_curve(const LagrangianModel& model, const std::vector<CurveSample>& nodes,
                              const TimeOrientation& T, const Tolerances& tol) {
    CurveCausality out;
    out.node_class.reserve(nodes.size());
    out.future_pointed_all = true;

    double sum = 0.0;
    std::vector<double> energies;
    energies.reserve(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        PointedVector p{nodes[k].x, nodes[k].v};
        const CausalClass c = classify(model, p, tol.lightlike_band, tol.margin_floor);
        out.node_class.push_back(c);
        if (c == CausalClass::singular) {
            if (out.first_singular_node < 0) out.first_singular_node = static_cast<int>(k);
            out.future_pointed_all = false;
            continue;
        }
        const double L = model.evaluate_raw(p.x, p.y);
        energies.push_back(L);
        sum += L;
        if (!is_future_pointed(model, p, T, tol)) out.future_pointed_all = false;
    }
    if (!energies.empty()) {
        out.mean_energy = sum / static_cast<double>(energies.size());
        for (double L : energies)
            out.max_speed_drift = std::max(out.max_speed_drift, std::abs(L - out.mean_energy));
        out.constant_speed = out.max_speed_drift <= tol.band(out.mean_energy);
    }
    return out;
}

}  // namespace finsler

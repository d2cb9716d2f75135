#include "finsler/fermat.hpp"

#include <algorithm>
#include <random>

#include "finsler/vertical.hpp"

namespace finsler {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec embed_spatial(const Vec& spatial, double time_component) {
    Vec out(spatial.size() + 1);
    out[0] = time_component;
    std::copy(spatial.begin(), spatial.end(), out.begin() + 1);
    return out;
}

Vec spatial_part(const Vec& full) { return Vec(full.begin() + 1, full.end()); }

// L and dL/dy^0 at (x, v) with only the time velocity seeded.
double lagrangian_dy0(const LagrangianModel& model, const Vec& x, const Vec& v, double& dLdy0) {
    const int n = model.dimension();
    std::vector<Jet> xs, ys;
    xs.reserve(static_cast<std::size_t>(n));
    ys.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) xs.emplace_back(x[static_cast<std::size_t>(i)], 1);
    ys.push_back(Jet::variable(v[0], 0, 1));
    for (int i = 1; i < n; ++i) ys.emplace_back(v[static_cast<std::size_t>(i)], 1);
    const Jet j = model.evaluate_jet(xs, ys);
    dLdy0 = j.grad(0);
    return j.value();
}

// Solves L(x, (psi, w)) = target for the time velocity, warm started so the
// future branch is followed continuously.
double solve_shell_velocity(const LagrangianModel& model, const Vec& x, Vec v, double target,
                            double psi_guess) {
    double psi = psi_guess;
    double fscale = 1.0 + std::abs(target);
    for (int it = 0; it < 60; ++it) {
        v[0] = psi;
        double dL;
        const double f = lagrangian_dy0(model, x, v, dL) - target;
        if (!std::isfinite(f) || !std::isfinite(dL))
            throw VariationConstructionFailed("shell restoration left the evaluable domain");
        if (it == 0) fscale += std::abs(f + target);  // magnitude of L at entry
        if (std::abs(f) <= 1e-13 * fscale) return psi;
        if (std::abs(dL) < 1e-12 * fscale)
            throw VariationConstructionFailed("shell restoration hit a degenerate time direction");
        const double step = f / dL;
        psi -= step;
        if (std::abs(step) <= 1e-16 * (1.0 + std::abs(psi))) return psi;
    }
    throw VariationConstructionFailed("shell restoration did not converge");
}

// Completes a spatial profile to a curve on the energy shell by integrating
// the time coordinate. Fixed uniform RK4 grid, so one-parameter families of
// completed curves stay smooth in the family parameter.
struct ShellCompletion {
    std::vector<Vec> x;
    std::vector<Vec> v;
};

ShellCompletion complete_on_shell(const LagrangianModel& model,
                                  const std::function<Vec(double)>& S,
                                  const std::function<Vec(double)>& dS, double t0, double psi0,
                                  double target, int grid) {
    ShellCompletion out;
    out.x.reserve(static_cast<std::size_t>(grid));
    out.v.reserve(static_cast<std::size_t>(grid));
    const double h = 1.0 / (grid - 1);
    double t = t0;
    double psi_warm = psi0;

    auto rate = [&](double s, double tt, double& warm) {
        const Vec xs = embed_spatial(S(s), tt);
        const Vec vs = embed_spatial(dS(s), warm);
        const double psi = solve_shell_velocity(model, xs, vs, target, warm);
        warm = psi;
        return psi;
    };

    for (int k = 0; k < grid; ++k) {
        const double s = k * h;
        double warm = psi_warm;
        const double psi_node = rate(s, t, warm);
        out.x.push_back(embed_spatial(S(s), t));
        out.v.push_back(embed_spatial(dS(s), psi_node));
        psi_warm = psi_node;
        if (k + 1 == grid) break;

        double w1 = psi_node, w2 = psi_node, w3 = psi_node, w4 = psi_node;
        const double k1 = rate(s, t, w1);
        const double k2 = rate(s + 0.5 * h, t + 0.5 * h * k1, w2);
        const double k3 = rate(s + 0.5 * h, t + 0.5 * h * k2, w3);
        const double k4 = rate(s + h, t + h * k3, w4);
        t += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return out;
}

// Numeric derivative of a vector-valued callable on [0, 1], one-sided at the
// ends so curves and fields never get sampled outside their domain.
Vec fd_curve_derivative(const std::function<Vec(double)>& f, double s, double h = 2e-4) {
    auto combine = [&](std::initializer_list<std::pair<double, double>> terms) {
        Vec acc;
        for (const auto& [w, off] : terms) {
            Vec val = f(s + off);
            if (acc.empty()) acc.assign(val.size(), 0.0);
            axpy(w / h, val, acc);
        }
        return acc;
    };
    if (s - 2.0 * h < 0.0)
        return combine({{-25.0 / 12, 0.0},
                        {48.0 / 12, h},
                        {-36.0 / 12, 2 * h},
                        {16.0 / 12, 3 * h},
                        {-3.0 / 12, 4 * h}});
    if (s + 2.0 * h > 1.0)
        return combine({{25.0 / 12, 0.0},
                        {-48.0 / 12, -h},
                        {36.0 / 12, -2 * h},
                        {-16.0 / 12, -3 * h},
                        {3.0 / 12, -4 * h}});
    return combine({{1.0 / 12, -2 * h}, {-8.0 / 12, -h}, {8.0 / 12, h}, {-1.0 / 12, 2 * h}});
}

}  // namespace

// ---------------------------------------------------------------------------
// SampledPath / AdmissibleCurve
// ---------------------------------------------------------------------------

SampledPath::SampledPath(std::vector<Vec> positions, std::vector<Vec> velocities)
    : pos_(0.0, 1.0, std::move(positions)), vel_(0.0, 1.0, std::move(velocities)) {}

std::vector<CurveSample> SampledPath::samples() const {
    std::vector<CurveSample> out;
    const std::size_t m = pos_.size();
    out.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double s = static_cast<double>(k) / static_cast<double>(m - 1);
        out.push_back({s, pos_.values()[k], vel_.values()[k]});
    }
    return out;
}

Vec AdmissibleCurve::position(double s) const {
    return geodesic ? geodesic->position(s) : curve.position(s);
}

Vec AdmissibleCurve::velocity(double s) const {
    return geodesic ? geodesic->velocity(s) : curve.velocity(s);
}

std::string to_string(CriticalCharacter c) {
    switch (c) {
        case CriticalCharacter::local_min: return "local_min";
        case CriticalCharacter::saddle: return "saddle";
        case CriticalCharacter::boundary_case: return "boundary_case";
    }
    return "boundary_case";
}

// ---------------------------------------------------------------------------
// Arrival parameter
// ---------------------------------------------------------------------------

double time_arrival(const Observer& obs, const Vec& endpoint, const ArrivalOptions& opts) {
    const double t0 = obs.t_min(), t1 = obs.t_max();
    auto dist2 = [&](double t) {
        const Vec d = sub(obs.position(t), endpoint);
        return dot(d, d);
    };

    std::vector<double> candidates;
    const int N = opts.scan_points;
    double prev2 = dist2(t0), cur2 = dist2(t0 + (t1 - t0) / N);
    if (cur2 > prev2) candidates.push_back(t0);
    for (int k = 1; k < N; ++k) {
        const double next2 = dist2(t0 + (t1 - t0) * (k + 1) / N);
        if (cur2 <= prev2 && cur2 <= next2) candidates.push_back(t0 + (t1 - t0) * k / N);
        prev2 = cur2;
        cur2 = next2;
    }
    if (dist2(t1) < prev2) candidates.push_back(t1);

    std::vector<double> hits;
    for (double t : candidates) {
        for (int it = 0; it < 60; ++it) {
            const Vec d = sub(obs.position(t), endpoint);
            const Vec g = obs.velocity(t);
            const double phi = dot(d, g);
            const Vec gp =
                fd_curve_derivative([&](double u) { return obs.velocity(t0 + (t1 - t0) * u); },
                                    (t - t0) / (t1 - t0), 1e-5);
            const double dphi = dot(g, g) + dot(d, gp) / (t1 - t0);
            if (std::abs(dphi) < 1e-14) break;
            const double step = phi / dphi;
            t -= step;
            t = std::min(t1, std::max(t0, t));
            if (std::abs(step) < 1e-15 * (1.0 + std::abs(t))) break;
        }
        if (std::sqrt(dist2(t)) <= opts.capture_radius) hits.push_back(t);
    }

    std::sort(hits.begin(), hits.end());
    hits.erase(std::unique(hits.begin(), hits.end(),
                           [&](double a, double b) {
                               return std::abs(a - b) < 10.0 * opts.capture_radius + 1e-12;
                           }),
               hits.end());
    if (hits.empty())
        throw NoIntersection(
            "time_arrival: endpoint is not on the observer worldline within the capture radius");
    if (hits.size() > 1)
        throw AmbiguousIntersection("time_arrival: multiple observer parameters match the endpoint");
    return hits.front();
}

// ---------------------------------------------------------------------------
// Energy shell
// ---------------------------------------------------------------------------

Vec energy_shell_project(const LagrangianModel& model, const Vec& x, const Vec& y, double c,
                         const Tolerances& tol) {
    PointedVector p{x, y};
    model.require_regular(p, tol.margin_floor);
    const double L = model.evaluate_raw(x, y);
    const double band = tol.lightlike_band * (1.0 + dot(y, y));
    if (c > 0.0) {
        if (L >= -band)
            throw WrongShell("energy_shell_project: vector is not timelike, cannot reach L = -c^2");
        return scaled(y, c / std::sqrt(-L));
    }
    if (std::abs(L) > band)
        throw WrongShell("energy_shell_project: scaling cannot make a non-null vector null");
    return scaled(y, 1.0 / norm(y));
}

// ---------------------------------------------------------------------------
// Shooting
// ---------------------------------------------------------------------------

namespace {

struct ShotResidual {
    Vec f;  // n endpoint components + one shell component
    Vec endpoint;
    std::shared_ptr<GeodesicPath> path;
};

ShotResidual shot_residual(const LagrangianModel& model, const Vec& q, const Observer& obs,
                           double c, const Vec& y0, double tau, const ShootOptions& opts,
                           const Tolerances& tol) {
    ShotResidual r;
    GeodesicIVP ivp;
    ivp.x0 = q;
    ivp.y0 = y0;
    r.path = std::make_shared<GeodesicPath>(integrate(model, ivp, opts.integrator, tol));
    r.endpoint = r.path->position(1.0);
    const Vec target = obs.position(tau);
    const int n = model.dimension();
    r.f.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i < n; ++i)
        r.f[static_cast<std::size_t>(i)] =
            r.endpoint[static_cast<std::size_t>(i)] - target[static_cast<std::size_t>(i)];
    r.f[static_cast<std::size_t>(n)] = (model.evaluate_raw(q, y0) + c * c) / (1.0 + c * c);
    return r;
}

}  // namespace

AdmissibleCurve shoot(const LagrangianModel& model, const Vec& q, const Observer& obs, double c,
                      const TimeOrientation& T, const Vec& initial_direction,
                      const ShootOptions& opts, const Tolerances& tol) {
    const int n = model.dimension();
    if (c < 0.0) throw BadParameter("shoot: energy parameter c must be nonnegative");

    Vec y0 = initial_direction;
    {
        PointedVector p0{q, y0};
        model.require_regular(p0, tol.margin_floor);
        if (raw_pairing(model, p0, y0, T(q)) >= 0.0)
            throw NotFuturePointed("shoot: initial direction is not future pointed");
    }
    if (c > 0.0) y0 = energy_shell_project(model, q, y0, c, tol);

    // Arrival guess from the first trial trajectory.
    double tau = 0.0;
    {
        GeodesicIVP ivp;
        ivp.x0 = q;
        ivp.y0 = y0;
        GeodesicPath first = integrate(model, ivp, opts.integrator, tol);
        const Vec e = first.position(1.0);
        double best = 1e300;
        for (int k = 0; k <= 64; ++k) {
            const double t = obs.t_min() + (obs.t_max() - obs.t_min()) * k / 64.0;
            const Vec d = sub(obs.position(t), e);
            if (dot(d, d) < best) {
                best = dot(d, d);
                tau = t;
            }
        }
    }

    const int m = n + 1;  // unknowns: launch velocity and arrival parameter
    Vec u(static_cast<std::size_t>(m));
    std::copy(y0.begin(), y0.end(), u.begin());
    u[static_cast<std::size_t>(n)] = tau;

    auto eval = [&](const Vec& uu) {
        Vec yy(uu.begin(), uu.begin() + n);
        return shot_residual(model, q, obs, c, yy, uu[static_cast<std::size_t>(n)], opts, tol);
    };

    ShotResidual cur = eval(u);
    double fnorm = norm(cur.f);

    Matrix J;
    auto refresh_jacobian = [&]() {
        J = Matrix(m, m);
        for (int col = 0; col < n; ++col) {
            const double eps = opts.fd_eps * (1.0 + std::abs(u[static_cast<std::size_t>(col)]));
            Vec up = u;
            up[static_cast<std::size_t>(col)] += eps;
            const ShotResidual rp = eval(up);
            for (int row = 0; row < m; ++row)
                J(row, col) =
                    (rp.f[static_cast<std::size_t>(row)] - cur.f[static_cast<std::size_t>(row)]) / eps;
        }
        const Vec gp = obs.velocity(u[static_cast<std::size_t>(n)]);
        for (int row = 0; row < n; ++row) J(row, n) = -gp[static_cast<std::size_t>(row)];
        J(n, n) = 0.0;
    };
    refresh_jacobian();

    int since_refresh = 0;
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        if (max_abs(std::span<const double>(cur.f.data(), static_cast<std::size_t>(n))) <=
                opts.capture_radius &&
            std::abs(cur.f[static_cast<std::size_t>(n)]) <= 1e-12) {
            AdmissibleCurve out;
            out.geodesic = cur.path;
            out.q = q;
            out.c = c;
            out.tau = time_arrival(obs, cur.endpoint, {opts.capture_radius * 20.0, 256});
            out.energy_drift = cur.path->energy_drift();
            out.endpoint_distance = norm(sub(cur.endpoint, obs.position(out.tau)));
            const auto res = cur.path->resample(801);
            std::vector<Vec> xs, vs;
            xs.reserve(res.size());
            vs.reserve(res.size());
            for (const CurveSample& csn : res) {
                xs.push_back(csn.x);
                vs.push_back(csn.v);
            }
            out.curve = SampledPath(std::move(xs), std::move(vs));
            const CurveCausality cc = classify_curve(model, cur.path->resample(65), T, tol);
            out.future_pointed = cc.future_pointed_all;
            if (!out.future_pointed)
                throw NotFuturePointed(
                    "shoot: converged geodesic is not future pointed along its length");
            return out;
        }

        Vec step = solve(J, scaled(cur.f, -1.0));
        const double cap =
            1.0 + 0.5 * norm(std::span<const double>(u.data(), static_cast<std::size_t>(n)));
        if (norm(step) > cap) step = scaled(step, cap / norm(step));

        bool accepted = false;
        for (double alpha = 1.0; alpha >= 1.0 / 64.0; alpha *= 0.5) {
            Vec ut = u;
            axpy(alpha, step, ut);
            try {
                ShotResidual trial = eval(ut);
                if (norm(trial.f) < fnorm) {
                    Vec du = sub(ut, u);
                    Vec df = sub(trial.f, cur.f);
                    const Vec Jdu = J.apply(du);
                    const double du2 = dot(du, du);
                    for (int row = 0; row < m; ++row)
                        for (int col = 0; col < m; ++col)
                            J(row, col) += (df[static_cast<std::size_t>(row)] -
                                            Jdu[static_cast<std::size_t>(row)]) *
                                           du[static_cast<std::size_t>(col)] / du2;
                    u = std::move(ut);
                    cur = std::move(trial);
                    fnorm = norm(cur.f);
                    accepted = true;
                    break;
                }
            } catch (const SingularPoint&) {
            } catch (const EnergyDriftExceeded&) {
            } catch (const DegenerateMetric&) {
            }
        }
        if (!accepted || ++since_refresh >= 10) {
            refresh_jacobian();
            since_refresh = 0;
            if (!accepted) {
                Vec step2 = solve(J, scaled(cur.f, -1.0));
                bool ok = false;
                for (double alpha = 1.0; alpha >= 1.0 / 1024.0; alpha *= 0.5) {
                    Vec ut = u;
                    axpy(alpha, step2, ut);
                    try {
                        ShotResidual trial = eval(ut);
                        if (norm(trial.f) < fnorm) {
                            u = std::move(ut);
                            cur = std::move(trial);
                            fnorm = norm(cur.f);
                            ok = true;
                            break;
                        }
                    } catch (const SingularPoint&) {
                    } catch (const EnergyDriftExceeded&) {
                    } catch (const DegenerateMetric&) {
                    }
                }
                if (!ok)
                    throw NoConvergence("shoot: stalled with residual " + std::to_string(fnorm));
            }
        }
    }
    throw NoConvergence("shoot: iteration budget exhausted, residual " + std::to_string(fnorm));
}

// ---------------------------------------------------------------------------
// Allowed variations
// ---------------------------------------------------------------------------

AllowedVariationFamily::AllowedVariationFamily(const LagrangianModel& model,
                                               const AdmissibleCurve& base, const Observer& obs,
                                               const TimeOrientation& T,
                                               std::function<Vec(double)> a_spatial,
                                               std::function<Vec(double)> da_spatial,
                                               const VariationOptions& opts, const Tolerances& tol)
    : model_(&model),
      obs_(&obs),
      T_(T),
      a_spatial_(std::move(a_spatial)),
      da_spatial_(std::move(da_spatial)),
      opts_(opts),
      tol_(tol) {
    auto base_copy = std::make_shared<AdmissibleCurve>(base);
    base_spatial_ = [base_copy](double s) { return spatial_part(base_copy->position(s)); };
    dbase_spatial_ = [base_copy](double s) { return spatial_part(base_copy->velocity(s)); };
    t_q_ = base.position(0.0)[0];
    psi0_ = base.velocity(0.0)[0];
    c_ = base.c;
    const Vec gv = obs.velocity(0.5 * (obs.t_min() + obs.t_max()));
    moving_observer_ = norm(spatial_part(gv)) > 1e-14;
}

AllowedVariationFamily::Build AllowedVariationFamily::build(double eps) const {
    const int n = model_->dimension();
    const int nsp = n - 1;
    Vec ramp_coef(static_cast<std::size_t>(nsp), 0.0);

    auto make_S = [&](const Vec& cvec) {
        return [this, eps, cvec](double s) {
            Vec sp = base_spatial_(s);
            axpy(eps, a_spatial_(s), sp);
            axpy(s, cvec, sp);
            return sp;
        };
    };
    auto make_dS = [&](const Vec& cvec) {
        return [this, eps, cvec](double s) {
            Vec sp = dbase_spatial_(s);
            axpy(eps, da_spatial_(s), sp);
            for (std::size_t i = 0; i < cvec.size(); ++i) sp[i] += cvec[i];
            return sp;
        };
    };

    const double target = -c_ * c_;
    ShellCompletion comp;
    Matrix Jc = Matrix::identity(nsp);
    bool have_secant = false;
    Vec prev_coef, prev_miss;

    for (int it = 0;; ++it) {
        comp = complete_on_shell(*model_, make_S(ramp_coef), make_dS(ramp_coef), t_q_, psi0_,
                                 target, opts_.grid);
        const double t_end = comp.x.back()[0];
        const Vec miss = sub(spatial_part(comp.x.back()), spatial_part(obs_->position(t_end)));
        if (norm(miss) <= opts_.endpoint_tol) break;
        if (it >= opts_.max_endpoint_iters)
            throw VariationConstructionFailed(
                "allowed variation endpoint correction stalled, miss " +
                std::to_string(norm(miss)));

        if (have_secant) {
            const Vec dc = sub(ramp_coef, prev_coef);
            const Vec dm = sub(miss, prev_miss);
            const double dc2 = dot(dc, dc);
            if (dc2 > 0.0) {
                const Vec Jdc = Jc.apply(dc);
                for (int r = 0; r < nsp; ++r)
                    for (int col = 0; col < nsp; ++col)
                        Jc(r, col) += (dm[static_cast<std::size_t>(r)] -
                                       Jdc[static_cast<std::size_t>(r)]) *
                                      dc[static_cast<std::size_t>(col)] / dc2;
            }
        }
        prev_coef = ramp_coef;
        prev_miss = miss;
        const Vec delta = solve(Jc, scaled(miss, -1.0));
        axpy(1.0, delta, ramp_coef);
        have_secant = true;
    }

    Build b{SampledPath(std::move(comp.x), std::move(comp.v)), 0.0};
    b.tau = b.path.position(1.0)[0];
    return b;
}

double AllowedVariationFamily::tau(double eps) const { return build(eps).tau; }

SampledPath AllowedVariationFamily::curve(double eps) const { return build(eps).path; }

Vec AllowedVariationFamily::realized_field(double s, double eps_probe) const {
    const Build plus = build(eps_probe);
    const Build minus = build(-eps_probe);
    Vec d = sub(plus.path.position(s), minus.path.position(s));
    return scaled(d, 0.5 / eps_probe);
}

std::vector<std::pair<std::function<Vec(double)>, std::function<Vec(double)>>>
variation_generators(int n, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const int nsp = n - 1;
    std::vector<std::pair<std::function<Vec(double)>, std::function<Vec(double)>>> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int g = 0; g < count; ++g) {
        Matrix coef(3, nsp);
        double scale = 0.0;
        for (int m = 0; m < 3; ++m)
            for (int d = 0; d < nsp; ++d) {
                coef(m, d) = U(rng) / (m + 1.0);
                scale = std::max(scale, std::abs(coef(m, d)));
            }
        for (int m = 0; m < 3; ++m)
            for (int d = 0; d < nsp; ++d) coef(m, d) /= scale;
        auto a = [coef, nsp](double s) {
            Vec v(static_cast<std::size_t>(nsp), 0.0);
            for (int m = 0; m < 3; ++m)
                for (int d = 0; d < nsp; ++d)
                    v[static_cast<std::size_t>(d)] += coef(m, d) * std::sin((m + 1) * kPi * s);
            return v;
        };
        auto da = [coef, nsp](double s) {
            Vec v(static_cast<std::size_t>(nsp), 0.0);
            for (int m = 0; m < 3; ++m)
                for (int d = 0; d < nsp; ++d)
                    v[static_cast<std::size_t>(d)] +=
                        coef(m, d) * (m + 1) * kPi * std::cos((m + 1) * kPi * s);
            return v;
        };
        out.emplace_back(std::move(a), std::move(da));
    }
    return out;
}

FirstVariationReport first_variation_tau(const LagrangianModel& model,
                                         const AdmissibleCurve& base, const Observer& obs,
                                         const TimeOrientation& T, int generator_count,
                                         std::uint64_t seed, const VariationOptions& opts,
                                         const Tolerances& tol) {
    const int n = model.dimension();
    FirstVariationReport rep;

    // Euler-Lagrange residual along the base curve on a fixed grid.
    const int elgrid = 401;
    std::vector<Vec> el(static_cast<std::size_t>(elgrid));
    auto vel_fn = [&](double s) { return base.velocity(s); };
    for (int k = 0; k < elgrid; ++k) {
        const double s = static_cast<double>(k) / (elgrid - 1);
        const Vec x = base.position(s), v = base.velocity(s);
        const Vec acc = base.geodesic ? geodesic_acceleration(model, {x, v}, tol)
                                      : fd_curve_derivative(vel_fn, s);
        const Jet j = eval_full_jet(model, {x, v});
        Vec res(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            double dds = 0.0;  // d/ds of dL/dy_i along the curve
            for (int kk = 0; kk < n; ++kk)
                dds += j.hess(kk, n + i) * v[static_cast<std::size_t>(kk)];
            for (int jj = 0; jj < n; ++jj)
                dds += j.hess(n + i, n + jj) * acc[static_cast<std::size_t>(jj)];
            res[static_cast<std::size_t>(i)] = j.grad(i) - dds;
        }
        el[static_cast<std::size_t>(k)] = std::move(res);
    }

    const Vec v1 = base.velocity(1.0);
    const Vec x1 = base.position(1.0);
    const double den = raw_pairing(model, {x1, v1}, v1, obs.velocity(base.tau));

    const auto gens = variation_generators(n, generator_count, seed);
    const double h = opts.fd_step;
    for (const auto& [a, da] : gens) {
        AllowedVariationFamily fam(model, base, obs, T, a, da, opts, tol);
        // The +-h curves also feed the boundary-term identity below; arrival
        // parameters are their endpoint time coordinates.
        const SampledPath cp = fam.curve(h);
        const SampledPath cm = fam.curve(-h);
        const double tp = cp.position(1.0)[0], tm = cm.position(1.0)[0];
        const double tp2 = fam.tau(2.0 * h), tm2 = fam.tau(-2.0 * h);
        const double dtau = (8.0 * (tp - tm) - (tp2 - tm2)) / (12.0 * h);
        rep.derivatives.push_back(dtau);
        rep.max_abs_derivative = std::max(rep.max_abs_derivative, std::abs(dtau));
        Vec integrand(static_cast<std::size_t>(elgrid));
        for (int k = 0; k < elgrid; ++k) {
            const double s = static_cast<double>(k) / (elgrid - 1);
            const Vec field = scaled(sub(cp.position(s), cm.position(s)), 0.5 / h);
            integrand[static_cast<std::size_t>(k)] = dot(el[static_cast<std::size_t>(k)], field);
        }
        double integral = integrand[0] + integrand[static_cast<std::size_t>(elgrid - 1)];
        for (int k = 1; k < elgrid - 1; ++k)
            integral += integrand[static_cast<std::size_t>(k)] * (k % 2 ? 4.0 : 2.0);
        integral /= 3.0 * (elgrid - 1);
        const double formula = -integral / den;
        rep.formula_values.push_back(formula);
        rep.max_formula_gap = std::max(rep.max_formula_gap, std::abs(formula - dtau));
    }
    return rep;
}

AdmissibleCurve admissible_from_spatial(const LagrangianModel& model, const Vec& q,
                                        const Observer& obs, double c, const TimeOrientation& T,
                                        const std::function<Vec(double)>& spatial,
                                        const std::function<Vec(double)>& dspatial,
                                        const VariationOptions& opts, const Tolerances& tol) {
    const Vec Tq = T(q);
    double psi0 = Tq[0] != 0.0 ? Tq[0] : 1.0;
    psi0 = psi0 > 0 ? std::max(1.0, psi0) : std::min(-1.0, psi0);

    ShellCompletion comp =
        complete_on_shell(model, spatial, dspatial, q[0], psi0, -c * c, opts.grid);

    AdmissibleCurve out;
    out.q = q;
    out.c = c;
    out.curve = SampledPath(std::move(comp.x), std::move(comp.v));
    out.tau = time_arrival(obs, out.curve.position(1.0), {1e-6, 256});
    out.endpoint_distance = norm(sub(out.curve.position(1.0), obs.position(out.tau)));

    const CurveCausality cc = classify_curve(model, out.curve.samples(), T, tol);
    out.future_pointed = cc.future_pointed_all;
    out.energy_drift = cc.max_speed_drift;
    if (!out.future_pointed)
        throw NotFuturePointed("admissible_from_spatial: completed curve is not future pointed");
    return out;
}

// ---------------------------------------------------------------------------
// Index form and second variation
// ---------------------------------------------------------------------------

VariationField make_transverse_field(const LagrangianModel& model, const AdmissibleCurve& base,
                                     std::function<Vec(double)> spatial,
                                     std::function<Vec(double)> dspatial) {
    auto base_copy = std::make_shared<AdmissibleCurve>(base);
    const LagrangianModel* mp = &model;
    auto spatial_copy = spatial;
    auto full = [mp, base_copy, spatial_copy](double s) {
        const Vec x = base_copy->position(s);
        const Vec v = base_copy->velocity(s);
        Vec a = embed_spatial(spatial_copy(s), 0.0);
        const PointedVector p{x, v};
        Vec e0(a.size(), 0.0);
        e0[0] = 1.0;
        const double num = raw_pairing(*mp, p, v, a);
        const double den = raw_pairing(*mp, p, v, e0);
        a[0] = -num / den;
        return a;
    };
    auto dfull = [full](double s) { return fd_curve_derivative(full, s); };
    VariationField f;
    f.spatial = std::move(spatial);
    f.dspatial = std::move(dspatial);
    f.full = std::move(full);
    f.dfull = std::move(dfull);
    return f;
}

double index_form(const CurveFrame& frame, const VariationField& a, const VariationField& b,
                  double quad_tol) {
    auto integrand = [&](double s) {
        const Vec A = a.full(s), B = b.full(s);
        const Vec dA = a.dfull(s), dB = b.dfull(s);
        const Vec RA = frame.curvature_op(s, A);
        const Vec DA = frame.covariant_derivative(s, A, dA);
        const Vec DB = frame.covariant_derivative(s, B, dB);
        return frame.pairing(s, B, RA) - frame.pairing(s, DA, DB);
    };
    return adaptive_simpson(integrand, 0.0, 1.0, quad_tol, 24);
}

double index_form_by_parts(const CurveFrame& frame, const VariationField& a,
                           const VariationField& b, double quad_tol) {
    auto DA = [&](double s) { return frame.covariant_derivative(s, a.full(s), a.dfull(s)); };
    auto integrand = [&](double s) {
        const Vec dDA = fd_curve_derivative(DA, s);
        const Vec DDA = frame.covariant_derivative(s, DA(s), dDA);
        const Vec RA = frame.curvature_op(s, a.full(s));
        Vec sum = DDA;
        axpy(1.0, RA, sum);
        return frame.pairing(s, b.full(s), sum);
    };
    return adaptive_simpson(integrand, 0.0, 1.0, quad_tol, 24);
}

SecondVariationSample second_variation_check(const LagrangianModel& model,
                                             const AdmissibleCurve& base, const Observer& obs,
                                             const TimeOrientation& T, const CurveFrame& frame,
                                             const VariationField& a,
                                             const VariationOptions& opts, const Tolerances& tol) {
    SecondVariationSample out;

    const Vec v1 = base.velocity(1.0);
    const Vec x1 = base.position(1.0);
    const double den = metric_pairing(model, {x1, v1}, obs.velocity(base.tau), v1);
    if (std::abs(den) < 1e-8 * (1.0 + dot(v1, v1)))
        throw DegenerateBoundaryPairing(
            "second variation: observer velocity is numerically orthogonal to the arrival "
            "velocity");

    out.prediction = index_form(frame, a, a) / den;

    AllowedVariationFamily fam(model, base, obs, T, a.spatial, a.dspatial, opts, tol);
    const double tau0 = fam.tau(0.0);
    auto hess = [&](double h) {
        return (-fam.tau(2.0 * h) + 16.0 * fam.tau(h) - 30.0 * tau0 + 16.0 * fam.tau(-h) -
                fam.tau(-2.0 * h)) /
               (12.0 * h * h);
    };
    // Step-doubled pair: extrapolate the leading truncation term unless the
    // difference is already down at the roundoff floor.
    const double q1 = hess(opts.hess_step);
    const double q2 = hess(0.5 * opts.hess_step);
    const double diff = q2 - q1;
    out.fd_hessian = std::abs(diff) < 1e-9 * (1.0 + std::abs(q2)) ? q2 : q2 + diff / 15.0;
    out.relative_gap =
        std::abs(out.fd_hessian - out.prediction) / std::max(std::abs(out.prediction), 1e-12);
    return out;
}

Matrix tau_hessian_fourier(const LagrangianModel& model, const AdmissibleCurve& base,
                           const Observer& obs, const TimeOrientation& T, const CurveFrame& frame,
                           int modes, const VariationOptions& opts, const Tolerances& tol) {
    (void)frame;
    const int n = model.dimension();
    const int nsp = n - 1;
    const int K = nsp * modes;

    auto spatial_profile = [&](int idx) {
        const int d = idx % nsp;
        const int m = idx / nsp + 1;
        auto a = [d, m, nsp](double s) {
            Vec v(static_cast<std::size_t>(nsp), 0.0);
            v[static_cast<std::size_t>(d)] = std::sin(m * kPi * s);
            return v;
        };
        auto da = [d, m, nsp](double s) {
            Vec v(static_cast<std::size_t>(nsp), 0.0);
            v[static_cast<std::size_t>(d)] = m * kPi * std::cos(m * kPi * s);
            return v;
        };
        return std::make_pair(std::function<Vec(double)>(a), std::function<Vec(double)>(da));
    };

    auto quadratic = [&](const std::function<Vec(double)>& a,
                         const std::function<Vec(double)>& da) {
        AllowedVariationFamily fam(model, base, obs, T, a, da, opts, tol);
        const double h = opts.hess_step;
        const double t0 = fam.tau(0.0);
        return (-fam.tau(2.0 * h) + 16.0 * fam.tau(h) - 30.0 * t0 + 16.0 * fam.tau(-h) -
                fam.tau(-2.0 * h)) /
               (12.0 * h * h);
    };

    Matrix H(K, K);
    for (int i = 0; i < K; ++i) {
        auto [a, da] = spatial_profile(i);
        H(i, i) = quadratic(a, da);
    }
    for (int i = 0; i < K; ++i)
        for (int j = i + 1; j < K; ++j) {
            auto [ai, dai] = spatial_profile(i);
            auto [aj, daj] = spatial_profile(j);
            auto sum_a = [ai, aj](double s) { return add(ai(s), aj(s)); };
            auto sum_da = [dai, daj](double s) { return add(dai(s), daj(s)); };
            auto dif_a = [ai, aj](double s) { return sub(ai(s), aj(s)); };
            auto dif_da = [dai, daj](double s) { return sub(dai(s), daj(s)); };
            const double qp = quadratic(sum_a, sum_da);
            const double qm = quadratic(dif_a, dif_da);
            H(i, j) = H(j, i) = 0.25 * (qp - qm);
        }
    return H;
}

// ---------------------------------------------------------------------------
// Jacobi fields and conjugate points
// ---------------------------------------------------------------------------

JacobiField jacobi_integrate(const CurveFrame& frame, const Vec& y0, const Vec& cy0, int steps) {
    const int n = frame.dim();
    JacobiField out;
    out.s.reserve(static_cast<std::size_t>(steps) + 1);
    out.y.reserve(static_cast<std::size_t>(steps) + 1);
    out.cy.reserve(static_cast<std::size_t>(steps) + 1);

    const double h = (frame.s_end() - frame.s_begin()) / steps;
    Vec y = y0, z = cy0;

    auto rhs = [&](double s, const Vec& yy, const Vec& zz, Vec& dy, Vec& dz) {
        const Vec gy = frame.chern_apply(s, yy);
        const Vec gz = frame.chern_apply(s, zz);
        const Vec ry = frame.curvature_op(s, yy);
        dy.resize(static_cast<std::size_t>(n));
        dz.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            dy[static_cast<std::size_t>(i)] =
                zz[static_cast<std::size_t>(i)] - gy[static_cast<std::size_t>(i)];
            dz[static_cast<std::size_t>(i)] =
                -ry[static_cast<std::size_t>(i)] - gz[static_cast<std::size_t>(i)];
        }
    };

    out.s.push_back(frame.s_begin());
    out.y.push_back(y);
    out.cy.push_back(z);
    Vec k1y, k1z, k2y, k2z, k3y, k3z, k4y, k4z, ty, tz;
    for (int k = 0; k < steps; ++k) {
        const double s = frame.s_begin() + k * h;
        rhs(s, y, z, k1y, k1z);
        ty = y;
        tz = z;
        axpy(0.5 * h, k1y, ty);
        axpy(0.5 * h, k1z, tz);
        rhs(s + 0.5 * h, ty, tz, k2y, k2z);
        ty = y;
        tz = z;
        axpy(0.5 * h, k2y, ty);
        axpy(0.5 * h, k2z, tz);
        rhs(s + 0.5 * h, ty, tz, k3y, k3z);
        ty = y;
        tz = z;
        axpy(h, k3y, ty);
        axpy(h, k3z, tz);
        rhs(s + h, ty, tz, k4y, k4z);
        for (int i = 0; i < n; ++i) {
            const std::size_t ii = static_cast<std::size_t>(i);
            y[ii] += h / 6.0 * (k1y[ii] + 2 * k2y[ii] + 2 * k3y[ii] + k4y[ii]);
            z[ii] += h / 6.0 * (k1z[ii] + 2 * k2z[ii] + 2 * k3z[ii] + k4z[ii]);
        }
        out.s.push_back(frame.s_begin() + (k + 1) * h);
        out.y.push_back(y);
        out.cy.push_back(z);
    }

    for (double sq : {0.25, 0.5, 0.75}) {
        const std::size_t k = static_cast<std::size_t>(sq * steps);
        const double s = out.s[k];
        const Vec dz = scaled(sub(out.cy[k + 1], out.cy[k - 1]), 0.5 / h);
        Vec ddy = frame.covariant_derivative(s, out.cy[k], dz);
        axpy(1.0, frame.curvature_op(s, out.y[k]), ddy);
        out.max_residual = std::max(out.max_residual, max_abs(ddy));
    }
    return out;
}

Vec JacobiField::y_at(double sq) const {
    UniformGrid g(s.front(), s.back(), y);
    return g.at(sq);
}

Vec JacobiField::cy_at(double sq) const {
    UniformGrid g(s.front(), s.back(), cy);
    return g.at(sq);
}

namespace {

// Kernel basis of a covector w: n-1 independent vectors with w . u = 0.
std::vector<Vec> covector_kernel(const Vec& w) {
    const int n = static_cast<int>(w.size());
    int p = 0;
    for (int i = 1; i < n; ++i)
        if (std::abs(w[static_cast<std::size_t>(i)]) > std::abs(w[static_cast<std::size_t>(p)]))
            p = i;
    std::vector<Vec> basis;
    for (int i = 0; i < n; ++i) {
        if (i == p) continue;
        Vec u(static_cast<std::size_t>(n), 0.0);
        u[static_cast<std::size_t>(i)] = 1.0;
        u[static_cast<std::size_t>(p)] =
            -w[static_cast<std::size_t>(i)] / w[static_cast<std::size_t>(p)];
        basis.push_back(std::move(u));
    }
    return basis;
}

}  // namespace

ConjugateSearch find_conjugate_points(const LagrangianModel& model, const AdmissibleCurve& base,
                                      const CurveFrame& frame, const Tolerances& tol) {
    const int n = model.dimension();
    const Vec x0 = base.position(0.0);
    const Vec v0 = base.velocity(0.0);
    const PointedVector p0{x0, v0};
    const double L0 = model.evaluate_raw(x0, v0);
    const bool lightlike = std::abs(L0) <= tol.lightlike_band * (1.0 + dot(v0, v0));

    // Transverse directions at the start: g-orthogonal to the velocity; for
    // lightlike curves the velocity direction itself is excluded and only the
    // quotient multiplicities are counted.
    const FundamentalTensor g0 = fundamental_tensor(model, p0, tol);
    const Vec w = g0.g.apply(v0);
    std::vector<Vec> kernel = covector_kernel(w);
    std::vector<Vec> transverse;
    if (!lightlike) {
        transverse = kernel;
    } else {
        const double vnorm2 = dot(v0, v0);
        std::vector<std::pair<double, Vec>> scored;
        for (Vec& u : kernel) {
            Vec r = u;
            axpy(-dot(u, v0) / vnorm2, v0, r);
            scored.emplace_back(norm(r), std::move(r));
        }
        std::sort(scored.begin(), scored.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });
        for (int k = 0; k < n - 2; ++k)
            transverse.push_back(scored[static_cast<std::size_t>(k)].second);
    }
    const int cols = static_cast<int>(transverse.size());

    const int steps = 4000;
    const double h = (frame.s_end() - frame.s_begin()) / steps;

    std::vector<Vec> P = transverse;  // parallel transported frame
    Vec pcomp(static_cast<std::size_t>(n), 0.0);
    {
        int p = 0;
        for (int i = 1; i < n; ++i)
            if (std::abs(w[static_cast<std::size_t>(i)]) > std::abs(w[static_cast<std::size_t>(p)]))
                p = i;
        pcomp[static_cast<std::size_t>(p)] = 1.0;  // g(v, pcomp) != 0 at the start
    }

    std::vector<Vec> Y(static_cast<std::size_t>(cols), Vec(static_cast<std::size_t>(n), 0.0));
    std::vector<Vec> Z = transverse;

    ConjugateSearch out;
    std::vector<std::vector<Vec>> y_history(static_cast<std::size_t>(cols));
    std::vector<double> s_history;

    auto transport_rhs = [&](double s, const Vec& u) {
        return scaled(frame.chern_apply(s, u), -1.0);
    };
    auto jacobi_rhs = [&](double s, const Vec& yy, const Vec& zz, Vec& dy, Vec& dz) {
        const Vec gy = frame.chern_apply(s, yy);
        const Vec gz = frame.chern_apply(s, zz);
        const Vec ry = frame.curvature_op(s, yy);
        dy.resize(static_cast<std::size_t>(n));
        dz.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            dy[static_cast<std::size_t>(i)] =
                zz[static_cast<std::size_t>(i)] - gy[static_cast<std::size_t>(i)];
            dz[static_cast<std::size_t>(i)] =
                -ry[static_cast<std::size_t>(i)] - gz[static_cast<std::size_t>(i)];
        }
    };

    auto rk4_vec = [&](double s, Vec& u, auto&& f) {
        const Vec k1 = f(s, u);
        Vec t1 = u;
        axpy(0.5 * h, k1, t1);
        const Vec k2 = f(s + 0.5 * h, t1);
        Vec t2 = u;
        axpy(0.5 * h, k2, t2);
        const Vec k3 = f(s + 0.5 * h, t2);
        Vec t3 = u;
        axpy(h, k3, t3);
        const Vec k4 = f(s + h, t3);
        for (std::size_t i = 0; i < u.size(); ++i)
            u[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    };

    auto record = [&](double s) {
        Matrix B(n, n);
        for (int col = 0; col < cols; ++col)
            for (int r = 0; r < n; ++r)
                B(r, col) = P[static_cast<std::size_t>(col)][static_cast<std::size_t>(r)];
        const Vec vs = frame.v_at(s);
        for (int r = 0; r < n; ++r) B(r, cols) = vs[static_cast<std::size_t>(r)];
        if (lightlike)
            for (int r = 0; r < n; ++r) B(r, cols + 1) = pcomp[static_cast<std::size_t>(r)];

        Matrix M(cols, cols);
        bool ok = true;
        for (int col = 0; col < cols && ok; ++col) {
            try {
                Vec coef = solve(B, Y[static_cast<std::size_t>(col)]);
                for (int r = 0; r < cols; ++r) M(r, col) = coef[static_cast<std::size_t>(r)];
            } catch (const DegenerateMetric&) {
                ok = false;
            }
        }
        out.s_samples.push_back(s);
        out.det_samples.push_back(ok ? determinant(M) : 0.0);
        s_history.push_back(s);
        for (int col = 0; col < cols; ++col)
            y_history[static_cast<std::size_t>(col)].push_back(Y[static_cast<std::size_t>(col)]);
    };

    record(frame.s_begin());
    for (int k = 0; k < steps; ++k) {
        const double s = frame.s_begin() + k * h;
        for (Vec& u : P) rk4_vec(s, u, transport_rhs);
        if (lightlike) rk4_vec(s, pcomp, transport_rhs);
        for (int col = 0; col < cols; ++col) {
            Vec& yy = Y[static_cast<std::size_t>(col)];
            Vec& zz = Z[static_cast<std::size_t>(col)];
            Vec k1y, k1z, k2y, k2z, k3y, k3z, k4y, k4z, ty, tz;
            jacobi_rhs(s, yy, zz, k1y, k1z);
            ty = yy;
            tz = zz;
            axpy(0.5 * h, k1y, ty);
            axpy(0.5 * h, k1z, tz);
            jacobi_rhs(s + 0.5 * h, ty, tz, k2y, k2z);
            ty = yy;
            tz = zz;
            axpy(0.5 * h, k2y, ty);
            axpy(0.5 * h, k2z, tz);
            jacobi_rhs(s + 0.5 * h, ty, tz, k3y, k3z);
            ty = yy;
            tz = zz;
            axpy(h, k3y, ty);
            axpy(h, k3z, tz);
            jacobi_rhs(s + h, ty, tz, k4y, k4z);
            for (int i = 0; i < n; ++i) {
                const std::size_t ii = static_cast<std::size_t>(i);
                yy[ii] += h / 6.0 * (k1y[ii] + 2 * k2y[ii] + 2 * k3y[ii] + k4y[ii]);
                zz[ii] += h / 6.0 * (k1z[ii] + 2 * k2z[ii] + 2 * k3z[ii] + k4z[ii]);
            }
        }
        record(frame.s_begin() + (k + 1) * h);
    }

    const double s_lo = frame.s_begin() + 0.02 * (frame.s_end() - frame.s_begin());
    double dscale = 0.0;
    for (double d : out.det_samples) dscale = std::max(dscale, std::abs(d));

    UniformGrid det_interp(out.s_samples.front(), out.s_samples.back(), [&] {
        std::vector<Vec> vals;
        vals.reserve(out.det_samples.size());
        for (double d : out.det_samples) vals.push_back(Vec{d});
        return vals;
    }());

    auto refine_root = [&](std::size_t k) {
        double a = out.s_samples[k], b = out.s_samples[k + 1];
        double fa = out.det_samples[k];
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (a + b);
            const double fm = det_interp.at(mid)[0];
            if ((fa < 0) == (fm < 0)) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
            if (b - a < 1e-13) break;
        }
        return 0.5 * (a + b);
    };

    // Rank deficiency from the Gram matrix of the interpolated Jacobi columns.
    auto multiplicity_at = [&](double s_star) {
        std::vector<Vec> cols_at;
        for (int col = 0; col < cols; ++col) {
            UniformGrid gcol(s_history.front(), s_history.back(),
                             y_history[static_cast<std::size_t>(col)]);
            cols_at.push_back(gcol.at(s_star));
        }
        Matrix Mg(cols, cols);
        for (int a = 0; a < cols; ++a)
            for (int b = 0; b < cols; ++b)
                Mg(a, b) = dot(cols_at[static_cast<std::size_t>(a)],
                               cols_at[static_cast<std::size_t>(b)]);
        const Vec sv = singular_values(Mg);
        int deficiency = 0;
        for (double s : sv)
            if (s < 1e-10 * (sv.front() + 1e-300)) ++deficiency;
        return std::max(1, deficiency);
    };

    for (std::size_t k = 0; k + 1 < out.det_samples.size(); ++k) {
        if (out.s_samples[k] < s_lo) continue;
        const double d0 = out.det_samples[k], d1 = out.det_samples[k + 1];
        if ((d0 < 0.0) != (d1 < 0.0)) {
            const double s_star = refine_root(k);
            out.points.push_back({s_star, multiplicity_at(s_star)});
        } else if (k > 0) {
            const double dm = std::abs(out.det_samples[k]);
            if (dm < 1e-9 * dscale && dm <= std::abs(out.det_samples[k - 1]) &&
                dm <= std::abs(out.det_samples[k + 1]) &&
                (d0 < 0.0) == (out.det_samples[k - 1] < 0.0)) {
                const double s_star = out.s_samples[k];
                const int mult = multiplicity_at(s_star);
                if (mult >= 2 || dm == 0.0) out.points.push_back({s_star, std::max(mult, 2)});
            }
        }
    }

    // A zero landing exactly on the arrival endpoint produces no interior
    // sign change; extrapolate the tail secant to catch it.
    {
        const std::size_t last = out.det_samples.size() - 1;
        const double d_last = out.det_samples[last];
        const double d_prev = out.det_samples[last - 1];
        const bool already = !out.points.empty() &&
                             std::abs(out.points.back().s - out.s_samples[last]) < 1e-5;
        if (!already && std::abs(d_last) < 1e-6 * dscale && d_last != d_prev) {
            const double root = out.s_samples[last] +
                                (out.s_samples[last] - out.s_samples[last - 1]) * d_last /
                                    (d_prev - d_last);
            if (std::abs(root - out.s_samples[last]) <= 1e-6)
                out.points.push_back({std::min(root, out.s_samples[last]),
                                      multiplicity_at(out.s_samples[last])});
        }
    }
    return out;
}

int morse_index(const ConjugateSearch& search, double endpoint_band) {
    int idx = 0;
    for (const ConjugatePoint& cp : search.points) {
        if (std::abs(cp.s - 1.0) <= endpoint_band)
            throw EndpointConjugate("morse_index: conjugate point at the arrival endpoint");
        if (cp.s > endpoint_band && cp.s < 1.0 - endpoint_band) idx += cp.multiplicity;
    }
    return idx;
}

CriticalCharacter classify_critical_point(const ConjugateSearch& search, double endpoint_band) {
    bool interior = false;
    for (const ConjugatePoint& cp : search.points) {
        if (std::abs(cp.s - 1.0) <= endpoint_band) return CriticalCharacter::boundary_case;
        if (cp.s > endpoint_band && cp.s < 1.0 - endpoint_band) interior = true;
    }
    return interior ? CriticalCharacter::saddle : CriticalCharacter::local_min;
}

double energy_functional(const LagrangianModel& model, const AdmissibleCurve& curve,
                         double quad_tol) {
    auto integrand = [&](double s) {
        const Vec x = curve.position(s);
        const Vec v = curve.velocity(s);
        return model.evaluate_raw(x, v);
    };
    return adaptive_simpson(integrand, 0.0, 1.0, quad_tol, 32);
}

}  // namespace finsler

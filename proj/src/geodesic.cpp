#include "finsler/geodesic.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace finsler {

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

// Internal signal: a trial stage left the regular domain; the step shrinks.
struct StageOutOfDomain {};

struct Rhs {
    const LagrangianModel& model;
    const Tolerances& tol;
    int n;

    Vec operator()(const Vec& u) const {
        Vec x(u.begin(), u.begin() + n);
        Vec v(u.begin() + n, u.end());
        PointedVector p{std::move(x), std::move(v)};
        if (model.regularity_margin(p) <= tol.margin_floor) throw StageOutOfDomain{};
        Vec acc = geodesic_acceleration(model, p, tol);
        Vec du(static_cast<std::size_t>(2 * n));
        for (int i = 0; i < n; ++i) {
            du[static_cast<std::size_t>(i)] = p.y[static_cast<std::size_t>(i)];
            du[static_cast<std::size_t>(n + i)] = acc[static_cast<std::size_t>(i)];
        }
        return du;
    }
};

Vec lc(const Vec& u, double h, std::initializer_list<std::pair<double, const Vec*>> terms) {
    Vec r = u;
    for (const auto& [c, k] : terms) axpy(h * c, *k, r);
    return r;
}

}  // namespace

Vec DenseSegment::eval(double s) const {
    const double theta = (s - s0) / h;
    const std::size_t m = rcont[0].size();
    Vec out(m);
    for (std::size_t i = 0; i < m; ++i) {
        out[i] = rcont[0][i] +
                 theta * (rcont[1][i] +
                          (1.0 - theta) *
                              (rcont[2][i] +
                               theta * (rcont[3][i] + (1.0 - theta) * rcont[4][i])));
    }
    return out;
}

GeodesicPath::GeodesicPath(std::vector<CurveSample> nodes, std::vector<double> energies,
                           std::vector<DenseSegment> segments, IntegratorStats stats)
    : nodes_(std::move(nodes)),
      energies_(std::move(energies)),
      segments_(std::move(segments)),
      stats_(stats) {}

const DenseSegment& GeodesicPath::segment_at(double s) const {
    if (segments_.empty()) throw Error("geodesic path: no dense output");
    // Binary search over segment starts.
    std::size_t lo = 0, hi = segments_.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi + 1) / 2;
        if (segments_[mid].s0 <= s)
            lo = mid;
        else
            hi = mid - 1;
    }
    return segments_[lo];
}

Vec GeodesicPath::position(double s) const {
    const Vec u = segment_at(s).eval(s);
    return Vec(u.begin(), u.begin() + static_cast<long>(u.size() / 2));
}

Vec GeodesicPath::velocity(double s) const {
    const Vec u = segment_at(s).eval(s);
    return Vec(u.begin() + static_cast<long>(u.size() / 2), u.end());
}

CurveSample GeodesicPath::state(double s) const {
    const Vec u = segment_at(s).eval(s);
    const std::size_t n = u.size() / 2;
    return {s, Vec(u.begin(), u.begin() + static_cast<long>(n)),
            Vec(u.begin() + static_cast<long>(n), u.end())};
}

double GeodesicPath::energy_drift() const {
    double drift = 0.0;
    for (double e : energies_) drift = std::max(drift, std::abs(e - energies_.front()));
    return drift;
}

std::vector<CurveSample> GeodesicPath::resample(int count) const {
    std::vector<CurveSample> out;
    out.reserve(static_cast<std::size_t>(count));
    const double s0 = s_begin(), s1 = s_end();
    for (int k = 0; k < count; ++k) {
        const double s = s0 + (s1 - s0) * k / (count - 1);
        out.push_back(state(s));
    }
    return out;
}

Vec geodesic_acceleration(const LagrangianModel& model, const PointedVector& p,
                          const Tolerances& tol) {
    const int n = model.dimension();
    const Jet j = eval_full_jet(model, p);
    Matrix g(n, n);
    Vec rhs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double mixed = 0.0;  // (d2L/dx^k dy^i) xd^k
        for (int k = 0; k < n; ++k) mixed += j.hess(k, n + i) * p.y[static_cast<std::size_t>(k)];
        rhs[static_cast<std::size_t>(i)] = j.grad(i) - mixed;
        for (int c = 0; c < n; ++c) g(i, c) = j.hess(n + i, n + c);
    }
    (void)tol;
    return solve(std::move(g), std::move(rhs));
}

GeodesicPath integrate(const LagrangianModel& model, const GeodesicIVP& ivp,
                       const IntegratorOptions& opts, const Tolerances& tol) {
    const int n = model.dimension();
    if (static_cast<int>(ivp.x0.size()) != n || static_cast<int>(ivp.y0.size()) != n)
        throw DimensionMismatch("integrate: initial data dimension mismatch");

    const Rhs rhs{model, tol, n};
    const double span = ivp.s1 - ivp.s0;
    if (span <= 0.0) throw BadParameter("integrate: empty parameter span");

    Vec u(static_cast<std::size_t>(2 * n));
    std::copy(ivp.x0.begin(), ivp.x0.end(), u.begin());
    std::copy(ivp.y0.begin(), ivp.y0.end(), u.begin() + n);

    {
        PointedVector p{ivp.x0, ivp.y0};
        model.require_regular(p, tol.margin_floor);
    }

    std::vector<CurveSample> nodes;
    std::vector<double> energies;
    std::vector<DenseSegment> segments;
    IntegratorStats stats;
    stats.rtol = opts.rtol;
    stats.atol = opts.atol;

    auto record = [&](double s, const Vec& state) {
        CurveSample cs{s, Vec(state.begin(), state.begin() + n), Vec(state.begin() + n, state.end())};
        energies.push_back(model.evaluate_raw(cs.x, cs.v));
        nodes.push_back(std::move(cs));
    };
    record(ivp.s0, u);

    double s = ivp.s0;
    double h = std::min(opts.initial_step, span);
    Vec k1 = rhs(u);
    double facold = 1e-4;

    while (s < ivp.s1 - 1e-14 * span) {
        if (stats.steps + stats.rejected > opts.max_steps)
            throw StepFailure("integrate: step budget exhausted at s = " + std::to_string(s));
        h = std::min(h, ivp.s1 - s);
        if (h < 1e-14 * span) {
            const CurveSample& last = nodes.back();
            throw SingularPoint(model.name() + ": step size collapsed near a singular set",
                                last.x, last.v, last.s);
        }

        bool stage_failed = false;
        Vec k2, k3, k4, k5, k6, k7, u1;
        try {
            k2 = rhs(lc(u, h, {{a21, &k1}}));
            k3 = rhs(lc(u, h, {{a31, &k1}, {a32, &k2}}));
            k4 = rhs(lc(u, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
            k5 = rhs(lc(u, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
            k6 = rhs(lc(u, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
            u1 = lc(u, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
            k7 = rhs(u1);
        } catch (const StageOutOfDomain&) {
            stage_failed = true;
        } catch (const DegenerateMetric&) {
            stage_failed = true;
        }

        double err = 0.0;
        if (!stage_failed) {
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                       e6 * k6[i] + e7 * k7[i]);
                const double sc =
                    opts.atol + opts.rtol * std::max(std::abs(u[i]), std::abs(u1[i]));
                err += (ei / sc) * (ei / sc);
            }
            err = std::sqrt(err / static_cast<double>(u.size()));
            if (!std::isfinite(err)) stage_failed = true;
        }

        if (stage_failed) {
            ++stats.rejected;
            h *= 0.25;
            continue;
        }

        if (err > 1.0) {
            ++stats.rejected;
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            continue;
        }

        DenseSegment seg;
        seg.s0 = s;
        seg.h = h;
        seg.rcont.resize(5, Vec(u.size()));
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double ydiff = u1[i] - u[i];
            const double bspl = h * k1[i] - ydiff;
            seg.rcont[0][i] = u[i];
            seg.rcont[1][i] = ydiff;
            seg.rcont[2][i] = bspl;
            seg.rcont[3][i] = ydiff - h * k7[i] - bspl;
            seg.rcont[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                   d6 * k6[i] + d7 * k7[i]);
        }
        segments.push_back(std::move(seg));

        s += h;
        u = u1;
        k1 = k7;  // first-same-as-last
        ++stats.steps;
        record(s, u);

        const double fac = std::pow(err, 0.17) / std::pow(facold, 0.04);
        facold = std::max(err, 1e-4);
        h *= std::min(5.0, std::max(0.2, 0.9 / fac));
    }

    GeodesicPath path(std::move(nodes), std::move(energies), std::move(segments), stats);
    if (opts.check_energy && path.energy_drift() > opts.energy_tol)
        throw EnergyDriftExceeded("integrate: energy drift " + std::to_string(path.energy_drift()) +
                                  " exceeds tolerance");
    return path;
}

AffineReparam affine_reparameterize(const LagrangianModel& model,
                                    const std::vector<CurveSample>& curve,
                                    const IntegratorOptions& opts, const Tolerances& tol) {
    const std::size_t m = curve.size();
    if (m < 5) throw BadParameter("affine_reparameterize: need at least five samples");
    const int n = model.dimension();
    const double dt = curve[1].s - curve[0].s;
    for (std::size_t k = 1; k < m; ++k)
        if (std::abs((curve[k].s - curve[k - 1].s) - dt) > 1e-9 * std::abs(dt))
            throw BadParameter("affine_reparameterize: samples must be uniform in the parameter");

    // Acceleration of the input curve by fourth-order differences of v.
    auto accel_at = [&](std::size_t k) {
        Vec a(static_cast<std::size_t>(n));
        auto v = [&](std::size_t i) -> const Vec& { return curve[i].v; };
        for (int c = 0; c < n; ++c) {
            const std::size_t cc = static_cast<std::size_t>(c);
            if (k >= 2 && k + 2 < m)
                a[cc] = (-v(k + 2)[cc] + 8 * v(k + 1)[cc] - 8 * v(k - 1)[cc] + v(k - 2)[cc]) /
                        (12 * dt);
            else if (k == 0)
                a[cc] = (-3 * v(0)[cc] + 4 * v(1)[cc] - v(2)[cc]) / (2 * dt);
            else if (k == m - 1)
                a[cc] = (3 * v(m - 1)[cc] - 4 * v(m - 2)[cc] + v(m - 3)[cc]) / (2 * dt);
            else if (k == 1)
                a[cc] = (v(2)[cc] - v(0)[cc]) / (2 * dt);
            else
                a[cc] = (v(k + 1)[cc] - v(k - 1)[cc]) / (2 * dt);
        }
        return a;
    };

    AffineReparam out;
    out.f_nodes.resize(m);
    out.input_params.resize(m);
    Vec rho(m);
    double worst_orth = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        out.input_params[k] = curve[k].s;
        PointedVector p{curve[k].x, curve[k].v};
        const Vec a_geo = geodesic_acceleration(model, p, tol);
        const Vec defect = sub(accel_at(k), a_geo);
        const double v2 = dot(curve[k].v, curve[k].v);
        rho[k] = dot(defect, curve[k].v) / v2;
        Vec orth = defect;
        axpy(-rho[k], curve[k].v, orth);
        worst_orth = std::max(worst_orth, norm(orth) / (1.0 + norm(a_geo) + std::abs(rho[k]) * std::sqrt(v2)));
        out.f_nodes[k] = rho[k];
    }
    out.orthogonal_residual = worst_orth;
    if (worst_orth > 1e-4)
        throw NotAGeodesic("affine_reparameterize: acceleration defect is not parallel to the "
                           "velocity (residual " + std::to_string(worst_orth) + ")");

    // w(t) = exp(int rho), accumulated with quadratic end-corrected rules so
    // the recovered affine scale keeps fourth-order accuracy.
    auto cum_step = [&](const Vec& f, std::size_t k) {
        // integral of f over [t_{k-1}, t_k] from the parabola through three
        // neighbouring nodes.
        if (k + 1 < m)
            return dt / 12.0 * (5.0 * f[k - 1] + 8.0 * f[k] - f[k + 1]);
        return dt / 12.0 * (-f[k - 2] + 8.0 * f[k - 1] + 5.0 * f[k]);
    };
    Vec w(m, 1.0);
    double acc = 0.0;
    for (std::size_t k = 1; k < m; ++k) {
        acc += cum_step(rho, k);
        w[k] = std::exp(acc);
    }
    double total = 0.0;
    for (std::size_t k = 1; k < m; ++k) total += cum_step(w, k);

    // Affine initial velocity: dt/ds at t0 equals total.
    GeodesicIVP ivp;
    ivp.x0 = curve.front().x;
    ivp.y0 = scaled(curve.front().v, total);
    out.path = integrate(model, ivp, opts, tol);
    return out;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
    struct Rec {
        const std::function<double(double)>& f;
        double operator()(double a, double fa, double b, double fb, double m, double fm,
                          double whole, double tol, int depth) const {
            const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = f(lm), frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
                return left + right + (left + right - whole) / 15.0;
            return (*this)(a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
                   (*this)(m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
        }
    };
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return Rec{f}(a, fa, b, fb, m, fm, whole, tol, max_depth);
}

double proper_time(const LagrangianModel& model, const GeodesicPath& path, double r1, double r2,
                   const Tolerances& tol) {
    auto integrand = [&](double s) {
        const CurveSample cs = path.state(s);
        const double L = model.evaluate_raw(cs.x, cs.v);
        if (L >= -tol.lightlike_band * (1.0 + dot(cs.v, cs.v)))
            throw NotTimelike("proper_time: curve is not timelike at s = " + std::to_string(s));
        return std::sqrt(-L);
    };
    return adaptive_simpson(integrand, r1, r2, 1e-12, 40);
}

void export_csv(const LagrangianModel& model, const GeodesicPath& path, std::ostream& os,
                int samples) {
    const int n = model.dimension();
    os << "s";
    for (int i = 0; i < n; ++i) os << ",x" << i;
    for (int i = 0; i < n; ++i) os << ",v" << i;
    os << ",L\n";
    char buf[64];
    auto put = [&](double v, bool lead_comma) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        if (lead_comma) os << ',';
        os << buf;
    };
    for (const CurveSample& cs : path.resample(samples)) {
        put(cs.s, false);
        for (int i = 0; i < n; ++i) put(cs.x[static_cast<std::size_t>(i)], true);
        for (int i = 0; i < n; ++i) put(cs.v[static_cast<std::size_t>(i)], true);
        put(model.evaluate_raw(cs.x, cs.v), true);
        os << '\n';
    }
}

}  // namespace finsler

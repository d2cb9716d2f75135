#include "finsler/models.hpp"

#include <algorithm>
#include <cmath>

namespace finsler {

namespace {

constexpr double kPi = 3.14159265358979323846;

double uni(std::mt19937_64& rng, double a, double b) {
    std::uniform_real_distribution<double> d(a, b);
    return d(rng);
}

double min_of(std::initializer_list<double> xs) {
    double m = *xs.begin();
    for (double v : xs) m = std::min(m, v);
    return m;
}

template <class T>
T ipow(T base, int k) {
    T r = base;
    for (int i = 1; i < k; ++i) r = r * base;
    return r;
}

// Relative eigenvalue margin of the fiber Hessian: positive and scale-free
// where the vertical Hessian has Lorentzian signature, negative otherwise.
// Used by models whose regular domain is declared through non-degeneracy.
double signature_margin(const LagrangianModel& model, const PointedVector& p) {
    const int n = model.dimension();
    std::vector<Jet> xs, ys;
    for (int i = 0; i < n; ++i) xs.emplace_back(p.x[static_cast<std::size_t>(i)], n);
    for (int i = 0; i < n; ++i)
        ys.push_back(Jet::variable(p.y[static_cast<std::size_t>(i)], i, n));
    const Jet j = model.evaluate_jet(xs, ys);
    Matrix g(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) g(a, b) = j.hess(a, b);
    const Vec ev = symmetric_eigenvalues(g);
    double max_abs_ev = 0.0, min_abs_ev = 1e300;
    int negatives = 0;
    for (double e : ev) {
        max_abs_ev = std::max(max_abs_ev, std::abs(e));
        min_abs_ev = std::min(min_abs_ev, std::abs(e));
        if (e < 0.0) ++negatives;
    }
    if (max_abs_ev == 0.0) return -1.0;
    const double frac = min_abs_ev / max_abs_ev;
    return negatives == 1 ? frac : -std::max(frac, 1e-3);
}

// ---------------------------------------------------------------------------
// Flat spacetime
// ---------------------------------------------------------------------------

class MinkowskiModel : public ScalarModel<MinkowskiModel> {
public:
    explicit MinkowskiModel(int n) : n_(n) {}

    template <class T>
    T eval_impl(const T* x, const T* y) const {
        (void)x;
        T s = -(y[0] * y[0]);
        for (int i = 1; i < n_; ++i) s += y[i] * y[i];
        return s;
    }

    std::string name() const override { return "minkowski"; }
    int dimension() const override { return n_; }
    double regularity_margin(const PointedVector& p) const override { return norm(p.y); }
    bool quadratic_in_y() const override { return true; }
    AnalyticLevel analytic_level() const override { return AnalyticLevel::third; }
    std::map<std::string, double> params() const override { return {{"n", double(n_)}}; }
    std::string chart_description() const override {
        return "inertial chart (t, x^1, ..), signature (-,+,..,+)";
    }
    std::vector<PointedVector> reference_points() const override {
        Vec x(static_cast<std::size_t>(n_), 0.0);
        Vec t(static_cast<std::size_t>(n_), 0.0), sp = t, nl = t, mixed = t;
        t[0] = 1.0;
        sp[1] = 1.0;
        nl[0] = 1.0;
        nl[1] = 1.0;
        mixed[0] = 1.0;
        mixed[1] = 0.3;
        if (n_ > 2) mixed[2] = -0.2;
        return {{x, t}, {x, sp}, {x, nl}, {x, mixed}};
    }

private:
    int n_;
};

// ---------------------------------------------------------------------------
// Quadratic Lagrangian of a Lorentzian metric field
// ---------------------------------------------------------------------------

class LorentzianModel : public LagrangianModel {
public:
    LorentzianModel(std::string name, MetricField field,
                    std::function<double(const PointedVector&)> margin,
                    std::map<std::string, double> params, std::string chart,
                    std::vector<PointedVector> refs)
        : name_(std::move(name)),
          field_(std::move(field)),
          margin_(std::move(margin)),
          params_(std::move(params)),
          chart_(std::move(chart)),
          refs_(std::move(refs)) {}

    double evaluate_raw(std::span<const double> x, std::span<const double> y) const override {
        const int n = field_.n;
        std::vector<double> g(static_cast<std::size_t>(n) * n);
        field_.value(x.data(), g.data());
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                s += g[static_cast<std::size_t>(i) * n + j] * y[static_cast<std::size_t>(i)] *
                     y[static_cast<std::size_t>(j)];
        return s;
    }

    Jet evaluate_jet(std::span<const Jet> x, std::span<const Jet> y) const override {
        const int n = field_.n;
        std::vector<Jet> g(static_cast<std::size_t>(n) * n);
        field_.jet(x.data(), g.data());
        Jet s = g[0] * (y[0] * y[0]);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == 0 && j == 0) continue;
                s += g[static_cast<std::size_t>(i) * n + j] * (y[static_cast<std::size_t>(i)] *
                                                               y[static_cast<std::size_t>(j)]);
            }
        return s;
    }

    std::string name() const override { return name_; }
    int dimension() const override { return field_.n; }
    double regularity_margin(const PointedVector& p) const override {
        return margin_ ? std::min(margin_(p), norm(p.y)) : norm(p.y);
    }
    bool quadratic_in_y() const override { return true; }
    AnalyticLevel analytic_level() const override { return AnalyticLevel::third; }
    std::map<std::string, double> params() const override { return params_; }
    std::string chart_description() const override { return chart_; }
    std::vector<PointedVector> reference_points() const override { return refs_; }

private:
    std::string name_;
    MetricField field_;
    std::function<double(const PointedVector&)> margin_;
    std::map<std::string, double> params_;
    std::string chart_;
    std::vector<PointedVector> refs_;
};

// ---------------------------------------------------------------------------
// Rutz static spherically symmetric vacuum solution
// ---------------------------------------------------------------------------

class RutzModel : public ScalarModel<RutzModel> {
public:
    RutzModel(double m, double delta) : m_(m), delta_(delta) {
        if (m <= 0.0) throw BadParameter("rutz: mass must be positive");
    }

    template <class T>
    T eval_impl(const T* x, const T* y) const {
        using std::sin;
        using std::sqrt;
        const T& r = x[1];
        const T& theta = x[2];
        const T f = 1.0 - (2.0 * m_) / r;
        const T st = sin(theta);
        const T ang = y[2] * y[2] + st * st * (y[3] * y[3]);
        const T domega_dt = sqrt(ang) / y[0];
        return -(f * (1.0 - delta_ * domega_dt)) * (y[0] * y[0]) + (y[1] * y[1]) / f +
               (r * r) * ang;
    }

    std::string name() const override { return "rutz"; }
    int dimension() const override { return 4; }
    double regularity_margin(const PointedVector& p) const override {
        const double r = p.x[1], theta = p.x[2];
        const double st = std::sin(theta);
        const double ang = p.y[2] * p.y[2] + st * st * p.y[3] * p.y[3];
        const double yt = std::abs(p.y[0]);
        if (yt == 0.0) return -1.0;
        const double domega = std::sqrt(std::max(ang, 0.0)) / yt;
        return min_of({r - 2.0 * m_, theta, kPi - theta, yt, domega - 1e-8, norm(p.y)});
    }
    std::map<std::string, double> params() const override {
        return {{"m", m_}, {"delta", delta_}};
    }
    std::string chart_description() const override {
        return "spherical chart (t, r, theta, phi); regular for r > 2m, y_t != 0, "
               "angular speed bounded away from zero";
    }
    std::vector<PointedVector> reference_points() const override {
        return {{{0.0, 4.0 * m_, kPi / 2, 0.0}, {1.0, 0.2, 0.3, 0.1}},
                {{0.0, 6.0 * m_, 1.2, 0.5}, {1.0, -0.1, 0.2, 0.4}},
                {{0.0, 3.0 * m_, 1.8, -0.5}, {0.8, 0.0, -0.3, 0.2}}};
    }

private:
    double m_, delta_;
};

// ---------------------------------------------------------------------------
// Beem's cone example, axially completed to three dimensions
// ---------------------------------------------------------------------------

// The printed two-variable Lagrangian is extended rotationally in (y2, y3):
// on the y3 = 0 slice it reduces to (y1^3 - y1 y2^2)/sqrt(y1^2 + y2^2)
// exactly. Without the completion the vertical Hessian is identically
// degenerate in the third fiber direction and no point is regular.
class BeemR3Model : public ScalarModel<BeemR3Model> {
public:
    template <class T>
    T eval_impl(const T* x, const T* y) const {
        using std::sqrt;
        (void)x;
        const T q2 = y[1] * y[1] + y[2] * y[2];
        const T n2 = y[0] * y[0] + q2;
        return (y[0] * y[0] * y[0] - y[0] * q2) / sqrt(n2);
    }

    std::string name() const override { return "beem_r3"; }
    int dimension() const override { return 3; }
    double regularity_margin(const PointedVector& p) const override {
        const double ny = norm(p.y);
        if (ny == 0.0) return -1.0;
        return std::min(ny, signature_margin(*this, p));
    }
    double evaluable_margin(const PointedVector& p) const override { return norm(p.y); }
    std::string chart_description() const override {
        return "cartesian chart on R^3; six indicatrix components, cone around -e1 "
               "selected by the default time orientation";
    }
    Vec default_time_orientation(std::span<const double> x) const override {
        (void)x;
        return {-1.0, 0.0, 0.0};
    }
    std::vector<PointedVector> reference_points() const override {
        return {{{0.0, 0.0, 0.0}, {-1.0, 0.1, 0.05}},
                {{0.3, -0.2, 0.1}, {-1.5, -0.2, 0.1}},
                {{0.0, 0.0, 0.0}, {-1.0, 0.0, 0.25}}};
    }
};

// ---------------------------------------------------------------------------
// Bogoslovsky / very special relativity family
// ---------------------------------------------------------------------------

// Real powers of the negative Minkowski form are taken on the principal
// branch: L = -(-eta)^(1-b) |n(y)|^(2b), real and negative inside the cone.
class BogoslovskyModel : public ScalarModel<BogoslovskyModel> {
public:
    BogoslovskyModel(double b, Vec null_dir) : b_(b), n_(std::move(null_dir)) {
        if (b_ == 1.0) throw BadParameter("bogoslovsky: b = 1 is excluded");
        if (n_.size() != 4) throw BadParameter("bogoslovsky: null direction must be 4d");
    }

    template <class T>
    T eval_impl(const T* x, const T* y) const {
        using std::abs;
        using std::pow;
        (void)x;
        T eta = -(y[0] * y[0]);
        for (int i = 1; i < 4; ++i) eta += y[i] * y[i];
        T nu = n_[0] * y[0];
        for (int i = 1; i < 4; ++i) nu += n_[static_cast<std::size_t>(i)] * y[i];
        return -1.0 * pow(-eta, 1.0 - b_) * pow(abs(nu), 2.0 * b_);
    }

    std::string name() const override { return "bogoslovsky"; }
    int dimension() const override { return 4; }
    double regularity_margin(const PointedVector& p) const override {
        double eta = -p.y[0] * p.y[0];
        for (int i = 1; i < 4; ++i) eta += p.y[static_cast<std::size_t>(i)] * p.y[static_cast<std::size_t>(i)];
        double nu = 0.0;
        for (int i = 0; i < 4; ++i) nu += n_[static_cast<std::size_t>(i)] * p.y[static_cast<std::size_t>(i)];
        if (eta >= 0.0) return -std::sqrt(eta);
        return std::min(std::sqrt(-eta), std::abs(nu));
    }
    std::map<std::string, double> params() const override { return {{"b", b_}}; }
    std::string chart_description() const override {
        return "inertial chart; regular strictly inside the eta < 0 cone away from n(y) = 0";
    }
    std::vector<PointedVector> reference_points() const override {
        const Vec x{0.0, 0.0, 0.0, 0.0};
        return {{x, {1.0, 0.2, 0.1, 0.3}}, {x, {1.0, 0.0, 0.0, 0.0}}, {x, {2.0, -0.3, 0.4, 0.2}}};
    }

private:
    double b_;
    Vec n_;
};

// ---------------------------------------------------------------------------
// Bi-metric (birefringent) family
// ---------------------------------------------------------------------------

// sqrt(L+ L-) is given the sign of the common causal region: negative where
// both factors are timelike, positive where both are spacelike.
class BimetricModel : public LagrangianModel {
public:
    BimetricModel(std::string name, MetricField hp, MetricField hm,
                  std::map<std::string, double> params)
        : name_(std::move(name)), hp_(std::move(hp)), hm_(std::move(hm)), params_(std::move(params)) {
        if (hp_.n != hm_.n) throw BadParameter("bimetric: factor dimensions differ");
    }

    double evaluate_raw(std::span<const double> x, std::span<const double> y) const override {
        const double lp = quad(hp_, x, y), lm = quad(hm_, x, y);
        const double prod = lp * lm;
        if (prod <= 0.0)
            throw SingularPoint("bimetric: evaluation between the null cones");
        return (lp < 0.0 ? -1.0 : 1.0) * std::sqrt(prod);
    }

    Jet evaluate_jet(std::span<const Jet> x, std::span<const Jet> y) const override {
        const Jet lp = quad_jet(hp_, x, y), lm = quad_jet(hm_, x, y);
        const double sign = lp.value() < 0.0 ? -1.0 : 1.0;
        return sign * sqrt(lp * lm);
    }

    std::string name() const override { return name_; }
    int dimension() const override { return hp_.n; }
    double regularity_margin(const PointedVector& p) const override {
        const double lp = quad(hp_, p.x, p.y), lm = quad(hm_, p.x, p.y);
        const double a = std::sqrt(std::abs(lp)), b = std::sqrt(std::abs(lm));
        const double m = std::min({a, b, norm(p.y), signature_margin(*this, p)});
        return (lp * lm > 0.0) ? m : -std::max(std::min(a, b), 1e-3);
    }
    std::map<std::string, double> params() const override { return params_; }
    std::string chart_description() const override {
        return "common chart of two Lorentzian factors; singular on both null cones";
    }
    std::vector<PointedVector> reference_points() const override {
        const Vec x{0.0, 0.0, 0.0, 0.0};
        return {{x, {1.0, 0.1, 0.2, 0.05}}, {x, {1.0, 0.0, 0.0, 0.0}}, {x, {0.1, 1.0, 0.2, 0.0}}};
    }

private:
    static double quad(const MetricField& f, std::span<const double> x, std::span<const double> y) {
        const int n = f.n;
        std::vector<double> g(static_cast<std::size_t>(n) * n);
        f.value(x.data(), g.data());
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                s += g[static_cast<std::size_t>(i) * n + j] * y[static_cast<std::size_t>(i)] *
                     y[static_cast<std::size_t>(j)];
        return s;
    }
    static Jet quad_jet(const MetricField& f, std::span<const Jet> x, std::span<const Jet> y) {
        const int n = f.n;
        std::vector<Jet> g(static_cast<std::size_t>(n) * n);
        f.jet(x.data(), g.data());
        Jet s = g[0] * (y[0] * y[0]);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == 0 && j == 0) continue;
                s += g[static_cast<std::size_t>(i) * n + j] *
                     (y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)]);
            }
        return s;
    }

    std::string name_;
    MetricField hp_, hm_;
    std::map<std::string, double> params_;
};

// ---------------------------------------------------------------------------
// Light in a linear dielectric and permeable medium
// ---------------------------------------------------------------------------

class DielectricModel : public ScalarModel<DielectricModel> {
public:
    DielectricModel(Vec weights, Vec u)
        : w_(std::move(weights)), u_(std::move(u)) {
        if (u_.size() != w_.size() + 1)
            throw BadParameter("dielectric: need one weight per spatial direction");
    }

    template <class T>
    T eval_impl(const T* x, const T* y) const {
        (void)x;
        const int n = dimension();
        T ell2 = w_[0] * (y[1] * y[1]);
        for (int i = 2; i < n; ++i) ell2 += w_[static_cast<std::size_t>(i - 1)] * (y[i] * y[i]);
        T uy = u_[0] * y[0];
        for (int i = 1; i < n; ++i) uy += u_[static_cast<std::size_t>(i)] * y[i];
        return 0.5 * (ell2 - uy * uy);
    }

    std::string name() const override { return "dielectric"; }
    int dimension() const override { return static_cast<int>(u_.size()); }
    double regularity_margin(const PointedVector& p) const override { return norm(p.y); }
    bool quadratic_in_y() const override { return true; }
    AnalyticLevel analytic_level() const override { return AnalyticLevel::third; }
    std::map<std::string, double> params() const override {
        std::map<std::string, double> m;
        for (std::size_t i = 0; i < w_.size(); ++i)
            m["w" + std::to_string(i + 1)] = w_[i];
        return m;
    }
    std::string chart_description() const override {
        return "rest-frame chart of the medium; L = (ell^2 - (U.y)^2)/2";
    }
    std::vector<PointedVector> reference_points() const override {
        const Vec x{0.0, 0.0, 0.0, 0.0};
        return {{x, {1.0, 0.3, 0.0, 0.2}}, {x, {1.0, 0.0, 0.0, 0.0}}, {x, {0.2, 1.0, 0.4, 0.0}}};
    }

private:
    Vec w_, u_;
};

// ---------------------------------------------------------------------------
// Rainbow metric over a flat stationary base
// ---------------------------------------------------------------------------

// The radical sign is exposed (default: timelike vectors of the (-,+,+,+)
// base are the regular cone). The cubic spatial correction is divided by the
// full quadratic form, which keeps the Lagrangian positive homogeneous of
// degree two, and enters with the sign of the energy eta(W, y); that branch
// makes the family non-reversible. With c1 = 0 the base form is returned
// exactly.
class RainbowModel : public ScalarModel<RainbowModel> {
public:
    RainbowModel(double c1, double radical_sign, Matrix base, Vec w)
        : c1_(c1), s_(radical_sign), h_(std::move(base)), w_(std::move(w)) {
        if (s_ != 1.0 && s_ != -1.0) throw BadParameter("rainbow: radical sign must be +-1");
        if (h_.rows() != 4 || w_.size() != 4)
            throw BadParameter("rainbow: base metric and observer field must be 4d");
        hww_ = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) hww_ += h_(i, j) * w_[static_cast<std::size_t>(i)] * w_[static_cast<std::size_t>(j)];
        if (hww_ >= 0.0) throw BadParameter("rainbow: observer field must be timelike for the base");
    }

    template <class T>
    T eval_impl(const T* x, const T* y) const {
        using std::pow;
        using std::sqrt;
        (void)x;
        // Base quadratic form, energy along W and the spatial projection.
        T hyy = h_(0, 0) * (y[0] * y[0]);
        T hwy = (h_(0, 0) * w_[0]) * y[0];
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                if (i == 0 && j == 0) continue;
                hyy += h_(i, j) * (y[i] * y[j]);
            }
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                if (i == 0 && j == 0) continue;
                hwy += (h_(i, j) * w_[static_cast<std::size_t>(i)]) * y[j];
            }
        const T se = s_ * hyy;
        const T frac = hwy / hww_;
        T ebar = hyy - frac * (2.0 * hwy) + frac * frac * hww_;  // h(ybar, ybar) >= 0
        const T root = sqrt(se);
        const double branch = value_of(hwy) <= 0.0 ? 1.0 : -1.0;  // sign of the energy -h(W, y)
        const T expr = root - (branch * c1_) * pow(ebar, 1.5) / se;
        return s_ * (expr * expr);
    }

    std::string name() const override { return "rainbow"; }
    int dimension() const override { return 4; }
    double regularity_margin(const PointedVector& p) const override {
        double hyy = 0.0, hwy = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                hyy += h_(i, j) * p.y[static_cast<std::size_t>(i)] * p.y[static_cast<std::size_t>(j)];
                hwy += h_(i, j) * w_[static_cast<std::size_t>(i)] * p.y[static_cast<std::size_t>(j)];
            }
        const double se = s_ * hyy;
        if (se <= 0.0) return -std::sqrt(-std::min(se, 0.0)) - 1e-12;
        const double frac = hwy / hww_;
        const double ebar = std::max(hyy - frac * frac * hww_, 0.0);
        return std::min({std::sqrt(se), std::sqrt(ebar), std::abs(hwy) / std::sqrt(-hww_)});
    }
    std::map<std::string, double> params() const override {
        return {{"c1", c1_}, {"radical_sign", s_}};
    }
    std::string chart_description() const override {
        return "stationary chart with observer field W; singular on the base cone and along W";
    }
    std::vector<PointedVector> reference_points() const override {
        const Vec x{0.0, 0.0, 0.0, 0.0};
        return {{x, {1.0, 0.2, 0.1, 0.3}}, {x, {1.5, -0.3, 0.2, 0.1}}, {x, {1.0, 0.4, 0.0, 0.0}}};
    }

private:
    double c1_, s_;
    Matrix h_;
    Vec w_;
    double hww_ = -1.0;
};

// ---------------------------------------------------------------------------
// Berwald-Moor style perturbation of flat spacetime
// ---------------------------------------------------------------------------

// Fundamental-tensor route: L(y) = eta(y,y) + phi(yhat,..,yhat)/(p etahat^(p-1))
// with W = d/dt, etahat the Wick-rotated Euclidean form and a built-in
// diagonal 2p-tensor phi = phi0 * sum_i yhat_i^(2p).
class BerwaldMoorModel : public ScalarModel<BerwaldMoorModel> {
public:
    BerwaldMoorModel(double phi0, int p, double bound) : phi0_(phi0), p_(p) {
        if (p_ < 1) throw BadParameter("berwald_moor: tensor order p must be >= 1");
        if (std::abs(phi0_) > bound)
            throw BadParameter("berwald_moor: perturbation exceeds the smallness bound");
    }

    template <class T>
    T eval_impl(const T* x, const T* y) const {
        (void)x;
        T eta = -(y[0] * y[0]);
        for (int i = 1; i < 4; ++i) eta += y[i] * y[i];
        T etahat = y[0] * y[0];
        for (int i = 1; i < 4; ++i) etahat += y[i] * y[i];
        T phi = ipow(y[1] * y[1], p_);
        for (int i = 2; i < 4; ++i) phi += ipow(y[i] * y[i], p_);
        return eta + (phi0_ / p_) * phi / ipow(etahat, p_ - 1);
    }

    std::string name() const override { return "berwald_moor"; }
    int dimension() const override { return 4; }
    double regularity_margin(const PointedVector& p) const override {
        return std::min(norm(p.y), signature_margin(*this, p));
    }
    double evaluable_margin(const PointedVector& p) const override { return norm(p.y); }
    std::map<std::string, double> params() const override {
        return {{"phi0", phi0_}, {"p", double(p_)}};
    }
    std::string chart_description() const override {
        return "inertial chart, W = d/dt; finite on the W axis, degenerate for large phi";
    }
    std::vector<PointedVector> reference_points() const override {
        const Vec x{0.0, 0.0, 0.0, 0.0};
        return {{x, {1.0, 0.2, 0.3, 0.1}}, {x, {1.0, 0.0, 0.0, 0.0}}, {x, {0.3, 1.0, -0.2, 0.4}}};
    }

private:
    double phi0_;
    int p_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Factories
// ---------------------------------------------------------------------------

MetricField constant_metric_field(const Matrix& h) {
    const int n = h.rows();
    std::vector<double> flat = h.data();
    MetricField mf;
    mf.n = n;
    mf.value = [flat](const double*, double* g) {
        std::copy(flat.begin(), flat.end(), g);
    };
    mf.jet = [flat, n](const Jet* x, Jet* g) {
        const int m = x[0].nvars();
        for (int i = 0; i < n * n; ++i) g[i] = Jet(flat[static_cast<std::size_t>(i)], m);
    };
    return mf;
}

ModelPtr minkowski(int n) {
    if (n < 2 || n > kMaxDim) throw BadParameter("minkowski: dimension must be in [2, 4]");
    return std::make_shared<MinkowskiModel>(n);
}

ModelPtr lorentzian_from_metric(MetricField field, std::string name,
                                std::function<double(const PointedVector&)> margin,
                                std::map<std::string, double> params, std::string chart,
                                std::vector<PointedVector> reference_points) {
    return std::make_shared<LorentzianModel>(std::move(name), std::move(field), std::move(margin),
                                             std::move(params), std::move(chart),
                                             std::move(reference_points));
}

ModelPtr schwarzschild(double m) {
    if (m <= 0.0) throw BadParameter("schwarzschild: mass must be positive");
    MetricField mf = make_metric_field(4, [m](const auto* x, auto* g) {
        using T = std::remove_cv_t<std::remove_pointer_t<decltype(g)>>;
        using std::sin;
        const T& r = x[1];
        const T f = 1.0 - (2.0 * m) / r;
        const T st = sin(x[2]);
        for (int i = 0; i < 16; ++i) g[i] = T(0.0) * x[0];  // zero of matching arity
        g[0] = -1.0 * f;
        g[5] = 1.0 / f;
        g[10] = r * r;
        g[15] = (r * r) * (st * st);
    });
    auto margin = [m](const PointedVector& p) {
        return min_of({p.x[1] - 2.0 * m, p.x[2], kPi - p.x[2], norm(p.y)});
    };
    std::vector<PointedVector> refs = {{{0.0, 4.0 * m, kPi / 2, 0.0}, {1.0, 0.0, 0.0, 0.0}},
                                       {{0.0, 4.0 * m, kPi / 2, 0.0}, {0.0, 1.0, 0.0, 0.0}},
                                       {{0.0, 6.0 * m, 1.1, 0.4}, {1.0, 0.2, 0.1, 0.05}}};
    return lorentzian_from_metric(std::move(mf), "schwarzschild", margin, {{"m", m}},
                                  "spherical chart (t, r, theta, phi); regular for r > 2m away "
                                  "from the axis",
                                  std::move(refs));
}

ModelPtr product_r_s2() {
    MetricField mf = make_metric_field(3, [](const auto* x, auto* g) {
        using T = std::remove_cv_t<std::remove_pointer_t<decltype(g)>>;
        using std::sin;
        const T st = sin(x[1]);
        for (int i = 0; i < 9; ++i) g[i] = T(0.0) * x[0];
        g[0] = T(-1.0) + 0.0 * x[0];
        g[4] = T(1.0) + 0.0 * x[0];
        g[8] = st * st;
    });
    auto margin = [](const PointedVector& p) {
        return min_of({p.x[1], kPi - p.x[1], norm(p.y)});
    };
    std::vector<PointedVector> refs = {{{0.0, kPi / 2, 0.0}, {1.0, 0.0, 0.0}},
                                       {{0.0, kPi / 2, 0.0}, {1.0, 1.0, 0.0}},
                                       {{0.0, 1.2, 0.7}, {1.0, 0.1, 0.3}}};
    return lorentzian_from_metric(std::move(mf), "product_r_s2", margin, {},
                                  "static product chart (t, theta, phi) on a unit sphere",
                                  std::move(refs));
}

ModelPtr rutz(double m, double delta) { return std::make_shared<RutzModel>(m, delta); }

ModelPtr beem_r3() { return std::make_shared<BeemR3Model>(); }

ModelPtr bogoslovsky(double b, Vec null_direction) {
    return std::make_shared<BogoslovskyModel>(b, std::move(null_direction));
}

ModelPtr bimetric(MetricField h_plus, MetricField h_minus, std::string name,
                  std::map<std::string, double> params) {
    return std::make_shared<BimetricModel>(std::move(name), std::move(h_plus),
                                           std::move(h_minus), std::move(params));
}

ModelPtr dielectric_medium(Vec spatial_weights, Vec u_form) {
    return std::make_shared<DielectricModel>(std::move(spatial_weights), std::move(u_form));
}

ModelPtr rainbow(double c1, double radical_sign, Matrix base, Vec w) {
    return std::make_shared<RainbowModel>(c1, radical_sign, std::move(base), std::move(w));
}

ModelPtr berwald_moor_perturbed(double phi0, int p, double phi_bound) {
    return std::make_shared<BerwaldMoorModel>(phi0, p, phi_bound);
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

namespace {

double get_param(const std::map<std::string, double>& params, const std::string& key,
                 double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::map<std::string, double>& params,
                    const std::map<std::string, double>& known, const std::string& model) {
    for (const auto& [k, v] : params)
        if (!known.count(k))
            throw BadParameter(model + ": unknown parameter '" + k + "'");
}

Vec random_fiber(std::mt19937_64& rng, int n, double lo = -1.0, double hi = 1.0) {
    Vec y(static_cast<std::size_t>(n));
    for (double& v : y) v = uni(rng, lo, hi);
    return y;
}

Matrix bimetric_second_factor(double eps) {
    Matrix h = Matrix::diag({-1.0 - eps, 1.0, 1.0, 1.0});
    return h;
}

}  // namespace

const std::vector<ModelCatalogEntry>& model_catalog() {
    static const std::vector<ModelCatalogEntry> entries = [] {
        std::vector<ModelCatalogEntry> v;

        v.push_back({"minkowski", "flat spacetime, signature (-,+,..,+)", {{"n", 4.0}},
                     [](const std::map<std::string, double>& p) {
                         reject_unknown(p, {{"n", 4.0}}, "minkowski");
                         return minkowski(static_cast<int>(get_param(p, "n", 4.0)));
                     },
                     [](const LagrangianModel& m, std::mt19937_64& rng) {
                         const int n = m.dimension();
                         Vec x(static_cast<std::size_t>(n));
                         for (double& c : x) c = uni(rng, -1.0, 1.0);
                         Vec y = random_fiber(rng, n);
                         return PointedVector{x, y};
                     }});

        v.push_back({"schwarzschild", "static black hole exterior", {{"m", 1.0}},
                     [](const std::map<std::string, double>& p) {
                         reject_unknown(p, {{"m", 1.0}}, "schwarzschild");
                         return schwarzschild(get_param(p, "m", 1.0));
                     },
                     [](const LagrangianModel& m, std::mt19937_64& rng) {
                         const double mass = m.params().at("m");
                         Vec x{uni(rng, -1.0, 1.0), mass * uni(rng, 3.0, 10.0),
                               uni(rng, 0.5, kPi - 0.5), uni(rng, -kPi, kPi)};
                         return PointedVector{x, random_fiber(rng, 4)};
                     }});

        v.push_back({"product_r_s2", "static product of a timeline and a unit sphere", {},
                     [](const std::map<std::string, double>& p) {
                         reject_unknown(p, {}, "product_r_s2");
                         return product_r_s2();
                     },
                     [](const LagrangianModel&, std::mt19937_64& rng) {
                         Vec x{uni(rng, -1.0, 1.0), uni(rng, 0.5, kPi - 0.5), uni(rng, -kPi, kPi)};
                         return PointedVector{x, random_fiber(rng, 3)};
                     }});

        v.push_back({"rutz", "static spherically symmetric non-quadratic vacuum family",
                     {{"m", 1.0}, {"delta", 0.01}},
                     [](const std::map<std::string, double>& p) {
                         reject_unknown(p, {{"m", 1.0}, {"delta", 0.01}}, "rutz");
                         return rutz(get_param(p, "m", 1.0), get_param(p, "delta", 0.01));
                     },
                     [](const LagrangianModel& m, std::mt19937_64& rng) {
                         const double mass = m.params().at("m");
                         Vec x{uni(rng, -1.0, 1.0), mass * uni(rng, 3.0, 8.0),
                               uni(rng, 0.6, kPi - 0.6), uni(rng, -kPi, kPi)};
                         Vec y{(rng() % 2 ? 1.0 : -1.0) * uni(rng, 0.6, 1.5), uni(rng, -1.0, 1.0),
                               uni(rng, 0.2, 0.8) * (rng() % 2 ? 1.0 : -1.0),
                               uni(rng, 0.2, 0.8) * (rng() % 2 ? 1.0 : -1.0)};
                         return PointedVector{x, y};
                     }});

        v.push_back({"beem_r3", "cone example with six indicatrix components", {},
                     [](const std::map<std::string, double>& p) {
                         reject_unknown(p, {}, "beem_r3");
                         return beem_r3();
                     },
                     [](const LagrangianModel&, std::mt19937_64& rng) {
                         Vec x{uni(rng, -1.0, 1.0), uni(rng, -1.0, 1.0), uni(rng, -1.0, 1.0)};
                         const double y0 = -uni(rng, 0.7, 2.0);
                         const double rho = uni(rng, 0.0, 0.30) * std::abs(y0);
                         const double psi = uni(rng, -kPi, kPi);
                         Vec y{y0, rho * std::cos(psi), rho * std::sin(psi)};
                         return PointedVector{x, y};
                     }});

        v.push_back({"bogoslovsky", "very special relativity deformation of flat spacetime",
                     {{"b", 0.1}},
                     [](const std::map<std::string, double>& p) {
                         reject_unknown(p, {{"b", 0.1}}, "bogoslovsky");
                         return bogoslovsky(get_param(p, "b", 0.1));
                     },
                     [](const LagrangianModel&, std::mt19937_64& rng) {
                         Vec x(4, 0.0);
                         for (double& c : x) c = uni(rng, -1.0, 1.0);
                         const double y0 = uni(rng, 0.8, 2.0) * (rng() % 4 ? 1.0 : -1.0);
                         Vec y{y0, 0.0, 0.0, 0.0};
                         const double r = uni(rng, 0.05, 0.6) * std::abs(y0);
                         const double a = uni(rng, -kPi, kPi), c2 = uni(rng, -1.0, 1.0);
                         const double sq = std::sqrt(1.0 - c2 * c2);
                         y[1] = r * sq * std::cos(a);
                         y[2] = r * sq * std::sin(a);
                         y[3] = r * c2;
                         return PointedVector{x, y};
                     }});

        v.push_back({"bimetric", "birefringent pair of Lorentzian cones", {{"eps", 0.2}},
                     [](const std::map<std::string, double>& p) {
                         reject_unknown(p, {{"eps", 0.2}}, "bimetric");
                         const double eps = get_param(p, "eps", 0.2);
                         return bimetric(constant_metric_field(Matrix::diag({-1.0, 1.0, 1.0, 1.0})),
                                         constant_metric_field(bimetric_second_factor(eps)),
                                         "bimetric", {{"eps", eps}});
                     },
                     [](const LagrangianModel&, std::mt19937_64& rng) {
                         Vec x(4, 0.0);
                         for (double& c : x) c = uni(rng, -1.0, 1.0);
                         Vec y(4, 0.0);
                         if (rng() % 10 < 7) {  // common timelike cone
                             y[0] = uni(rng, 0.8, 1.8) * (rng() % 2 ? 1.0 : -1.0);
                             for (int i = 1; i < 4; ++i) y[static_cast<std::size_t>(i)] = uni(rng, -0.35, 0.35) * std::abs(y[0]);
                         } else {  // common spacelike region
                             y[0] = uni(rng, -0.2, 0.2);
                             for (int i = 1; i < 4; ++i) y[static_cast<std::size_t>(i)] = uni(rng, -1.0, 1.0);
                             if (norm(y) < 0.8) y[1] += 1.0;
                         }
                         return PointedVector{x, y};
                     }});

        v.push_back({"dielectric", "light in a linear dielectric medium",
                     {{"w1", 1.0}, {"w2", 1.0}, {"w3", 1.0}},
                     [](const std::map<std::string, double>& p) {
                         reject_unknown(p, {{"w1", 1.0}, {"w2", 1.0}, {"w3", 1.0}}, "dielectric");
                         return dielectric_medium({get_param(p, "w1", 1.0), get_param(p, "w2", 1.0),
                                                   get_param(p, "w3", 1.0)});
                     },
                     [](const LagrangianModel&, std::mt19937_64& rng) {
                         Vec x(4, 0.0);
                         for (double& c : x) c = uni(rng, -1.0, 1.0);
                         return PointedVector{x, random_fiber(rng, 4)};
                     }});

        v.push_back({"rainbow", "phenomenological dispersion deformation",
                     {{"c1", 0.05}, {"radical_sign", -1.0}},
                     [](const std::map<std::string, double>& p) {
                         reject_unknown(p, {{"c1", 0.05}, {"radical_sign", -1.0}}, "rainbow");
                         return rainbow(get_param(p, "c1", 0.05), get_param(p, "radical_sign", -1.0));
                     },
                     [](const LagrangianModel&, std::mt19937_64& rng) {
                         Vec x(4, 0.0);
                         for (double& c : x) c = uni(rng, -1.0, 1.0);
                         const double y0 = uni(rng, 0.9, 2.0) * (rng() % 3 ? 1.0 : -1.0);
                         const double r = uni(rng, 0.1, 0.5) * std::abs(y0);
                         const double a = uni(rng, -kPi, kPi), c2 = uni(rng, -0.9, 0.9);
                         const double sq = std::sqrt(1.0 - c2 * c2);
                         Vec y{y0, r * sq * std::cos(a), r * sq * std::sin(a), r * c2};
                         return PointedVector{x, y};
                     }});

        v.push_back({"berwald_moor", "quartic perturbation of flat spacetime",
                     {{"phi0", 0.05}, {"p", 2.0}},
                     [](const std::map<std::string, double>& p) {
                         reject_unknown(p, {{"phi0", 0.05}, {"p", 2.0}}, "berwald_moor");
                         return berwald_moor_perturbed(get_param(p, "phi0", 0.05),
                                                       static_cast<int>(get_param(p, "p", 2.0)));
                     },
                     [](const LagrangianModel&, std::mt19937_64& rng) {
                         Vec x(4, 0.0);
                         for (double& c : x) c = uni(rng, -1.0, 1.0);
                         return PointedVector{x, random_fiber(rng, 4)};
                     }});

        return v;
    }();
    return entries;
}

const ModelCatalogEntry& catalog_entry(const std::string& name) {
    for (const ModelCatalogEntry& e : model_catalog())
        if (e.name == name) return e;
    throw UnknownModel("unknown model '" + name + "'");
}

ModelPtr build_catalog_model(const std::string& name, const std::map<std::string, double>& params) {
    return catalog_entry(name).build(params);
}

std::vector<PointedVector> sample_regular_points(const LagrangianModel& model,
                                                 const ModelCatalogEntry& entry,
                                                 std::uint64_t seed, int count) {
    std::mt19937_64 rng(seed);
    std::vector<PointedVector> pts;
    pts.reserve(static_cast<std::size_t>(count));
    const double floor = default_tolerances().margin_floor;
    int attempts = 0;
    while (static_cast<int>(pts.size()) < count) {
        if (++attempts > 200 * count)
            throw NoConvergence(model.name() + ": regular point sampling stalled");
        PointedVector p = entry.propose(model, rng);
        if (norm(p.y) < 0.25) continue;
        if (model.is_regular(p, 10.0 * floor)) pts.push_back(std::move(p));
    }
    return pts;
}

}  // namespace finsler

#include "doctest.h"
#include "finsler/causal.hpp"
#include "finsler/geodesic.hpp"
#include "finsler/models.hpp"

using namespace finsler;

namespace {
const Vec kOrigin4{0.0, 0.0, 0.0, 0.0};
}

TEST_CASE("vector classification in flat spacetime") {
    auto m = minkowski(4);
    CHECK(classify(*m, {kOrigin4, {1, 0, 0, 0}}) == CausalClass::timelike);
    CHECK(classify(*m, {kOrigin4, {1, 1, 0, 0}}) == CausalClass::lightlike);
    CHECK(classify(*m, {kOrigin4, {0, 1, 0, 0}}) == CausalClass::spacelike);
    // Wrong-dimension and singular points classify as singular, not throw.
    auto s = schwarzschild(1.0);
    CHECK(classify(*s, {{0.0, 2.0001, 1.0, 0.0}, {1, 0, 0, 0}}, 1e-9, 1e-3) ==
          CausalClass::singular);
}

TEST_CASE("classification is scale invariant") {
    auto m = minkowski(4);
    std::mt19937_64 rng(5u);
    std::uniform_real_distribution<double> U(-1.0, 1.0), K(0.05, 20.0);
    for (int it = 0; it < 200; ++it) {
        Vec y{U(rng), U(rng), U(rng), U(rng)};
        if (norm(y) < 0.2) continue;
        const PointedVector p{kOrigin4, y};
        const double k = K(rng);
        CHECK(classify(*m, p) == classify(*m, {kOrigin4, scaled(y, k)}));
    }
}

TEST_CASE("future pointedness") {
    auto m = minkowski(4);
    const TimeOrientation T = TimeOrientation::model_default(*m);
    CHECK(is_future_pointed(*m, {kOrigin4, {1, 0, 0, 0}}, T));
    CHECK_FALSE(is_future_pointed(*m, {kOrigin4, {-1, 0, 0, 0}}, T));
    // The reported pairing value matches the metric normalization.
    CHECK(metric_pairing(*m, {kOrigin4, {1, 0, 0, 0}}, Vec{1, 0, 0, 0}, Vec{1, 0, 0, 0}) ==
          doctest::Approx(-1.0));
}

TEST_CASE("future pointed set is open along sampled directions") {
    auto m = minkowski(4);
    const TimeOrientation T = TimeOrientation::model_default(*m);
    const PointedVector p{kOrigin4, {1.0, 0.3, -0.2, 0.1}};
    REQUIRE(is_future_pointed(*m, p, T));
    std::mt19937_64 rng(17u);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double delta = 0.5;
    bool found = false;
    for (int shrink = 0; shrink < 20 && !found; ++shrink, delta *= 0.5) {
        bool all_inside = true;
        for (int it = 0; it < 50; ++it) {
            Vec y = p.y;
            for (double& c : y) c += delta * U(rng);
            if (!is_future_pointed(*m, {kOrigin4, y}, T)) {
                all_inside = false;
                break;
            }
        }
        found = all_inside;
    }
    CHECK(found);
    CHECK(delta > 0.0);
}

TEST_CASE("second slot is linear, first slot is not") {
    auto r = rutz(1.0, 0.01);
    const PointedVector p = r->reference_points().front();
    const Vec z{0.3, -0.2, 0.5, 0.1};
    CHECK(antisymmetry_in_second_slot(*r, p, z) < 1e-12);

    auto m = minkowski(4);
    const PointedVector pm{kOrigin4, {1.0, 0.2, 0.0, 0.0}};
    CHECK(antisymmetry_in_second_slot(*m, pm, z) < 1e-13);

    // Reversible model: the reversal pair coincides.
    const ReversalPair rp_m = reversal_asymmetry(*m, pm, z);
    CHECK(rp_m.gap() < 1e-12);

    // Non-reversible model: the pair differs at a timelike sample.
    const ReversalPair rp_r = reversal_asymmetry(*r, p, z);
    CHECK(rp_r.gap() > 1e-5);
}

TEST_CASE("beem future pointedness does not negate under reversal") {
    auto b = beem_r3();
    const TimeOrientation T = TimeOrientation::model_default(*b);
    // In the -e1 cone both y and -y can be classified; compare directly.
    const PointedVector p{{0.0, 0.0, 0.0}, {-1.0, 0.1, 0.05}};
    const PointedVector q{{0.0, 0.0, 0.0}, {1.0, -0.1, -0.05}};
    const double direct = raw_pairing(*b, p, p.y, T(p.x));
    const double reversed = raw_pairing(*b, q, q.y, T(q.x));
    CHECK(std::abs(reversed + direct) > 1e-6);  // not an odd function of y
}

TEST_CASE("curve classification") {
    auto m = minkowski(4);
    const TimeOrientation T = TimeOrientation::model_default(*m);

    std::vector<CurveSample> timelike_line, null_line;
    for (int k = 0; k <= 20; ++k) {
        const double s = k / 20.0;
        timelike_line.push_back({s, {s, 0.5 * s, 0.0, 0.0}, {1.0, 0.5, 0.0, 0.0}});
        null_line.push_back({s, {s, s, 0.0, 0.0}, {1.0, 1.0, 0.0, 0.0}});
    }
    const CurveCausality a = classify_curve(*m, timelike_line, T);
    CHECK(a.constant_speed);
    CHECK(a.future_pointed_all);
    for (CausalClass c : a.node_class) CHECK(c == CausalClass::timelike);

    const CurveCausality b = classify_curve(*m, null_line, T);
    for (CausalClass c : b.node_class) CHECK(c == CausalClass::lightlike);

    // Integrated curved-space geodesic keeps a single class and constant L.
    auto s = schwarzschild(1.0);
    GeodesicIVP ivp;
    ivp.x0 = {0.0, 10.0, 1.5707963267948966, 0.0};
    ivp.y0 = {1.0, -0.2, 0.0, 0.01};
    const GeodesicPath path = integrate(*s, ivp);
    const CurveCausality c = classify_curve(*s, path.resample(64), TimeOrientation::model_default(*s));
    CHECK(c.constant_speed);
    CHECK(c.future_pointed_all);
    for (CausalClass cls : c.node_class) CHECK(cls == CausalClass::timelike);
}

TEST_CASE("observer construction and validation") {
    auto m = minkowski(4);
    const TimeOrientation T = TimeOrientation::model_default(*m);
    const Observer still = Observer::static_worldline({1.0, 0.0, 0.0}, 0.0, 5.0);
    validate_observer(*m, still, T);

    const Observer drift = Observer::polynomial(
        {{0.0, 0.8, 0.0, 0.0}, {1.0, 0.1, 0.0, 0.0}}, 0.0, 4.0);
    validate_observer(*m, drift, T);
    CHECK(drift.position(2.0)[1] == doctest::Approx(1.0));

    CHECK_THROWS_AS(Observer::polynomial({{0.5, 0.0, 0.0, 0.0}}, 0.0, 1.0), BadParameter);
    const Observer fast = Observer::polynomial(
        {{0.0, 0.0, 0.0, 0.0}, {1.0, 2.0, 0.0, 0.0}}, 0.0, 1.0);
    CHECK_THROWS_AS(validate_observer(*m, fast, T), NotTimelike);
}

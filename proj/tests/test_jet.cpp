#include "doctest.h"
#include "finsler/jet.hpp"
#include "finsler/numdiff.hpp"

using namespace finsler;

namespace {

// f(a, b) = a^2 b + sin(a) / b, nontrivial in both slots.
template <class T>
T sample_fn(const T& a, const T& b) {
    using std::sin;
    return a * a * b + sin(a) / b;
}

}  // namespace

TEST_CASE("jet reproduces analytic first and second derivatives") {
    const double a = 0.7, b = 1.3;
    const Jet ja = Jet::variable(a, 0, 2);
    const Jet jb = Jet::variable(b, 1, 2);
    const Jet f = sample_fn(ja, jb);

    CHECK(f.value() == doctest::Approx(a * a * b + std::sin(a) / b).epsilon(1e-14));
    CHECK(f.grad(0) == doctest::Approx(2 * a * b + std::cos(a) / b).epsilon(1e-14));
    CHECK(f.grad(1) == doctest::Approx(a * a - std::sin(a) / (b * b)).epsilon(1e-14));
    CHECK(f.hess(0, 0) == doctest::Approx(2 * b - std::sin(a) / b).epsilon(1e-14));
    CHECK(f.hess(0, 1) == doctest::Approx(2 * a - std::cos(a) / (b * b)).epsilon(1e-14));
    CHECK(f.hess(1, 0) == doctest::Approx(f.hess(0, 1)).epsilon(1e-15));
    CHECK(f.hess(1, 1) == doctest::Approx(2 * std::sin(a) / (b * b * b)).epsilon(1e-14));
}

TEST_CASE("jet powers and roots match finite differences") {
    auto g = [](double t) {
        return std::pow(1.5 + t, 0.35) * std::sqrt(2.0 + t) / (1.0 + t * t);
    };
    const Jet t = Jet::variable(0.0, 0, 1);
    const Jet jg = pow(1.5 + t, 0.35) * sqrt(2.0 + t) / (1.0 + t * t);

    const DerivResult d1 = richardson_central([&](double h) { return Vec{g(h)}; }, 1e-3);
    CHECK(jg.grad(0) == doctest::Approx(d1.value[0]).epsilon(1e-9));

    const double h = 1e-4;
    const double second = (g(h) - 2.0 * g(0.0) + g(-h)) / (h * h);
    CHECK(jg.hess(0, 0) == doctest::Approx(second).epsilon(1e-6));
}

TEST_CASE("constants widen to the operand seed set") {
    const Jet x = Jet::variable(2.0, 3, 8);
    const Jet c(5.0);  // zero seeded variables
    const Jet s = c * x + Jet(1.0) - x / c;
    CHECK(s.nvars() == 8);
    CHECK(s.value() == doctest::Approx(5.0 * 2.0 + 1.0 - 2.0 / 5.0));
    CHECK(s.grad(3) == doctest::Approx(5.0 - 1.0 / 5.0));
}

TEST_CASE("abs is exact off the origin") {
    const Jet u = Jet::variable(-1.25, 0, 1);
    const Jet a = abs(u);
    CHECK(a.value() == doctest::Approx(1.25));
    CHECK(a.grad(0) == doctest::Approx(-1.0));
    CHECK(a.hess(0, 0) == doctest::Approx(0.0));
}

#pragma once

#include <functional>

#include "finsler/core.hpp"

// Central finite differences with Richardson extrapolation. Used for every
// derivative order the jet arithmetic does not reach (third fiber derivatives,
// base derivatives of derived tensors) and as the independent differentiation
// route in oracle tests.

namespace finsler {

struct DerivResult {
    Vec value;           // componentwise d/dt f(t) at t = 0
    double err_estimate; // infinity-norm difference of the last two table rows
};

// Step for first-order central differences, per the differentiation policy:
// h = cbrt(machine epsilon) * (1 + scale).
inline double fd_step(double scale) {
    return 6.0554544523933395e-06 * (1.0 + std::abs(scale));
}

// Extrapolated central difference of a vector-valued function of one scalar.
// Evaluates f at +-h0/2^k for k < levels.
inline DerivResult richardson_central(const std::function<Vec(double)>& f, double h0,
                                      int levels = 3) {
    std::vector<Vec> table(static_cast<std::size_t>(levels));
    double h = h0;
    for (int k = 0; k < levels; ++k) {
        Vec fp = f(h);
        Vec fm = f(-h);
        Vec d(fp.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = (fp[i] - fm[i]) / (2.0 * h);
        table[static_cast<std::size_t>(k)] = std::move(d);
        h *= 0.5;
    }
    // Classic T[k][m] update, reusing rows in place.
    double err = 0.0;
    for (int m = 1; m < levels; ++m) {
        const double w = 1.0 / (std::pow(4.0, m) - 1.0);
        for (int k = levels - 1; k >= m; --k) {
            Vec& cur = table[static_cast<std::size_t>(k)];
            const Vec& prev = table[static_cast<std::size_t>(k - 1)];
            if (k == levels - 1 && m == levels - 1) {
                err = 0.0;
                for (std::size_t i = 0; i < cur.size(); ++i)
                    err = std::max(err, std::abs(w * (cur[i] - prev[i])));
            }
            for (std::size_t i = 0; i < cur.size(); ++i)
                cur[i] = cur[i] + w * (cur[i] - prev[i]);
        }
    }
    return {std::move(table.back()), err};
}

// Directional derivative of a vector field on R^m along coordinate `k`.
inline DerivResult partial_derivative(const std::function<Vec(const Vec&)>& f, const Vec& x0,
                                      int k, double h0, int levels = 3) {
    Vec x = x0;
    auto slice = [&](double t) {
        Vec xt = x0;
        xt[static_cast<std::size_t>(k)] += t;
        return f(xt);
    };
    return richardson_central(slice, h0, levels);
}

}  // namespace finsler

#pragma once

#include "finsler/core.hpp"

// Cubic interpolation of vector samples on a uniform parameter grid.

namespace finsler {

inline double catmull_rom(double p0, double p1, double p2, double p3, double u) {
    return 0.5 * (2.0 * p1 + (-p0 + p2) * u + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u * u +
                  (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u * u * u);
}

class UniformGrid {
public:
    UniformGrid() = default;
    UniformGrid(double s0, double s1, std::vector<Vec> values)
        : s0_(s0), s1_(s1), values_(std::move(values)) {
        h_ = (s1_ - s0_) / static_cast<double>(values_.size() - 1);
    }

    double s_begin() const { return s0_; }
    double s_end() const { return s1_; }
    std::size_t size() const { return values_.size(); }
    const std::vector<Vec>& values() const { return values_; }

    Vec at(double s) const {
        double u = (s - s0_) / h_;
        long cell = static_cast<long>(std::floor(u));
        cell = std::max(0L, std::min(cell, static_cast<long>(values_.size()) - 2));
        u -= static_cast<double>(cell);
        auto node = [&](long k) -> const Vec& {
            k = std::max(0L, std::min(k, static_cast<long>(values_.size()) - 1));
            return values_[static_cast<std::size_t>(k)];
        };
        const Vec &f0 = node(cell - 1), &f1 = node(cell), &f2 = node(cell + 1), &f3 = node(cell + 2);
        Vec out(f1.size());
        for (std::size_t c = 0; c < out.size(); ++c)
            out[c] = catmull_rom(f0[c], f1[c], f2[c], f3[c], u);
        return out;
    }

private:
    double s0_ = 0.0, s1_ = 1.0, h_ = 1.0;
    std::vector<Vec> values_;
};

}  // namespace finsler

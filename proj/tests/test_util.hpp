#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "rowlegal/generator.hpp"
#include "rowlegal/piecewise_quadratic.hpp"

namespace rowlegal::testutil {

/**
 * A random convex piecewise-quadratic built as a sum of convex primitives
 * (weighted squares, absolute values, hubers). The primitive list doubles as
 * an independent evaluation oracle: eval_reference() never touches the
 * PiecewiseQuadratic machinery.
 */
struct RandomConvex {
    PiecewiseQuadratic f;
    std::vector<std::function<double(double)>> parts;

    double eval_reference(double x) const {
        double s = 0.0;
        for (const auto& p : parts) s += p(x);
        return s;
    }
};

inline RandomConvex random_convex(Rng& rng, double lo, double hi, int max_parts = 4) {
    RandomConvex out;
    out.f = PiecewiseQuadratic::constant(lo, hi, 0.0);
    const int parts = static_cast<int>(rng.uniform_int(1, max_parts));
    for (int p = 0; p < parts; ++p) {
        const double target = rng.uniform(lo, hi);
        const double weight = rng.uniform(0.1, 3.0);
        switch (rng.uniform_int(0, 2)) {
        case 0:
            out.f = out.f.sum(PiecewiseQuadratic::square_displacement(lo, hi, target, weight));
            out.parts.emplace_back(
                [=](double x) { return weight * (x - target) * (x - target); });
            break;
        case 1:
            out.f = out.f.sum(PiecewiseQuadratic::abs_displacement(lo, hi, target, weight));
            out.parts.emplace_back([=](double x) { return weight * std::abs(x - target); });
            break;
        default: {
            const double r = rng.uniform(0.3, 2.0);
            out.f = out.f.sum(PiecewiseQuadratic::huber_displacement(lo, hi, target, r, weight));
            out.parts.emplace_back([=](double x) {
                const double d = std::abs(x - target);
                return d <= r ? weight * d * d : weight * (2.0 * r * d - r * r);
            });
            break;
        }
        }
    }
    return out;
}

inline bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

/** Plain vector-backed heap: the trusted mirror for ShiftHeap traces. */
struct NaiveHeap {
    std::vector<std::pair<double, std::int32_t>> items;

    void push(double k, std::int32_t p) { items.emplace_back(k, p); }
    void add_offset(double d) {
        for (auto& it : items) it.first += d;
    }
    bool empty() const { return items.empty(); }
    double max_key() const {
        double m = items.front().first;
        for (const auto& it : items) m = std::max(m, it.first);
        return m;
    }
    std::pair<double, std::int32_t> pop_max() {
        std::size_t best = 0;
        for (std::size_t i = 1; i < items.size(); ++i)
            if (items[i].first > items[best].first) best = i;
        auto out = items[best];
        items.erase(items.begin() + static_cast<std::ptrdiff_t>(best));
        return out;
    }
    void merge(NaiveHeap&& o) {
        items.insert(items.end(), o.items.begin(), o.items.end());
        o.items.clear();
    }
};

} // namespace rowlegal::testutil

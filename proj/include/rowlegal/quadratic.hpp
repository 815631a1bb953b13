#pragma once

#include <cmath>

namespace rowlegal {

/** One quadratic x -> a*x^2 + b*x + c, stored as its coefficient triple. */
struct Quadratic {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double value(double x) const { return (a * x + b) * x + c; }
    double slope(double x) const { return 2.0 * a * x + b; }

    /** The quadratic x -> f(x + delta). */
    Quadratic shifted(double delta) const {
        return {a, 2.0 * a * delta + b, (a * delta + b) * delta + c};
    }

    Quadratic operator+(const Quadratic& o) const { return {a + o.a, b + o.b, c + o.c}; }
    Quadratic operator-(const Quadratic& o) const { return {a - o.a, b - o.b, c - o.c}; }
    Quadratic& operator+=(const Quadratic& o) {
        a += o.a;
        b += o.b;
        c += o.c;
        return *this;
    }

    bool operator==(const Quadratic&) const = default;
};

} // namespace rowlegal

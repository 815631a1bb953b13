#pragma once

#include <algorithm>
#include <cmath>

namespace rowlegal {

// All comparisons use relative tolerances anchored at 1 so that instances with
// coordinates or costs well below 1 are still compared sensibly.
inline constexpr double kRelEps = 1e-9;

/** Tolerance for comparing function values of magnitude ~scale. */
inline double value_eps(double scale) {
    return kRelEps * std::max(1.0, std::abs(scale));
}

/** Tolerance for comparing coordinates inside a window reaching to ~scale. */
inline double position_eps(double scale) {
    return kRelEps * std::max(1.0, std::abs(scale));
}

/** Tolerance for slope comparisons; `terms` is the largest term magnitude entering the slope. */
inline double slope_eps(double terms) {
    return kRelEps * std::max(1.0, std::abs(terms));
}

inline bool nearly_equal(double a, double b, double scale) {
    return std::abs(a - b) <= value_eps(std::max(std::abs(scale), std::max(std::abs(a), std::abs(b))));
}

} // namespace rowlegal

#pragma once

#include <cstdint>
#include <random>

#include "rowlegal/double_row.hpp"
#include "rowlegal/single_row.hpp"

namespace rowlegal {

/**
 * Seeded random instance generator. Window size is derived from the drawn
 * widths and the requested density, so every generated instance satisfies the
 * window inequality by construction. The same seed yields the same instance on
 * any platform (raw mt19937_64 output, no library distributions).
 */
struct GeneratorSpec {
    enum class CostFamily { quadratic, linear, huber };

    std::uint64_t seed = 1;
    std::size_t k = 2;                   // double-row cells (or cell count for single-row)
    std::size_t max_cells_per_gap_row = 2; // per-gap, per-row count drawn from [0, max]
    int width_min = 1;
    int width_max = 3;        // widths are integers in [width_min, width_max]
    double density = 0.7;     // fraction of the window covered by cell widths, (0, 1]
    double target_scatter = 2.0; // length scale of target noise
    CostFamily cost_family = CostFamily::quadratic;
    int weight_max = 3;       // per-cell integer cost weights in [1, weight_max]
};

DoubleRowInstance generate_double_row(const GeneratorSpec& spec);
SingleRowInstance generate_single_row(const GeneratorSpec& spec);

/** Deterministic uniform helpers on top of mt19937_64. */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(uniform() * static_cast<double>(hi - lo + 1));
    }

private:
    std::mt19937_64 eng_;
};

} // namespace rowlegal

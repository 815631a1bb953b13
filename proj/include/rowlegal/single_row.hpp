#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rowlegal/piecewise_quadratic.hpp"

namespace rowlegal {

struct SingleRowCell {
    std::string id;
    double width = 0.0;
    PiecewiseQuadratic cost; // convex, domain covering the instance window
};

/** Ordered cells to be packed without overlap into [x_min, x_max]. */
struct SingleRowInstance {
    double x_min = 0.0;
    double x_max = 0.0;
    std::vector<SingleRowCell> cells;

    double total_width() const;
    /** Throws ValidationError / InfeasibleError when an invariant fails. */
    void validate() const;
};

struct SingleRowSolution {
    std::vector<double> positions;
    double total_cost = 0.0;
    /** Final block partition as half-open index ranges [first, last). */
    std::vector<std::pair<std::size_t, std::size_t>> blocks;
};

/** Optional instrumentation filled by solve(). */
struct SolveDiagnostics {
    /** Largest increase of any cell's implied position over the run (<= 0 is clean). */
    double max_rightward_motion = 0.0;
    std::uint64_t collapses = 0;
    std::uint64_t heap_pops = 0;
};

/**
 * Clumping solve: optimal positions for the instance, O((n+m)·log(min(n,m)))
 * with m the total kink count over the window.
 */
SingleRowSolution solve(const SingleRowInstance& inst, SolveDiagnostics* diag = nullptr);

/**
 * Optimal solution for the same cells on a sub-window [x_min2, x_max2],
 * derived from an existing full-window solution by per-cell clamping. O(n).
 */
SingleRowSolution restrict_solution(const SingleRowInstance& inst, const SingleRowSolution& sol,
                                    double x_min2, double x_max2);

/** Cumulated cost of a block: sum of member costs shifted into the representative's frame. */
PiecewiseQuadratic block_cost_function(const SingleRowInstance& inst,
                                       std::pair<std::size_t, std::size_t> block);

} // namespace rowlegal

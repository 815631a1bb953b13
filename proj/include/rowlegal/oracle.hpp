#pragma once

#include <cstddef>

#include "rowlegal/double_row.hpp"
#include "rowlegal/single_row.hpp"

namespace rowlegal {
namespace oracle {

/**
 * Limits and grid step for the reference solvers. These are deliberately
 * simple desk-scale certifiers sharing no code with the production solvers.
 */
struct OracleConfig {
    double grid_step = 0.01;
    std::size_t max_grid_points = 4'000'000; // refusal limit on grid size
    std::size_t max_exact_cells = 8;
    std::size_t max_exact_segments = 3;
    std::size_t max_doubles = 3;
    std::size_t max_gap_row_cells = 4;
    bool parallel = true; // OpenMP over enumeration branches
};

/**
 * Exact optimum by enumerating every subset of tight spacing/window
 * constraints together with every assignment of cells to cost segments; each
 * combination pins the positions down to one scalar per clumped chain, whose
 * quadratic is minimized in closed form. Refuses instances above the limits.
 */
SingleRowSolution single_row_exact(const SingleRowInstance& inst,
                                   const OracleConfig& cfg = {});

/**
 * Optimal placement among grid-aligned positions (left-to-right dynamic
 * program with prefix minima). Upper-bounds the true optimum; exact when the
 * optimum lies on the grid.
 */
SingleRowSolution single_row_grid(const SingleRowInstance& inst, const OracleConfig& cfg = {});

/**
 * Grid optimum of the Double Row Problem: dynamic program over grid positions
 * of the double-row cells, scoring every transition with per-gap row optima.
 */
DoubleRowSolution double_row_grid(const DoubleRowInstance& inst, const OracleConfig& cfg = {});

/** step * sum of max |cost'|: bounds the gap between the grid optimum and the true one. */
double grid_refinement_bound(const SingleRowInstance& inst, double step);
double grid_refinement_bound(const DoubleRowInstance& inst, double step);

} // namespace oracle
} // namespace rowlegal

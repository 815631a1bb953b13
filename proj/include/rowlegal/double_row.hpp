#pragma once

#include <span>
#include <string>
#include <vector>

#include "rowlegal/piecewise_quadratic.hpp"
#include "rowlegal/single_row.hpp"

namespace rowlegal {

struct DoubleRowCell {
    std::string id;
    double width = 0.0;
    PiecewiseQuadratic cost;
};

/** Single-row-height cells living in one gap, split by row. */
struct GapCells {
    std::vector<DoubleRowCell> bottom;
    std::vector<DoubleRowCell> top;
};

/**
 * Double-row cells C_1..C_k in order, plus the k+1 gaps around them (gap i sits
 * between C_i and C_{i+1}, with gap 0 left of C_1 and gap k right of C_k).
 */
struct DoubleRowInstance {
    double x_min = 0.0;
    double x_max = 0.0;
    std::vector<DoubleRowCell> doubles; // k >= 1
    std::vector<GapCells> gaps;         // size k + 1

    /** max(total bottom width, total top width) of gap i. */
    double gap_load(std::size_t i) const;
    void validate() const;
};

/** Reference positions from full-window clumping runs per gap and row. */
struct GapReference {
    std::vector<std::vector<double>> ybar; // per gap, bottom row
    std::vector<std::vector<double>> zbar; // per gap, top row
};

/** The Single Row instance over the double-row cells plus reduction bookkeeping. */
struct ReducedInstance {
    SingleRowInstance single; // widths w', window [x'_min, x_max], costs F_i
    double constant_c = 0.0;
    GapReference refs;
    std::size_t total_cost_kinks = 0; // sum of kinks over all F_i
};

struct DoubleRowSolution {
    std::vector<double> x;              // double-row cells
    std::vector<std::vector<double>> y; // bottom cells per gap
    std::vector<std::vector<double>> z; // top cells per gap
    double total_cost = 0.0;
};

enum class GapSolveMode { serial, parallel };

/** Spacing test for fixed double-row coordinates (sentinels x_0 = x_min, x_{k+1} = x_max). */
bool check_feasible_tuple(const DoubleRowInstance& inst, std::span<const double> xs);

/**
 * Clumping runs for every gap and row over the full window [x_min, x_max].
 * The 2(k+1) solves are independent; `parallel` runs them under OpenMP and
 * produces bit-identical results to `serial`.
 */
GapReference gap_reference_positions(const DoubleRowInstance& inst,
                                     GapSolveMode mode = GapSolveMode::parallel);

/** Builds the reduced Single Row instance (costs F_i, widths w', constant c). */
ReducedInstance build_reduced(const DoubleRowInstance& inst,
                              GapSolveMode mode = GapSolveMode::parallel);
ReducedInstance build_reduced(const DoubleRowInstance& inst, const GapReference& refs);

/**
 * Optimal extension of a feasible tuple: clamps each gap's reference positions
 * into the actual gap. Total cost is the directly evaluated objective.
 */
DoubleRowSolution extend_solution(const DoubleRowInstance& inst, const GapReference& refs,
                                  std::span<const double> xs);

/** Globally optimal solve: reduce, clump, extend. */
DoubleRowSolution solve(const DoubleRowInstance& inst,
                        GapSolveMode mode = GapSolveMode::parallel);

/** Baseline: doubles pinned at x_fixed, single-row cells placed optimally per gap. */
DoubleRowSolution solve_fixed_doubles(const DoubleRowInstance& inst,
                                      std::span<const double> x_fixed,
                                      GapSolveMode mode = GapSolveMode::parallel);

/** Each double's own cost-minimizing position (argmin interval midpoint). */
std::vector<double> double_cost_targets(const DoubleRowInstance& inst);

/**
 * Projects per-double target positions onto the nearest feasible tuple by a
 * left-to-right then right-to-left sweep.
 */
std::vector<double> project_targets_to_feasible(const DoubleRowInstance& inst,
                                                std::span<const double> targets);

/**
 * Heuristic post-pass: snaps doubles onto a site grid (origin + i*pitch) and
 * repairs feasibility; voids the optimality guarantee.
 */
std::vector<double> snap_doubles_to_sites(const DoubleRowInstance& inst,
                                          std::span<const double> xs, double pitch,
                                          double origin);

} // namespace rowlegal

#include "rowlegal/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rowlegal/errors.hpp"
#include "rowlegal/tolerances.hpp"

namespace rowlegal {
namespace oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct CellSegments {
    std::vector<double> lo, hi; // per segment, clipped to the window
    std::vector<Quadratic> quad;
};

CellSegments split_segments(const PiecewiseQuadratic& f, double x_min, double x_max) {
    PiecewiseQuadratic r = f.restrict(x_min, x_max);
    CellSegments cs;
    const auto& bp = r.breakpoints();
    for (std::size_t q = 0; q <= bp.size(); ++q) {
        cs.lo.push_back(q == 0 ? r.lo() : bp[q - 1]);
        cs.hi.push_back(q == bp.size() ? r.hi() : bp[q]);
        cs.quad.push_back(r.segments()[q]);
    }
    return cs;
}

} // namespace

SingleRowSolution single_row_exact(const SingleRowInstance& inst, const OracleConfig& cfg) {
    inst.validate();
    const std::size_t n = inst.cells.size();
    SingleRowSolution best;
    if (n == 0) return best;
    if (n > cfg.max_exact_cells)
        throw OracleLimitError("single_row_exact refuses n = " + std::to_string(n) +
                               " cells (limit " + std::to_string(cfg.max_exact_cells) + ")");

    std::vector<CellSegments> segs;
    segs.reserve(n);
    for (const SingleRowCell& c : inst.cells) {
        segs.push_back(split_segments(c.cost, inst.x_min, inst.x_max));
        if (segs.back().quad.size() > cfg.max_exact_segments)
            throw OracleLimitError("single_row_exact refuses a cost with " +
                                   std::to_string(segs.back().quad.size()) + " segments (limit " +
                                   std::to_string(cfg.max_exact_segments) + ")");
    }
    std::vector<double> w(n), pref(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = inst.cells[i].width;
        pref[i + 1] = pref[i] + w[i];
    }
    const double eps = position_eps(std::max(std::abs(inst.x_min), std::abs(inst.x_max)));

    double best_cost = kInf;
    std::vector<double> best_pos;
    std::vector<double> pos(n);
    std::vector<std::size_t> digit(n, 0);

    const std::uint32_t mask_end = 1u << (n + 1);
    for (std::uint32_t mask = 0; mask < mask_end; ++mask) {
        // Chains of cells glued by tight spacing constraints. Bit 0 pins cell 0
        // at x_min, bit i (1..n-1) glues cell i to cell i-1, bit n pins the last
        // cell at x_max - w.
        std::fill(digit.begin(), digit.end(), 0);
        for (;;) {
            bool valid = true;
            for (std::size_t p = 0; p < n && valid;) {
                std::size_t q = p;
                while (q + 1 < n && (mask & (1u << (q + 1)))) ++q;
                // Chain [p, q]; scalar s = position of cell p.
                double A = 0.0, B = 0.0;
                double L = -kInf, U = kInf;
                for (std::size_t l = p; l <= q; ++l) {
                    const double alpha = pref[l] - pref[p];
                    const Quadratic sq = segs[l].quad[digit[l]].shifted(alpha);
                    A += sq.a;
                    B += sq.b;
                    L = std::max(L, segs[l].lo[digit[l]] - alpha);
                    U = std::min(U, segs[l].hi[digit[l]] - alpha);
                }
                if (q == n - 1) U = std::min(U, inst.x_max - w[q] - (pref[q] - pref[p]));
                if (p == 0) L = std::max(L, inst.x_min);
                double s;
                const bool anchor_lo = (p == 0) && (mask & 1u);
                const bool anchor_hi = (q == n - 1) && (mask & (1u << n));
                if (anchor_lo && anchor_hi) {
                    s = inst.x_min;
                    if (std::abs((inst.x_max - w[q] - (pref[q] - pref[p])) - s) > eps) valid = false;
                } else if (anchor_lo) {
                    s = inst.x_min;
                } else if (anchor_hi) {
                    s = inst.x_max - w[q] - (pref[q] - pref[p]);
                } else if (L > U + eps) {
                    valid = false;
                    s = L;
                } else if (A > kRelEps) {
                    s = std::clamp(-B / (2.0 * A), L, U);
                } else {
                    s = B >= 0.0 ? L : U;
                }
                if (valid && (s < L - eps || s > U + eps)) valid = false;
                if (valid)
                    for (std::size_t l = p; l <= q; ++l) pos[l] = s + (pref[l] - pref[p]);
                p = q + 1;
            }
            if (valid) {
                // Full feasibility: candidates minimized per chain may collide
                // across chains; only genuine placements count.
                if (pos[0] < inst.x_min - eps) valid = false;
                for (std::size_t l = 0; l + 1 < n && valid; ++l)
                    if (pos[l] + w[l] > pos[l + 1] + eps) valid = false;
                if (valid && pos[n - 1] + w[n - 1] > inst.x_max + eps) valid = false;
                if (valid) {
                    double cost = 0.0;
                    for (std::size_t l = 0; l < n; ++l)
                        cost += segs[l].quad[digit[l]].value(pos[l]);
                    if (cost < best_cost) {
                        best_cost = cost;
                        best_pos = pos;
                    }
                }
            }
            // Next segment assignment (mixed-radix odometer).
            std::size_t d = 0;
            while (d < n) {
                if (++digit[d] < segs[d].quad.size()) break;
                digit[d] = 0;
                ++d;
            }
            if (d == n) break;
        }
    }
    if (!std::isfinite(best_cost)) throw InfeasibleError("exact oracle found no feasible placement");
    best.positions = best_pos;
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        best.positions[i] = std::clamp(best.positions[i], inst.x_min, inst.x_max - w[i]);
        cost += inst.cells[i].cost.evaluate(best.positions[i]);
    }
    best.total_cost = cost;
    return best;
}

namespace {

/** Shared grid for both grid oracles. */
struct Grid {
    double x_min, span;
    std::int64_t points; // indices 0..points
    double coord(std::int64_t s) const { return x_min + span * static_cast<double>(s) / static_cast<double>(points); }
    std::int64_t width_steps(double w) const {
        return static_cast<std::int64_t>(
            std::ceil(w * static_cast<double>(points) / span - 1e-9));
    }
};

Grid make_grid(double x_min, double x_max, const OracleConfig& cfg) {
    const double span = x_max - x_min;
    if (!(span > 0.0)) throw OracleLimitError("grid oracle needs a non-degenerate window");
    const std::int64_t m = std::max<std::int64_t>(1, std::llround(span / cfg.grid_step));
    if (static_cast<std::size_t>(m) + 1 > cfg.max_grid_points)
        throw OracleLimitError("grid of " + std::to_string(m + 1) + " points exceeds the limit " +
                               std::to_string(cfg.max_grid_points));
    return {x_min, span, m};
}

/** cost(coord(s)) for s = 0..points. */
std::vector<double> tabulate(const PiecewiseQuadratic& f, const Grid& g) {
    std::vector<double> t(static_cast<std::size_t>(g.points) + 1);
    for (std::int64_t s = 0; s <= g.points; ++s)
        t[static_cast<std::size_t>(s)] = f.evaluate(std::clamp(g.coord(s), f.lo(), f.hi()));
    return t;
}

/**
 * Left-to-right DP for one row of cells between grid indices [a, b]:
 * layer(j, s) = best cost of cells 0..j with cell j at index <= s. Returns the
 * full per-cell tables so positions can be backtracked.
 */
struct RowDp {
    std::vector<std::vector<double>> at;     // at[j][s]: cell j exactly at s
    std::vector<std::vector<double>> prefix; // prefix[j][s]: cell j at <= s

    static RowDp run(const std::vector<std::vector<double>>& tables,
                     const std::vector<std::int64_t>& steps, std::int64_t a) {
        RowDp dp;
        const std::size_t r = tables.size();
        dp.at.resize(r);
        dp.prefix.resize(r);
        for (std::size_t j = 0; j < r; ++j) {
            const std::vector<double>& q = tables[j];
            std::vector<double>& at = dp.at[j];
            std::vector<double>& pm = dp.prefix[j];
            at.assign(q.size(), kInf);
            pm.assign(q.size(), kInf);
            const std::int64_t lo = j == 0 ? a : 0;
            for (std::int64_t s = lo; s < static_cast<std::int64_t>(q.size()); ++s) {
                double v = q[static_cast<std::size_t>(s)];
                if (j > 0) {
                    const std::int64_t ps = s - steps[j - 1];
                    v = ps >= 0 ? v + dp.prefix[j - 1][static_cast<std::size_t>(ps)] : kInf;
                }
                at[static_cast<std::size_t>(s)] = v;
            }
            double run = kInf;
            for (std::size_t s = 0; s < q.size(); ++s) {
                run = std::min(run, at[s]);
                pm[s] = run;
            }
        }
        return dp;
    }
};

/** Best cost of one row within [a, v] for every v (cells must end at or before v). */
std::vector<double> row_cost_over_right_bound(const std::vector<std::vector<double>>& tables,
                                              const std::vector<std::int64_t>& steps,
                                              std::int64_t a, std::int64_t points) {
    std::vector<double> out(static_cast<std::size_t>(points) + 1, 0.0);
    if (tables.empty()) return out;
    RowDp dp = RowDp::run(tables, steps, std::max<std::int64_t>(a, 0));
    const std::vector<double>& pm = dp.prefix.back();
    const std::int64_t last_step = steps.back();
    for (std::int64_t v = 0; v <= points; ++v) {
        const std::int64_t s = v - last_step;
        out[static_cast<std::size_t>(v)] = s >= 0 ? pm[static_cast<std::size_t>(s)] : kInf;
    }
    return out;
}

/** Backtracks one row's positions for fixed bounds [a, b]; returns grid indices. */
std::vector<std::int64_t> row_positions(const std::vector<std::vector<double>>& tables,
                                        const std::vector<std::int64_t>& steps, std::int64_t a,
                                        std::int64_t b) {
    const std::size_t r = tables.size();
    std::vector<std::int64_t> pos(r, 0);
    if (r == 0) return pos;
    RowDp dp = RowDp::run(tables, steps, a);
    std::int64_t hi = b - steps[r - 1];
    for (std::size_t j = r; j-- > 0;) {
        // Leftmost argmin of at[j] within [0, hi].
        double bestv = kInf;
        std::int64_t arg = -1;
        for (std::int64_t s = 0; s <= hi; ++s) {
            const double v = dp.at[j][static_cast<std::size_t>(s)];
            if (v < bestv) {
                bestv = v;
                arg = s;
            }
        }
        if (arg < 0) throw InfeasibleError("grid oracle backtrack failed");
        pos[j] = arg;
        if (j > 0) hi = arg - steps[j - 1];
    }
    return pos;
}

} // namespace

SingleRowSolution single_row_grid(const SingleRowInstance& inst, const OracleConfig& cfg) {
    inst.validate();
    SingleRowSolution sol;
    if (inst.cells.empty()) return sol;
    const Grid g = make_grid(inst.x_min, inst.x_max, cfg);
    std::vector<std::vector<double>> tables;
    std::vector<std::int64_t> steps;
    for (const SingleRowCell& c : inst.cells) {
        tables.push_back(tabulate(c.cost, g));
        steps.push_back(g.width_steps(c.width));
    }
    std::vector<std::int64_t> idx = row_positions(tables, steps, 0, g.points);
    sol.positions.reserve(idx.size());
    double cost = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        sol.positions.push_back(g.coord(idx[i]));
        cost += inst.cells[i].cost.evaluate(sol.positions[i]);
    }
    sol.total_cost = cost;
    return sol;
}

DoubleRowSolution double_row_grid(const DoubleRowInstance& inst, const OracleConfig& cfg) {
    inst.validate();
    const std::size_t k = inst.doubles.size();
    if (k > cfg.max_doubles)
        throw OracleLimitError("double_row_grid refuses k = " + std::to_string(k) +
                               " double-row cells (limit " + std::to_string(cfg.max_doubles) + ")");
    for (const GapCells& gap : inst.gaps)
        if (gap.bottom.size() > cfg.max_gap_row_cells || gap.top.size() > cfg.max_gap_row_cells)
            throw OracleLimitError("double_row_grid refuses a gap row with more than " +
                                   std::to_string(cfg.max_gap_row_cells) + " cells");
    const Grid g = make_grid(inst.x_min, inst.x_max, cfg);
    const std::size_t m = static_cast<std::size_t>(g.points);

    auto row_tables = [&](const std::vector<DoubleRowCell>& row) {
        std::vector<std::vector<double>> t;
        for (const DoubleRowCell& c : row) t.push_back(tabulate(c.cost, g));
        return t;
    };
    auto row_steps = [&](const std::vector<DoubleRowCell>& row) {
        std::vector<std::int64_t> s;
        for (const DoubleRowCell& c : row) s.push_back(g.width_steps(c.width));
        return s;
    };

    std::vector<std::int64_t> dsteps;
    std::vector<std::vector<double>> dtables;
    for (const DoubleRowCell& c : inst.doubles) {
        dsteps.push_back(g.width_steps(c.width));
        dtables.push_back(tabulate(c.cost, g));
    }

    // V[i][v]: best cost of C_1..C_{i+1} and gaps 0..i with C_{i+1} at index v.
    std::vector<std::vector<double>> V(k, std::vector<double>(m + 1, kInf));
    std::vector<std::vector<std::int64_t>> arg(k, std::vector<std::int64_t>(m + 1, -1));

    {
        const std::vector<double> b0 =
            row_cost_over_right_bound(row_tables(inst.gaps[0].bottom), row_steps(inst.gaps[0].bottom), 0, g.points);
        const std::vector<double> t0 =
            row_cost_over_right_bound(row_tables(inst.gaps[0].top), row_steps(inst.gaps[0].top), 0, g.points);
        for (std::size_t v = 0; v <= m; ++v) V[0][v] = dtables[0][v] + b0[v] + t0[v];
    }

    for (std::size_t i = 1; i < k; ++i) {
        const auto tb = row_tables(inst.gaps[i].bottom);
        const auto sb = row_steps(inst.gaps[i].bottom);
        const auto tt = row_tables(inst.gaps[i].top);
        const auto st = row_steps(inst.gaps[i].top);
        std::vector<double>& out = V[i];
        std::vector<std::int64_t>& argi = arg[i];
        if (tb.empty() && tt.empty()) {
            // Empty gap: plain prefix-min over u with the spacing offset.
            double run = kInf;
            std::int64_t run_arg = -1;
            for (std::size_t v = 0; v <= m; ++v) {
                const std::int64_t u = static_cast<std::int64_t>(v) - dsteps[i - 1];
                if (u >= 0 && V[i - 1][static_cast<std::size_t>(u)] < run) {
                    run = V[i - 1][static_cast<std::size_t>(u)];
                    run_arg = u;
                }
                out[v] = run + dtables[i][v];
                argi[v] = run_arg;
            }
            continue;
        }
#ifdef _OPENMP
        const bool par = cfg.parallel;
#else
        const bool par = false;
#endif
        auto process_u = [&](std::int64_t u, std::vector<double>& acc,
                             std::vector<std::int64_t>& acc_arg) {
            const double base = V[i - 1][static_cast<std::size_t>(u)];
            if (!(base < kInf)) return;
            const std::int64_t a = u + dsteps[i - 1];
            if (a > g.points) return;
            const std::vector<double> rb = row_cost_over_right_bound(tb, sb, a, g.points);
            const std::vector<double> rt = row_cost_over_right_bound(tt, st, a, g.points);
            for (std::size_t v = static_cast<std::size_t>(a); v <= m; ++v) {
                const double cand = base + rb[v] + rt[v];
                if (cand < acc[v]) {
                    acc[v] = cand;
                    acc_arg[v] = u;
                }
            }
        };
        if (par) {
#ifdef _OPENMP
            std::vector<double> acc(m + 1, kInf);
            std::vector<std::int64_t> acc_arg(m + 1, -1);
#pragma omp parallel
            {
                std::vector<double> local(m + 1, kInf);
                std::vector<std::int64_t> local_arg(m + 1, -1);
#pragma omp for schedule(dynamic, 16)
                for (std::int64_t u = 0; u <= g.points; ++u) process_u(u, local, local_arg);
#pragma omp critical
                for (std::size_t v = 0; v <= m; ++v)
                    if (local[v] < acc[v]) {
                        acc[v] = local[v];
                        acc_arg[v] = local_arg[v];
                    }
            }
            for (std::size_t v = 0; v <= m; ++v) {
                out[v] = acc[v] + dtables[i][v];
                argi[v] = acc_arg[v];
            }
#endif
        } else {
            std::vector<double> acc(m + 1, kInf);
            std::vector<std::int64_t> acc_arg(m + 1, -1);
            for (std::int64_t u = 0; u <= g.points; ++u) process_u(u, acc, acc_arg);
            for (std::size_t v = 0; v <= m; ++v) {
                out[v] = acc[v] + dtables[i][v];
                argi[v] = acc_arg[v];
            }
        }
    }

    // Close with gap k against the right window edge: mirror the row DP.
    std::vector<double> tail(m + 1, kInf);
    {
        auto mirror = [&](const std::vector<DoubleRowCell>& row) {
            std::vector<std::vector<double>> t;
            std::vector<std::int64_t> s;
            for (std::size_t j = row.size(); j-- > 0;) {
                std::vector<double> tab = tabulate(row[j].cost, g);
                std::reverse(tab.begin(), tab.end());
                // Mirrored coordinate: cell occupying [y, y+w] becomes, in s' = points - s
                // coordinates, a cell anchored at its right edge.
                std::vector<double> shifted(tab.size(), kInf);
                const std::int64_t ws = g.width_steps(row[j].width);
                for (std::int64_t p = 0; p + ws <= g.points; ++p)
                    shifted[static_cast<std::size_t>(p)] = tab[static_cast<std::size_t>(p + ws)];
                t.push_back(shifted);
                s.push_back(ws);
            }
            return std::pair{t, s};
        };
        auto [mb, sb2] = mirror(inst.gaps[k].bottom);
        auto [mt, st2] = mirror(inst.gaps[k].top);
        const std::vector<double> rb = row_cost_over_right_bound(mb, sb2, 0, g.points);
        const std::vector<double> rt = row_cost_over_right_bound(mt, st2, 0, g.points);
        for (std::size_t v = 0; v <= m; ++v) {
            const std::int64_t a = static_cast<std::int64_t>(v) + dsteps[k - 1];
            if (a > g.points) break;
            const std::size_t mirrored = static_cast<std::size_t>(g.points - a);
            tail[v] = rb[mirrored] + rt[mirrored];
        }
    }

    double best = kInf;
    std::int64_t best_v = -1;
    for (std::size_t v = 0; v <= m; ++v) {
        const double c = V[k - 1][v] + tail[v];
        if (c < best) {
            best = c;
            best_v = static_cast<std::int64_t>(v);
        }
    }
    if (!(best < kInf)) throw InfeasibleError("grid oracle found no feasible double-row placement");

    // Recover the tuple, then each gap's cells.
    std::vector<std::int64_t> xv(k);
    xv[k - 1] = best_v;
    for (std::size_t i = k; i-- > 1;) xv[i - 1] = arg[i][static_cast<std::size_t>(xv[i])];

    DoubleRowSolution sol;
    sol.x.resize(k);
    for (std::size_t i = 0; i < k; ++i) sol.x[i] = g.coord(xv[i]);
    sol.y.assign(k + 1, {});
    sol.z.assign(k + 1, {});
    double cost = 0.0;
    for (std::size_t i = 0; i < k; ++i) cost += inst.doubles[i].cost.evaluate(sol.x[i]);
    for (std::size_t i = 0; i <= k; ++i) {
        const std::int64_t a = i == 0 ? 0 : xv[i - 1] + dsteps[i - 1];
        const std::int64_t b = i == k ? g.points : xv[i];
        auto fill = [&](const std::vector<DoubleRowCell>& row, std::vector<double>& out) {
            if (row.empty()) return;
            std::vector<std::int64_t> p = row_positions(row_tables(row), row_steps(row), a, b);
            out.resize(row.size());
            for (std::size_t j = 0; j < row.size(); ++j) {
                out[j] = g.coord(p[j]);
                cost += row[j].cost.evaluate(out[j]);
            }
        };
        fill(inst.gaps[i].bottom, sol.y[i]);
        fill(inst.gaps[i].top, sol.z[i]);
    }
    sol.total_cost = cost;
    return sol;
}

double grid_refinement_bound(const SingleRowInstance& inst, double step) {
    double s = 0.0;
    for (const SingleRowCell& c : inst.cells)
        s += c.cost.restrict(inst.x_min, inst.x_max).max_abs_slope();
    return step * s;
}

double grid_refinement_bound(const DoubleRowInstance& inst, double step) {
    double s = 0.0;
    for (const DoubleRowCell& c : inst.doubles)
        s += c.cost.restrict(inst.x_min, inst.x_max).max_abs_slope();
    for (const GapCells& gap : inst.gaps) {
        for (const DoubleRowCell& c : gap.bottom)
            s += c.cost.restrict(inst.x_min, inst.x_max).max_abs_slope();
        for (const DoubleRowCell& c : gap.top)
            s += c.cost.restrict(inst.x_min, inst.x_max).max_abs_slope();
    }
    return step * s;
}

} // namespace oracle
} // namespace rowlegal

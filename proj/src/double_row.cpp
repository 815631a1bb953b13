#include "rowlegal/double_row.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rowlegal/errors.hpp"
#include "rowlegal/tolerances.hpp"

namespace rowlegal {

namespace {

double row_width(const std::vector<DoubleRowCell>& row) {
    double w = 0.0;
    for (const DoubleRowCell& c : row) w += c.width;
    return w;
}

SingleRowInstance gap_row_instance(const DoubleRowInstance& inst,
                                   const std::vector<DoubleRowCell>& row) {
    SingleRowInstance s;
    s.x_min = inst.x_min;
    s.x_max = inst.x_max;
    s.cells.reserve(row.size());
    for (const DoubleRowCell& c : row) s.cells.push_back({c.id, c.width, c.cost});
    return s;
}

double kahan_total(const std::vector<double>& terms) {
    double sum = 0.0, comp = 0.0;
    for (double t : terms) {
        const double y = t - comp;
        const double acc = sum + y;
        comp = (acc - sum) - y;
        sum = acc;
    }
    return sum;
}

} // namespace

double DoubleRowInstance::gap_load(std::size_t i) const {
    return std::max(row_width(gaps[i].bottom), row_width(gaps[i].top));
}

void DoubleRowInstance::validate() const {
    if (doubles.empty()) throw ValidationError("at least one double-row cell is required (k >= 1)");
    if (gaps.size() != doubles.size() + 1)
        throw ValidationError("expected " + std::to_string(doubles.size() + 1) + " gaps, got " +
                              std::to_string(gaps.size()));
    if (!(x_min <= x_max)) throw ValidationError("window is empty");
    const double eps = position_eps(std::max(std::abs(x_min), std::abs(x_max)));
    auto check_cell = [&](const DoubleRowCell& c, const std::string& where) {
        if (!(c.width > 0.0))
            throw ValidationError(where + " " + c.id + " has non-positive width (w > 0 required)");
        if (c.cost.lo() > x_min + eps || c.cost.hi() < x_max - eps)
            throw ValidationError("cost of " + where + " " + c.id + " does not cover the window");
        c.cost.require_convex("cost of " + where + " " + c.id);
    };
    for (const DoubleRowCell& c : doubles) check_cell(c, "double-row cell");
    for (const GapCells& g : gaps) {
        for (const DoubleRowCell& c : g.bottom) check_cell(c, "bottom cell");
        for (const DoubleRowCell& c : g.top) check_cell(c, "top cell");
    }
    double need = 0.0;
    for (const DoubleRowCell& c : doubles) need += c.width;
    for (std::size_t i = 0; i < gaps.size(); ++i) need += gap_load(i);
    if (x_min + need > x_max + eps)
        throw InfeasibleError(
            "window too small: x_min + sum w(C_i) + sum_i max(sum w(b_ij), sum w(t_ij)) = " +
            std::to_string(x_min + need) + " > x_max = " + std::to_string(x_max));
}

bool check_feasible_tuple(const DoubleRowInstance& inst, std::span<const double> xs) {
    const std::size_t k = inst.doubles.size();
    if (xs.size() != k) return false;
    const double eps = position_eps(std::max(std::abs(inst.x_min), std::abs(inst.x_max)));
    double prev_end = inst.x_min; // x_0 + w(C_0)
    for (std::size_t i = 0; i <= k; ++i) {
        const double next = i == k ? inst.x_max : xs[i];
        if (prev_end + inst.gap_load(i) > next + eps) return false;
        if (i < k) prev_end = xs[i] + inst.doubles[i].width;
    }
    return true;
}

GapReference gap_reference_positions(const DoubleRowInstance& inst, GapSolveMode mode) {
    const std::size_t gap_count = inst.gaps.size();
    GapReference refs;
    refs.ybar.assign(gap_count, {});
    refs.zbar.assign(gap_count, {});
    // Tasks 2i / 2i+1 are gap i's bottom / top row; all independent.
    const std::int64_t tasks = static_cast<std::int64_t>(2 * gap_count);
    auto run_task = [&](std::int64_t t) {
        const std::size_t i = static_cast<std::size_t>(t / 2);
        const std::vector<DoubleRowCell>& row = (t % 2 == 0) ? inst.gaps[i].bottom : inst.gaps[i].top;
        std::vector<double>& out = (t % 2 == 0) ? refs.ybar[i] : refs.zbar[i];
        if (row.empty()) return;
        out = solve(gap_row_instance(inst, row)).positions;
    };
    if (mode == GapSolveMode::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t t = 0; t < tasks; ++t) run_task(t);
    } else {
        for (std::int64_t t = 0; t < tasks; ++t) run_task(t);
    }
    return refs;
}

namespace {

/** Suffix widths Ssuf_j = sum_{l >= j} w and prefixes Spre_j = sum_{l < j} w of one row. */
struct RowPrefix {
    std::vector<double> pre, suf;
    explicit RowPrefix(const std::vector<DoubleRowCell>& row) {
        const std::size_t m = row.size();
        pre.assign(m + 1, 0.0);
        for (std::size_t j = 0; j < m; ++j) pre[j + 1] = pre[j] + row[j].width;
        suf.assign(m + 1, 0.0);
        for (std::size_t j = m; j-- > 0;) suf[j] = suf[j + 1] + row[j].width;
    }
};

} // namespace

ReducedInstance build_reduced(const DoubleRowInstance& inst, GapSolveMode mode) {
    inst.validate();
    return build_reduced(inst, gap_reference_positions(inst, mode));
}

ReducedInstance build_reduced(const DoubleRowInstance& inst, const GapReference& refs) {
    const std::size_t k = inst.doubles.size();
    ReducedInstance red;
    red.refs = refs;
    red.single.x_min = inst.x_min + inst.gap_load(0);
    red.single.x_max = inst.x_max;
    const double w_lo = red.single.x_min;
    const double w_hi = red.single.x_max;
    if (w_lo > w_hi + position_eps(std::max(std::abs(w_lo), std::abs(w_hi))))
        throw InfeasibleError("reduced window is empty: no feasible tuple exists");

    // Reduced widths and their prefix sums: the feasible coordinate range of
    // each double in the reduced instance. The transferred costs only describe
    // extension costs there; when a gap's reference block sits clamped at a
    // window edge, the raw summands lose convexity beyond that range, so after
    // assembly everything outside is replaced by tangent continuations.
    std::vector<double> wred(k), pref(k + 1, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        wred[i] = inst.doubles[i].width + inst.gap_load(i + 1);
        pref[i + 1] = pref[i] + wred[i];
    }

    std::vector<double> c_terms;
    for (std::size_t i = 1; i <= k; ++i) {
        const DoubleRowCell& ci = inst.doubles[i - 1];
        // Summand (3): the double's own cost.
        PiecewiseQuadratic F = ci.cost.restrict(inst.x_min, inst.x_max).rewindow(w_lo, w_hi);
        bool plain = true; // F is still exactly f_i

        auto add_min_side = [&](const std::vector<DoubleRowCell>& row,
                                const std::vector<double>& bar) {
            // Gap i-1 cells: q(min{x - Ssuf_j, bar_j}), clamp first, then shift.
            RowPrefix p(row);
            for (std::size_t j = 0; j < row.size(); ++j) {
                PiecewiseQuadratic term = row[j]
                                              .cost.restrict(inst.x_min, inst.x_max)
                                              .clamp_above(bar[j])
                                              .shift(-p.suf[j])
                                              .rewindow(w_lo, w_hi);
                F = F.sum(term);
                plain = false;
            }
        };
        auto add_max_side = [&](const std::vector<DoubleRowCell>& row,
                                const std::vector<double>& bar) {
            // Gap i cells: q(max{x + w(C_i) + Spre_j, bar_j}).
            RowPrefix p(row);
            for (std::size_t j = 0; j < row.size(); ++j) {
                PiecewiseQuadratic term = row[j]
                                              .cost.restrict(inst.x_min, inst.x_max)
                                              .clamp_below(bar[j])
                                              .shift(ci.width + p.pre[j])
                                              .rewindow(w_lo, w_hi);
                F = F.sum(term);
                plain = false;
            }
        };
        add_min_side(inst.gaps[i - 1].bottom, refs.ybar[i - 1]);
        add_max_side(inst.gaps[i].bottom, refs.ybar[i]);
        add_min_side(inst.gaps[i - 1].top, refs.zbar[i - 1]);
        add_max_side(inst.gaps[i].top, refs.zbar[i]);

        if (plain && w_lo == inst.x_min && w_hi == inst.x_max) {
            F = ci.cost;
        } else {
            F = F.tangent_extended(w_lo + pref[i - 1], w_hi - (pref[k] - pref[i - 1]));
        }
        F.require_convex("reduced cost F_" + std::to_string(i));
        red.total_cost_kinks += F.kink_count();
        red.single.cells.push_back({ci.id, wred[i - 1], std::move(F)});
    }

    // Interior gaps (1..k-1) are counted in two F's; c removes the double count.
    for (std::size_t i = 1; i < k; ++i) {
        for (std::size_t j = 0; j < inst.gaps[i].bottom.size(); ++j)
            c_terms.push_back(inst.gaps[i].bottom[j].cost.evaluate(refs.ybar[i][j]));
        for (std::size_t j = 0; j < inst.gaps[i].top.size(); ++j)
            c_terms.push_back(inst.gaps[i].top[j].cost.evaluate(refs.zbar[i][j]));
    }
    red.constant_c = kahan_total(c_terms);

    if (red.single.total_width() > w_hi - w_lo + position_eps(std::max(std::abs(w_lo), std::abs(w_hi))))
        throw InfeasibleError("reduced instance infeasible: no feasible tuple exists");
    return red;
}

DoubleRowSolution extend_solution(const DoubleRowInstance& inst, const GapReference& refs,
                                  std::span<const double> xs) {
    const std::size_t k = inst.doubles.size();
    if (!check_feasible_tuple(inst, xs))
        throw InfeasibleError("tuple is not feasible for the double-row instance");
    DoubleRowSolution sol;
    sol.x.assign(xs.begin(), xs.end());
    sol.y.assign(k + 1, {});
    sol.z.assign(k + 1, {});
    std::vector<double> cost_terms;
    for (std::size_t i = 0; i < k; ++i)
        cost_terms.push_back(inst.doubles[i].cost.evaluate(xs[i]));

    for (std::size_t i = 0; i <= k; ++i) {
        const double left = i == 0 ? inst.x_min : xs[i - 1] + inst.doubles[i - 1].width;
        const double right = i == k ? inst.x_max : xs[i];
        auto clamp_row = [&](const std::vector<DoubleRowCell>& row, const std::vector<double>& bar,
                             std::vector<double>& out) {
            RowPrefix p(row);
            out.resize(row.size());
            for (std::size_t j = 0; j < row.size(); ++j) {
                out[j] = std::min(right - p.suf[j], std::max(left + p.pre[j], bar[j]));
                cost_terms.push_back(row[j].cost.evaluate(out[j]));
            }
        };
        clamp_row(inst.gaps[i].bottom, refs.ybar[i], sol.y[i]);
        clamp_row(inst.gaps[i].top, refs.zbar[i], sol.z[i]);
    }
    sol.total_cost = kahan_total(cost_terms);
    return sol;
}

DoubleRowSolution solve(const DoubleRowInstance& inst, GapSolveMode mode) {
    inst.validate();
    ReducedInstance red = build_reduced(inst, gap_reference_positions(inst, mode));
    SingleRowSolution rsol = solve(red.single);
    DoubleRowSolution sol = extend_solution(inst, red.refs, rsol.positions);

    // Reduction self-check: the transferred objective must reproduce the
    // directly evaluated one, up to the roundoff the evaluations themselves
    // carry (term magnitudes grow with the square of the coordinates).
    double reduced_cost = 0.0, noise_scale = 0.0;
    for (std::size_t i = 0; i < red.single.cells.size(); ++i) {
        reduced_cost += red.single.cells[i].cost.evaluate(rsol.positions[i]);
        noise_scale += red.single.cells[i].cost.value_scale_at(rsol.positions[i]);
    }
    reduced_cost -= red.constant_c;
    const double tol = 1e-8 * std::max(1.0, std::abs(sol.total_cost)) +
                       32.0 * std::numeric_limits<double>::epsilon() * noise_scale;
    if (std::abs(reduced_cost - sol.total_cost) > tol)
        throw std::logic_error("reduction self-check failed: sum F_i(x_i) - c = " +
                               std::to_string(reduced_cost) + " vs direct objective " +
                               std::to_string(sol.total_cost));
    return sol;
}

DoubleRowSolution solve_fixed_doubles(const DoubleRowInstance& inst,
                                      std::span<const double> x_fixed, GapSolveMode mode) {
    inst.validate();
    if (!check_feasible_tuple(inst, x_fixed))
        throw InfeasibleError("fixed double positions are not a feasible tuple");
    return extend_solution(inst, gap_reference_positions(inst, mode), x_fixed);
}

std::vector<double> double_cost_targets(const DoubleRowInstance& inst) {
    std::vector<double> t;
    t.reserve(inst.doubles.size());
    for (const DoubleRowCell& c : inst.doubles) {
        auto [lo, hi] = c.cost.argmin_interval(inst.x_min, inst.x_max);
        t.push_back(0.5 * (lo + hi));
    }
    return t;
}

std::vector<double> project_targets_to_feasible(const DoubleRowInstance& inst,
                                                std::span<const double> targets) {
    const std::size_t k = inst.doubles.size();
    std::vector<double> xs(targets.begin(), targets.end());
    // Left-to-right: push right so every prefix fits.
    double lo = inst.x_min + inst.gap_load(0);
    for (std::size_t i = 0; i < k; ++i) {
        xs[i] = std::max(xs[i], lo);
        lo = xs[i] + inst.doubles[i].width + inst.gap_load(i + 1);
    }
    // Right-to-left: pull back inside the window / off the successor.
    double next = inst.x_max;
    for (std::size_t i = k; i-- > 0;) {
        xs[i] = std::min(xs[i], next - inst.doubles[i].width - inst.gap_load(i + 1));
        next = xs[i];
    }
    return xs;
}

std::vector<double> snap_doubles_to_sites(const DoubleRowInstance& inst,
                                          std::span<const double> xs, double pitch,
                                          double origin) {
    if (!(pitch > 0.0)) throw ValidationError("site pitch must be positive");
    const std::size_t k = inst.doubles.size();
    const double eps = position_eps(std::max(std::abs(inst.x_min), std::abs(inst.x_max)));
    auto ceil_site = [&](double x) {
        return origin + std::ceil((x - origin) / pitch - eps) * pitch;
    };
    auto floor_site = [&](double x) {
        return origin + std::floor((x - origin) / pitch + eps) * pitch;
    };
    auto round_site = [&](double x) {
        return origin + std::round((x - origin) / pitch) * pitch;
    };

    // Rightmost site-aligned positions, cascaded from the window edge.
    std::vector<double> hi(k);
    double limit = inst.x_max;
    for (std::size_t i = k; i-- > 0;) {
        hi[i] = floor_site(limit - inst.gap_load(i + 1) - inst.doubles[i].width);
        limit = hi[i];
    }
    // Walk left to right, preferring the site nearest the requested position.
    std::vector<double> out(k);
    double prev_end = inst.x_min;
    for (std::size_t i = 0; i < k; ++i) {
        const double lo = ceil_site(prev_end + inst.gap_load(i));
        if (lo > hi[i] + eps)
            throw InfeasibleError("no feasible site-aligned tuple exists for pitch " +
                                  std::to_string(pitch));
        out[i] = std::clamp(round_site(xs[i]), lo, hi[i]);
        prev_end = out[i] + inst.doubles[i].width;
    }
    return out;
}

} // namespace rowlegal

#include "rowlegal/single_row.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rowlegal/errors.hpp"
#include "rowlegal/shift_heap.hpp"
#include "rowlegal/tolerances.hpp"

namespace rowlegal {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double SingleRowInstance::total_width() const {
    double w = 0.0;
    for (const SingleRowCell& c : cells) w += c.width;
    return w;
}

void SingleRowInstance::validate() const {
    if (!(x_min <= x_max))
        throw ValidationError("window [" + std::to_string(x_min) + ", " + std::to_string(x_max) +
                              "] is empty");
    const double eps = position_eps(std::max(std::abs(x_min), std::abs(x_max)));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const SingleRowCell& c = cells[i];
        if (!(c.width > 0.0))
            throw ValidationError("cell " + (c.id.empty() ? std::to_string(i) : c.id) +
                                  " has non-positive width (w > 0 required)");
        if (c.cost.lo() > x_min + eps || c.cost.hi() < x_max - eps)
            throw ValidationError("cost of cell " + (c.id.empty() ? std::to_string(i) : c.id) +
                                  " does not cover the window");
        c.cost.require_convex("cost of cell " + (c.id.empty() ? std::to_string(i) : c.id));
    }
    if (total_width() > x_max - x_min + eps)
        throw InfeasibleError("sum of cell widths " + std::to_string(total_width()) +
                              " exceeds window span " + std::to_string(x_max - x_min) +
                              " (sum w(C_i) <= x_max - x_min violated)");
}

namespace {

/**
 * Working state of the clumping run. Blocks are keyed by the index of their
 * representative (leftmost) cell; the list 0..n over representatives starts
 * with the auxiliary cell 0 pinned at x_min with width 0.
 */
class ClumpingSolver {
public:
    ClumpingSolver(const SingleRowInstance& inst, SolveDiagnostics* diag)
        : inst_(inst), diag_(diag), n_(inst.cells.size()) {}

    SingleRowSolution run();

private:
    const SingleRowInstance& inst_;
    SolveDiagnostics* diag_;
    const std::size_t n_;

    double eps_pos_ = 0.0;

    // Per-cell cost data, flattened. Segment q of cell i covers
    // [kink_{q-1}, kink_q] in cell-local coordinates; cells enter at their
    // rightmost segment and cursors only ever move left.
    std::vector<std::int32_t> kink_off_, seg_off_;
    std::vector<double> kinks_;
    std::vector<Quadratic> segs_;
    std::vector<std::int32_t> cursor_;

    std::vector<double> width_;  // 1-based; width_[0] = 0 (auxiliary cell)
    std::vector<double> prefw_;  // prefw_[i] = sum of widths of cells < i

    // Representative state (index 0..n; 0 is the auxiliary cell).
    std::vector<std::int32_t> prev_, next_;
    std::vector<double> pos_;
    std::vector<double> block_width_;
    std::vector<Quadratic> g_;
    HeapArena arena_;
    std::vector<ShiftHeap> heap_;

    std::int32_t cell_kinks(std::size_t i) const { return kink_off_[i + 1] - kink_off_[i]; }
    double kink(std::size_t cell, std::int32_t q) const { return kinks_[kink_off_[cell] + q]; }
    const Quadratic& seg(std::size_t cell, std::int32_t q) const {
        return segs_[seg_off_[cell] + q];
    }

    double dom_hi(std::size_t i) const { return inst_.x_max - (prefw_[n_ + 1] - prefw_[i]); }

    void note_motion(double delta) {
        if (diag_ && delta > diag_->max_rightward_motion) diag_->max_rightward_motion = delta;
    }

    void load_costs();
    void move_to(std::size_t rep, double target);
    std::size_t place(std::size_t rep); // returns the representative finally placed
    void collapse(std::size_t rep, std::size_t right);
};

void ClumpingSolver::load_costs() {
    kink_off_.assign(n_ + 1, 0);
    seg_off_.assign(n_ + 1, 0);
    std::vector<PiecewiseQuadratic> restricted;
    restricted.reserve(n_);
    std::int32_t kacc = 0, sacc = 0;
    for (std::size_t i = 0; i < n_; ++i) {
        restricted.push_back(inst_.cells[i].cost.restrict(inst_.x_min, inst_.x_max));
        kink_off_[i] = kacc;
        seg_off_[i] = sacc;
        kacc += static_cast<std::int32_t>(restricted.back().kink_count());
        sacc += static_cast<std::int32_t>(restricted.back().kink_count() + 1);
    }
    kink_off_[n_] = kacc;
    seg_off_[n_] = sacc;
    kinks_.reserve(static_cast<std::size_t>(kacc));
    segs_.reserve(static_cast<std::size_t>(sacc));
    for (const PiecewiseQuadratic& f : restricted) {
        kinks_.insert(kinks_.end(), f.breakpoints().begin(), f.breakpoints().end());
        segs_.insert(segs_.end(), f.segments().begin(), f.segments().end());
    }
}

void ClumpingSolver::move_to(std::size_t rep, double target) {
    note_motion(target - pos_[rep]);
    ShiftHeap& h = heap_[rep];
    while (!h.empty() && h.max_key_or(-kInf) >= target - eps_pos_) {
        auto [key, cell] = h.pop_max();
        (void)key;
        if (diag_) ++diag_->heap_pops;
        const std::int32_t q = cursor_[cell];
        // Offset of member cell (1-based index cell+1) within block `rep`.
        const double off = prefw_[static_cast<std::size_t>(cell) + 1] - prefw_[rep];
        g_[rep] += (seg(cell, q - 1) - seg(cell, q)).shifted(off);
        cursor_[cell] = q - 1;
        if (q - 1 >= 1) h.push(kink(cell, q - 2) - off, cell);
    }
    pos_[rep] = target;
}

void ClumpingSolver::collapse(std::size_t rep, std::size_t right) {
    if (diag_) ++diag_->collapses;
    const double w_old = block_width_[rep];
    note_motion(pos_[rep] + w_old - pos_[right]); // members re-anchor at the block end
    g_[rep] += g_[right].shifted(w_old);
    heap_[right].add_offset(-w_old);
    heap_[rep].merge(std::move(heap_[right]));
    block_width_[rep] += block_width_[right];
    next_[rep] = next_[right];
    if (next_[right] >= 0) prev_[next_[right]] = static_cast<std::int32_t>(rep);
}

std::size_t ClumpingSolver::place(std::size_t start) {
    std::size_t c = start;
    move_to(c, std::min(pos_[c], dom_hi(c)));
    for (;;) {
        const std::size_t h = static_cast<std::size_t>(prev_[c]);
        const double t = pos_[h] + block_width_[h];
        const Quadratic& g = g_[c];
        const double x = pos_[c];
        const double es_x = slope_eps(std::max(std::abs(2.0 * g.a * x), std::abs(g.b)));

        if (g.slope(x) <= es_x) {
            // Not strictly increasing at the current position: the optimum range
            // reaches x, so the block settles at max(t, leftmost minimizer).
            for (;;) {
                const Quadratic& gc = g_[c];
                const double mh = heap_[c].max_key_or(-kInf);
                const double floor = std::max(mh, t);
                const double es =
                    slope_eps(std::max(std::abs(2.0 * gc.a * floor), std::abs(gc.b)));
                if (gc.slope(floor) >= -es) {
                    if (mh <= t + eps_pos_) {
                        move_to(c, t);
                        return c;
                    }
                    move_to(c, mh); // flat stretch may continue past this kink
                    continue;
                }
                // Strict decrease starts above the floor; the leftmost minimizer
                // within this stretch is the exact vertex.
                double stop;
                if (gc.a > 0.0) {
                    stop = std::clamp(-gc.b / (2.0 * gc.a), floor, pos_[c]);
                } else {
                    stop = pos_[c]; // constant negative slope: stay put
                }
                move_to(c, std::max(stop, t));
                return c;
            }
        }

        // Strictly increasing at x.
        const double mh = heap_[c].max_key_or(-kInf);
        const double vertex = g.a > 0.0 ? -g.b / (2.0 * g.a) : -kInf;
        if (vertex >= t - eps_pos_ && vertex >= mh - eps_pos_) {
            move_to(c, std::min(vertex, pos_[c]));
            return c;
        }
        if (mh > t + eps_pos_) {
            move_to(c, mh); // consume kinks until the picture changes
            continue;
        }
        if (h == 0) {
            // Increasing all the way down to the window floor: sit at it.
            move_to(c, t);
            return c;
        }
        collapse(h, c);
        c = h;
    }
}

SingleRowSolution ClumpingSolver::run() {
    inst_.validate();
    eps_pos_ = position_eps(std::max(std::abs(inst_.x_min), std::abs(inst_.x_max)));

    width_.assign(n_ + 1, 0.0);
    prefw_.assign(n_ + 2, 0.0);
    for (std::size_t i = 1; i <= n_; ++i) {
        width_[i] = inst_.cells[i - 1].width;
        prefw_[i + 1] = prefw_[i] + width_[i];
    }
    load_costs();

    prev_.assign(n_ + 1, -1);
    next_.assign(n_ + 1, -1);
    pos_.assign(n_ + 1, inst_.x_max);
    pos_[0] = inst_.x_min;
    block_width_.assign(n_ + 1, 0.0);
    cursor_.assign(n_, 0);
    g_.assign(n_ + 1, Quadratic{});
    arena_.reserve(std::min<std::size_t>(n_ + kinks_.size(), std::size_t{1} << 22));
    heap_.reserve(n_ + 1);
    for (std::size_t i = 0; i <= n_; ++i) heap_.emplace_back(arena_);

    std::size_t tail = 0;
    for (std::size_t i = 1; i <= n_; ++i) {
        const std::size_t cell = i - 1;
        const std::int32_t m = cell_kinks(cell);
        cursor_[cell] = m;
        g_[i] = seg(cell, m);
        block_width_[i] = width_[i];
        if (m >= 1) heap_[i].push(kink(cell, m - 1), static_cast<std::int32_t>(cell));
        prev_[i] = static_cast<std::int32_t>(tail);
        next_[tail] = static_cast<std::int32_t>(i);
        next_[i] = -1;
        tail = place(i); // collapses leave the surviving representative as tail
    }

    SingleRowSolution sol;
    sol.positions.assign(n_, 0.0);
    for (std::int32_t r = next_[0]; r != -1; r = next_[r]) {
        const std::size_t first = static_cast<std::size_t>(r);
        const std::size_t last = next_[r] == -1 ? n_ + 1 : static_cast<std::size_t>(next_[r]);
        sol.blocks.emplace_back(first - 1, last - 1);
        double x = pos_[first];
        for (std::size_t i = first; i < last; ++i) {
            sol.positions[i - 1] = x;
            x += width_[i];
        }
    }
    double cost = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        const double term = inst_.cells[i].cost.evaluate(sol.positions[i]) - comp;
        const double acc = cost + term;
        comp = (acc - cost) - term;
        cost = acc;
    }
    sol.total_cost = cost;
    return sol;
}

} // namespace

SingleRowSolution solve(const SingleRowInstance& inst, SolveDiagnostics* diag) {
    ClumpingSolver s(inst, diag);
    return s.run();
}

SingleRowSolution restrict_solution(const SingleRowInstance& inst, const SingleRowSolution& sol,
                                    double x_min2, double x_max2) {
    const double eps = position_eps(std::max(std::abs(inst.x_min), std::abs(inst.x_max)));
    if (x_min2 < inst.x_min - eps || x_max2 > inst.x_max + eps || !(x_min2 < x_max2))
        throw DomainError("restricted window must satisfy x_min <= x_min' < x_max' <= x_max");
    if (inst.total_width() > x_max2 - x_min2 + eps)
        throw InfeasibleError("cells do not fit into the restricted window [" +
                              std::to_string(x_min2) + ", " + std::to_string(x_max2) + "]");
    const std::size_t n = inst.cells.size();
    SingleRowSolution out;
    out.blocks = sol.blocks;
    out.positions.assign(n, 0.0);
    double pref = 0.0;
    double suff = inst.total_width();
    for (std::size_t i = 0; i < n; ++i) {
        out.positions[i] =
            std::min(x_max2 - suff, std::max(x_min2 + pref, sol.positions[i]));
        pref += inst.cells[i].width;
        suff -= inst.cells[i].width;
    }
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) cost += inst.cells[i].cost.evaluate(out.positions[i]);
    out.total_cost = cost;
    return out;
}

PiecewiseQuadratic block_cost_function(const SingleRowInstance& inst,
                                       std::pair<std::size_t, std::size_t> block) {
    const auto [first, last] = block;
    if (first >= last || last > inst.cells.size())
        throw DomainError("block range [" + std::to_string(first) + ", " + std::to_string(last) +
                          ") is invalid");
    double max_off = 0.0;
    for (std::size_t i = first; i + 1 < last; ++i) max_off += inst.cells[i].width;
    const double lo = inst.x_min;
    const double hi = inst.x_max - max_off;
    PiecewiseQuadratic acc =
        inst.cells[first].cost.restrict(inst.x_min, inst.x_max).rewindow(lo, hi);
    double off = inst.cells[first].width;
    for (std::size_t i = first + 1; i < last; ++i) {
        acc = acc.sum(
            inst.cells[i].cost.restrict(inst.x_min, inst.x_max).shift(off).rewindow(lo, hi));
        off += inst.cells[i].width;
    }
    return acc;
}

} // namespace rowlegal

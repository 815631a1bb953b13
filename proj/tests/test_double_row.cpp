#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rowlegal/double_row.hpp"
#include "rowlegal/errors.hpp"
#include "rowlegal/generator.hpp"
#include "rowlegal/oracle.hpp"
#include "test_util.hpp"

using namespace rowlegal;
using testutil::close_rel;

namespace {

DoubleRowInstance squeeze_instance() {
    // C_1 wants 4 but the bottom cell behind it pulls to 0 and the top cell in
    // front pulls to 6.
    DoubleRowInstance inst;
    inst.x_min = 0;
    inst.x_max = 10;
    inst.doubles.push_back({"C1", 2.0, PiecewiseQuadratic::square_displacement(0, 10, 4.0)});
    inst.gaps.resize(2);
    inst.gaps[1].bottom.push_back(
        {"b11", 4.0, PiecewiseQuadratic::square_displacement(0, 10, 0.0)});
    inst.gaps[0].top.push_back({"t01", 4.0, PiecewiseQuadratic::square_displacement(0, 10, 6.0)});
    return inst;
}

DoubleRowInstance generated(std::uint64_t seed, std::size_t k, double density,
                            GeneratorSpec::CostFamily fam = GeneratorSpec::CostFamily::quadratic) {
    GeneratorSpec spec;
    spec.seed = seed;
    spec.k = k;
    spec.max_cells_per_gap_row = 2;
    spec.width_min = 1;
    spec.width_max = 2;
    spec.density = density;
    spec.target_scatter = 3.0;
    spec.cost_family = fam;
    return generate_double_row(spec);
}

/** Independent feasibility check: left-pack every gap and test the fit. */
bool packs(const DoubleRowInstance& inst, std::span<const double> xs) {
    const std::size_t k = inst.doubles.size();
    double prev_end = inst.x_min;
    for (std::size_t i = 0; i <= k; ++i) {
        const double right = i == k ? inst.x_max : xs[i];
        double need_b = 0.0, need_t = 0.0;
        for (const DoubleRowCell& c : inst.gaps[i].bottom) need_b += c.width;
        for (const DoubleRowCell& c : inst.gaps[i].top) need_t += c.width;
        if (prev_end + std::max(need_b, need_t) > right + 1e-9) return false;
        if (i < k) prev_end = xs[i] + inst.doubles[i].width;
    }
    return true;
}

/** Samples a random feasible tuple by telescoping the slack left to right. */
std::vector<double> random_feasible_tuple(const DoubleRowInstance& inst, Rng& rng) {
    const std::size_t k = inst.doubles.size();
    std::vector<double> need_after(k + 1, 0.0); // room needed right of double i
    double acc = inst.gap_load(k);
    need_after[k] = acc;
    for (std::size_t i = k; i-- > 1;) {
        acc += inst.doubles[i].width + inst.gap_load(i);
        need_after[i] = acc;
    }
    std::vector<double> xs(k);
    double prev_end = inst.x_min;
    for (std::size_t i = 0; i < k; ++i) {
        const double lo = prev_end + inst.gap_load(i);
        const double hi = inst.x_max - need_after[i + 1] - inst.doubles[i].width;
        xs[i] = rng.uniform(lo, hi);
        prev_end = xs[i] + inst.doubles[i].width;
    }
    return xs;
}

/** Per-gap optimum extension cost for a fixed tuple, via the exact oracle only. */
double per_gap_oracle_cost(const DoubleRowInstance& inst, std::span<const double> xs) {
    const std::size_t k = inst.doubles.size();
    double cost = 0.0;
    for (std::size_t i = 0; i < k; ++i) cost += inst.doubles[i].cost.evaluate(xs[i]);
    for (std::size_t i = 0; i <= k; ++i) {
        const double left = i == 0 ? inst.x_min : xs[i - 1] + inst.doubles[i - 1].width;
        const double right = i == k ? inst.x_max : xs[i];
        auto row_cost = [&](const std::vector<DoubleRowCell>& row) {
            if (row.empty()) return 0.0;
            SingleRowInstance gap;
            gap.x_min = left;
            gap.x_max = right;
            for (const DoubleRowCell& c : row)
                gap.cells.push_back({c.id, c.width, c.cost.restrict(left, right)});
            return oracle::single_row_exact(gap).total_cost;
        };
        cost += row_cost(inst.gaps[i].bottom) + row_cost(inst.gaps[i].top);
    }
    return cost;
}

} // namespace

TEST_CASE("check_feasible_tuple: direct inequalities") {
    DoubleRowInstance inst;
    inst.x_min = 0;
    inst.x_max = 10;
    inst.doubles.push_back({"C1", 2.0, PiecewiseQuadratic::square_displacement(0, 10, 3.0)});
    inst.gaps.resize(2);
    auto add = [&](std::vector<DoubleRowCell>& row, double w, double t) {
        row.push_back({"s", w, PiecewiseQuadratic::square_displacement(0, 10, t)});
    };
    add(inst.gaps[0].bottom, 3.0, 1.0);
    add(inst.gaps[1].top, 5.0, 7.0);
    CHECK(check_feasible_tuple(inst, std::vector<double>{3.0}));

    add(inst.gaps[1].top, 1.0, 9.0); // rear load becomes 6
    CHECK_FALSE(check_feasible_tuple(inst, std::vector<double>{3.0}));
}

TEST_CASE("check_feasible_tuple agrees with explicit packing on random instances") {
    Rng rng(81);
    for (int trial = 0; trial < 60; ++trial) {
        DoubleRowInstance inst =
            generated(8100 + static_cast<std::uint64_t>(trial), 1 + trial % 3, 0.75);
        std::vector<double> xs(inst.doubles.size());
        for (std::size_t i = 0; i < xs.size(); ++i)
            xs[i] = rng.uniform(inst.x_min, inst.x_max - inst.doubles[i].width);
        std::sort(xs.begin(), xs.end());
        CHECK(check_feasible_tuple(inst, xs) == packs(inst, xs));
        std::vector<double> good = random_feasible_tuple(inst, rng);
        CHECK(check_feasible_tuple(inst, good));
        CHECK(packs(inst, good));
    }
}

TEST_CASE("gap_reference_positions: vertex, empty gap, and oracle equality") {
    DoubleRowInstance inst;
    inst.x_min = 0;
    inst.x_max = 10;
    inst.doubles.push_back({"C1", 2.0, PiecewiseQuadratic::square_displacement(0, 10, 5.0)});
    inst.gaps.resize(2);
    inst.gaps[0].bottom.push_back(
        {"b01", 1.0, PiecewiseQuadratic::square_displacement(0, 10, 4.0)});
    GapReference refs = gap_reference_positions(inst);
    REQUIRE(refs.ybar[0].size() == 1);
    CHECK(refs.ybar[0][0] == doctest::Approx(4.0));
    CHECK(refs.ybar[1].empty());
    CHECK(refs.zbar[0].empty());

    for (int trial = 0; trial < 20; ++trial) {
        DoubleRowInstance gi = generated(8200 + static_cast<std::uint64_t>(trial), 2, 0.6);
        GapReference r = gap_reference_positions(gi);
        for (std::size_t i = 0; i < gi.gaps.size(); ++i) {
            auto check_row = [&](const std::vector<DoubleRowCell>& row,
                                 const std::vector<double>& got) {
                if (row.empty()) {
                    CHECK(got.empty());
                    return;
                }
                SingleRowInstance s;
                s.x_min = gi.x_min;
                s.x_max = gi.x_max;
                for (const DoubleRowCell& c : row) s.cells.push_back({c.id, c.width, c.cost});
                SingleRowSolution want = oracle::single_row_exact(s);
                REQUIRE(got.size() == want.positions.size());
                double got_cost = 0.0;
                for (std::size_t j = 0; j < got.size(); ++j)
                    got_cost += row[j].cost.evaluate(got[j]);
                CHECK(close_rel(got_cost, want.total_cost, 1e-6));
            };
            check_row(gi.gaps[i].bottom, r.ybar[i]);
            check_row(gi.gaps[i].top, r.zbar[i]);
        }
    }
}

TEST_CASE("gap_reference_positions: serial and parallel agree bitwise") {
    for (int trial = 0; trial < 10; ++trial) {
        DoubleRowInstance inst = generated(8300 + static_cast<std::uint64_t>(trial), 3, 0.7);
        GapReference a = gap_reference_positions(inst, GapSolveMode::serial);
        GapReference b = gap_reference_positions(inst, GapSolveMode::parallel);
        REQUIRE(a.ybar == b.ybar);
        REQUIRE(a.zbar == b.zbar);
    }
}

TEST_CASE("build_reduced: k = 1 with no single-row cells degenerates exactly") {
    DoubleRowInstance inst;
    inst.x_min = 0;
    inst.x_max = 10;
    inst.doubles.push_back({"C1", 2.0, PiecewiseQuadratic::square_displacement(0, 10, 5.0)});
    inst.gaps.resize(2);
    ReducedInstance red = build_reduced(inst);
    CHECK(red.constant_c == 0.0);
    CHECK(red.single.x_min == inst.x_min);
    CHECK(red.single.x_max == inst.x_max);
    REQUIRE(red.single.cells.size() == 1);
    CHECK(red.single.cells[0].width == 2.0);
    CHECK(red.single.cells[0].cost == inst.doubles[0].cost); // bit-identical
    DoubleRowSolution sol = solve(inst);
    CHECK(sol.x[0] == doctest::Approx(5.0));
    CHECK(sol.total_cost == doctest::Approx(0.0));
}

TEST_CASE("reduced cost F agrees with the per-gap oracle extension cost") {
    Rng rng(83);
    for (int trial = 0; trial < 25; ++trial) {
        DoubleRowInstance inst = generated(8400 + static_cast<std::uint64_t>(trial), 1 + trial % 3,
                                           0.55 + 0.1 * (trial % 4),
                                           trial % 2 ? GeneratorSpec::CostFamily::linear
                                                     : GeneratorSpec::CostFamily::quadratic);
        ReducedInstance red = build_reduced(inst);
        for (int probe = 0; probe < 8; ++probe) {
            std::vector<double> xs = random_feasible_tuple(inst, rng);
            double reduced = -red.constant_c;
            for (std::size_t i = 0; i < xs.size(); ++i)
                reduced += red.single.cells[i].cost.evaluate(xs[i]);
            const double direct = per_gap_oracle_cost(inst, xs);
            CAPTURE(trial);
            CAPTURE(probe);
            CHECK(close_rel(reduced, direct, 1e-6));
            // extend_solution reports the same optimum extension cost.
            DoubleRowSolution ext = extend_solution(inst, red.refs, xs);
            CHECK(close_rel(ext.total_cost, direct, 1e-6));
            CHECK(close_rel(reduced, ext.total_cost, 1e-8));
        }
    }
}

TEST_CASE("every reduced cost is convex (midpoint checks) and the kink budget holds") {
    Rng rng(84);
    for (int trial = 0; trial < 25; ++trial) {
        DoubleRowInstance inst =
            generated(8500 + static_cast<std::uint64_t>(trial), 1 + trial % 3, 0.7,
                      trial % 3 ? GeneratorSpec::CostFamily::quadratic
                                : GeneratorSpec::CostFamily::huber);
        ReducedInstance red = build_reduced(inst);
        std::size_t singles = 0, n_kinks = 0;
        for (const GapCells& g : inst.gaps) {
            singles += g.bottom.size() + g.top.size();
            for (const DoubleRowCell& c : g.bottom)
                n_kinks += c.cost.restrict(inst.x_min, inst.x_max).kink_count();
            for (const DoubleRowCell& c : g.top)
                n_kinks += c.cost.restrict(inst.x_min, inst.x_max).kink_count();
        }
        for (const DoubleRowCell& c : inst.doubles)
            n_kinks += c.cost.restrict(inst.x_min, inst.x_max).kink_count();
        CHECK(red.total_cost_kinks <= 2 * singles + n_kinks);

        for (const SingleRowCell& c : red.single.cells) {
            CHECK(c.cost.is_convex());
            for (int probe = 0; probe < 100; ++probe) {
                const double a = rng.uniform(c.cost.lo(), c.cost.hi());
                const double b = rng.uniform(c.cost.lo(), c.cost.hi());
                const double mid = 0.5 * (a + b);
                CHECK(c.cost.evaluate(mid) <=
                      0.5 * (c.cost.evaluate(a) + c.cost.evaluate(b)) + 1e-7);
            }
        }
    }
}

TEST_CASE("extend_solution: no clamping when gaps are wide, full packing when tight") {
    DoubleRowInstance inst;
    inst.x_min = 0;
    inst.x_max = 20;
    inst.doubles.push_back({"C1", 2.0, PiecewiseQuadratic::square_displacement(0, 20, 9.0)});
    inst.gaps.resize(2);
    inst.gaps[0].bottom.push_back(
        {"b01", 1.0, PiecewiseQuadratic::square_displacement(0, 20, 3.0)});
    inst.gaps[1].bottom.push_back(
        {"b11", 1.0, PiecewiseQuadratic::square_displacement(0, 20, 15.0)});
    GapReference refs = gap_reference_positions(inst);
    DoubleRowSolution wide = extend_solution(inst, refs, std::vector<double>{9.0});
    CHECK(wide.y[0][0] == doctest::Approx(3.0)); // = ybar, untouched
    CHECK(wide.y[1][0] == doctest::Approx(15.0));

    DoubleRowInstance tight;
    tight.x_min = 0;
    tight.x_max = 6;
    tight.doubles.push_back({"C1", 2.0, PiecewiseQuadratic::square_displacement(0, 6, 0.0)});
    tight.gaps.resize(2);
    tight.gaps[1].bottom.push_back({"b11", 2.0, PiecewiseQuadratic::square_displacement(0, 6, 0.0)});
    tight.gaps[1].bottom.push_back({"b12", 2.0, PiecewiseQuadratic::square_displacement(0, 6, 0.0)});
    GapReference trefs = gap_reference_positions(tight);
    // Gap 1 spans [2, 6] and its cells need exactly 4: packed from the left edge.
    DoubleRowSolution packed = extend_solution(tight, trefs, std::vector<double>{0.0});
    CHECK(packed.y[1][0] == doctest::Approx(2.0));
    CHECK(packed.y[1][1] == doctest::Approx(4.0));

    CHECK_THROWS_AS(extend_solution(tight, trefs, std::vector<double>{3.0}), InfeasibleError);
}

TEST_CASE("solve: squeeze instance matches the grid oracle") {
    DoubleRowInstance inst = squeeze_instance();
    DoubleRowSolution got = solve(inst);
    oracle::OracleConfig cfg;
    cfg.grid_step = 0.01;
    DoubleRowSolution want = oracle::double_row_grid(inst, cfg);
    CHECK(got.total_cost <= want.total_cost + 1e-9);
    CHECK(got.total_cost >= want.total_cost - oracle::grid_refinement_bound(inst, cfg.grid_step));
}

TEST_CASE("solve matches the grid oracle on random instances") {
    for (int trial = 0; trial < 25; ++trial) {
        DoubleRowInstance inst = generated(8600 + static_cast<std::uint64_t>(trial),
                                           1 + trial % 3, 0.6 + 0.1 * (trial % 4),
                                           trial % 2 ? GeneratorSpec::CostFamily::linear
                                                     : GeneratorSpec::CostFamily::quadratic);
        DoubleRowSolution got = solve(inst);
        oracle::OracleConfig cfg;
        cfg.grid_step = 0.01;
        DoubleRowSolution want = oracle::double_row_grid(inst, cfg);
        CAPTURE(trial);
        const double scale = std::max(1.0, std::abs(want.total_cost));
        CHECK(got.total_cost <= want.total_cost + 1e-5 * scale);
        CHECK(got.total_cost >=
              want.total_cost - oracle::grid_refinement_bound(inst, cfg.grid_step) - 1e-5 * scale);
    }
}

TEST_CASE("solution feasibility: all seven constraint families") {
    for (int trial = 0; trial < 25; ++trial) {
        DoubleRowInstance inst =
            generated(8700 + static_cast<std::uint64_t>(trial), 1 + trial % 3, 0.85);
        DoubleRowSolution s = solve(inst);
        const double eps = 1e-9 * (inst.x_max - inst.x_min);
        const std::size_t k = inst.doubles.size();
        for (std::size_t i = 0; i <= k; ++i) {
            const double left = i == 0 ? inst.x_min : s.x[i - 1] + inst.doubles[i - 1].width;
            const double right = i == k ? inst.x_max : s.x[i];
            CHECK(left <= right + eps);
            auto check_row = [&](const std::vector<DoubleRowCell>& row,
                                 const std::vector<double>& pos) {
                double prev = left;
                for (std::size_t j = 0; j < row.size(); ++j) {
                    CHECK(pos[j] >= prev - eps);
                    prev = pos[j] + row[j].width;
                }
                CHECK(prev <= right + eps);
            };
            check_row(inst.gaps[i].bottom, s.y[i]);
            check_row(inst.gaps[i].top, s.z[i]);
        }
    }
}

TEST_CASE("fixed-doubles baseline: equals solve at the optimum, never beats it") {
    Rng rng(88);
    for (int trial = 0; trial < 20; ++trial) {
        DoubleRowInstance inst =
            generated(8800 + static_cast<std::uint64_t>(trial), 1 + trial % 3, 0.8);
        DoubleRowSolution opt = solve(inst);
        DoubleRowSolution at_opt = solve_fixed_doubles(inst, opt.x);
        CHECK(close_rel(at_opt.total_cost, opt.total_cost, 1e-9));
        for (int probe = 0; probe < 5; ++probe) {
            std::vector<double> xs = random_feasible_tuple(inst, rng);
            DoubleRowSolution base = solve_fixed_doubles(inst, xs);
            CAPTURE(trial);
            CHECK(base.total_cost >= opt.total_cost - 1e-9 * std::max(1.0, opt.total_cost));
            CHECK(close_rel(base.total_cost, per_gap_oracle_cost(inst, xs), 1e-6));
        }
    }
}

TEST_CASE("infeasible inputs raise the right errors") {
    DoubleRowInstance inst;
    inst.x_min = 0;
    inst.x_max = 4;
    inst.doubles.push_back({"C1", 2.0, PiecewiseQuadratic::square_displacement(0, 4, 1.0)});
    inst.gaps.resize(2);
    inst.gaps[0].bottom.push_back({"b01", 3.0, PiecewiseQuadratic::square_displacement(0, 4, 0.0)});
    CHECK_THROWS_AS(solve(inst), InfeasibleError);

    DoubleRowInstance ok;
    ok.x_min = 0;
    ok.x_max = 10;
    ok.doubles.push_back({"C1", 2.0, PiecewiseQuadratic::square_displacement(0, 10, 1.0)});
    ok.gaps.resize(2);
    CHECK_THROWS_AS(solve_fixed_doubles(ok, std::vector<double>{9.5}), InfeasibleError);

    DoubleRowInstance empty;
    empty.x_min = 0;
    empty.x_max = 10;
    empty.gaps.resize(1);
    CHECK_THROWS_AS(solve(empty), ValidationError);
}

TEST_CASE("large instance far from the origin stays feasible and self-consistent") {
    GeneratorSpec spec;
    spec.seed = 515151;
    spec.k = 20000;
    spec.max_cells_per_gap_row = 2;
    spec.density = 0.8;
    spec.target_scatter = 12.0;
    DoubleRowInstance inst = generate_double_row(spec);
    const double off = 1.0e6;
    inst.x_min += off;
    inst.x_max += off;
    for (auto& c : inst.doubles) c.cost = c.cost.shift(-off);
    for (auto& g : inst.gaps) {
        for (auto& c : g.bottom) c.cost = c.cost.shift(-off);
        for (auto& c : g.top) c.cost = c.cost.shift(-off);
    }
    DoubleRowSolution s = solve(inst); // includes the reduction self-check
    const double eps = 1e-9 * (inst.x_max - inst.x_min);
    const std::size_t k = inst.doubles.size();
    double prev = inst.x_min;
    for (std::size_t i = 0; i <= k; ++i) {
        const double right = i == k ? inst.x_max : s.x[i];
        auto audit = [&](const std::vector<DoubleRowCell>& row, const std::vector<double>& pos) {
            double p = prev;
            for (std::size_t j = 0; j < row.size(); ++j) {
                REQUIRE(pos[j] >= p - eps);
                p = pos[j] + row[j].width;
            }
            REQUIRE(p <= right + eps);
        };
        audit(inst.gaps[i].bottom, s.y[i]);
        audit(inst.gaps[i].top, s.z[i]);
        if (i < k) prev = s.x[i] + inst.doubles[i].width;
    }
}

TEST_CASE("site snapping keeps feasibility and never beats the optimum") {
    for (int trial = 0; trial < 20; ++trial) {
        DoubleRowInstance inst = generated(8900 + static_cast<std::uint64_t>(trial), 2, 0.6);
        DoubleRowSolution opt = solve(inst);
        GapReference refs = gap_reference_positions(inst);
        const double pitch = trial % 2 ? 0.75 : 1.0;
        std::vector<double> snapped;
        try {
            snapped = snap_doubles_to_sites(inst, opt.x, pitch, inst.x_min);
        } catch (const InfeasibleError&) {
            continue; // a coarse pitch may admit no site-aligned tuple
        }
        REQUIRE(check_feasible_tuple(inst, snapped));
        for (double x : snapped) {
            const double steps = (x - inst.x_min) / pitch;
            CHECK(std::abs(steps - std::round(steps)) <= 1e-9);
        }
        DoubleRowSolution heur = extend_solution(inst, refs, snapped);
        CHECK(heur.total_cost >= opt.total_cost - 1e-9 * std::max(1.0, opt.total_cost));
    }
}

#include <doctest.h>

#include <cmath>

#include "rowlegal/errors.hpp"
#include "rowlegal/generator.hpp"
#include "rowlegal/oracle.hpp"
#include "rowlegal/single_row.hpp"
#include "test_util.hpp"

using namespace rowlegal;
using testutil::close_rel;

namespace {

SingleRowInstance make_instance(double x_min, double x_max,
                                std::vector<std::pair<double, PiecewiseQuadratic>> cells) {
    SingleRowInstance inst;
    inst.x_min = x_min;
    inst.x_max = x_max;
    std::size_t i = 0;
    for (auto& [w, f] : cells) inst.cells.push_back({"c" + std::to_string(++i), w, std::move(f)});
    return inst;
}

GeneratorSpec small_spec(std::uint64_t seed, std::size_t n, GeneratorSpec::CostFamily fam) {
    GeneratorSpec spec;
    spec.seed = seed;
    spec.k = n;
    spec.density = 0.5 + 0.4 * static_cast<double>(seed % 5) / 5.0;
    spec.cost_family = fam;
    return spec;
}

} // namespace

TEST_CASE("solve: symmetric clump and window clamp") {
    SingleRowInstance inst = make_instance(
        0, 10,
        {{2.0, PiecewiseQuadratic::square_displacement(0, 10, 5.0)},
         {2.0, PiecewiseQuadratic::square_displacement(0, 10, 5.0)}});
    SingleRowSolution sol = solve(inst);
    REQUIRE(sol.positions.size() == 2);
    CHECK(sol.positions[0] == doctest::Approx(4.0));
    CHECK(sol.positions[1] == doctest::Approx(6.0));
    CHECK(sol.total_cost == doctest::Approx(2.0));
    REQUIRE(sol.blocks.size() == 1); // both cells in one block

    SingleRowInstance clamped = make_instance(
        0, 10, {{2.0, PiecewiseQuadratic::square_displacement(0, 10, 12.0)}});
    SingleRowSolution cs = solve(clamped);
    CHECK(cs.positions[0] == doctest::Approx(8.0));
    CHECK(cs.total_cost == doctest::Approx(16.0));
}

TEST_CASE("solve: empty instance and left-clamped cell") {
    SingleRowInstance empty;
    empty.x_min = 0;
    empty.x_max = 5;
    SingleRowSolution sol = solve(empty);
    CHECK(sol.positions.empty());
    CHECK(sol.total_cost == doctest::Approx(0.0));

    SingleRowInstance left = make_instance(
        0, 10, {{1.0, PiecewiseQuadratic::square_displacement(0, 10, -3.0)}});
    CHECK(solve(left).positions[0] == doctest::Approx(0.0));
}

TEST_CASE("solve: validation and infeasibility errors") {
    SingleRowInstance zero = make_instance(
        0, 10, {{0.0, PiecewiseQuadratic::square_displacement(0, 10, 5.0)}});
    CHECK_THROWS_AS(solve(zero), ValidationError);

    SingleRowInstance fat = make_instance(
        0, 3,
        {{2.0, PiecewiseQuadratic::square_displacement(0, 3, 1.0)},
         {2.0, PiecewiseQuadratic::square_displacement(0, 3, 2.0)}});
    CHECK_THROWS_AS(solve(fat), InfeasibleError);

    SingleRowInstance concave;
    concave.x_min = 0;
    concave.x_max = 10;
    PiecewiseQuadratic bad = PiecewiseQuadratic::from_segments(0, 10, {}, {{-1, 0, 30}});
    concave.cells.push_back({"c", 1.0, bad});
    CHECK_THROWS_AS(solve(concave), ValidationError);
}

TEST_CASE("solve matches the exact oracle on random small instances") {
    const GeneratorSpec::CostFamily fams[] = {GeneratorSpec::CostFamily::quadratic,
                                              GeneratorSpec::CostFamily::linear,
                                              GeneratorSpec::CostFamily::huber};
    for (int trial = 0; trial < 120; ++trial) {
        GeneratorSpec spec = small_spec(1000 + static_cast<std::uint64_t>(trial),
                                        1 + static_cast<std::size_t>(trial % 5),
                                        fams[trial % 3]);
        SingleRowInstance inst = generate_single_row(spec);
        SingleRowSolution got = solve(inst);
        SingleRowSolution want = oracle::single_row_exact(inst);
        CAPTURE(trial);
        CHECK(close_rel(got.total_cost, want.total_cost, 1e-6));
        // The solution itself must be feasible.
        double prev_end = inst.x_min;
        for (std::size_t i = 0; i < got.positions.size(); ++i) {
            CHECK(got.positions[i] >= prev_end - 1e-9);
            prev_end = got.positions[i] + inst.cells[i].width;
        }
        CHECK(prev_end <= inst.x_max + 1e-9);
    }
}

TEST_CASE("monotone leftward motion over instrumented runs") {
    for (int trial = 0; trial < 100; ++trial) {
        GeneratorSpec spec = small_spec(2000 + static_cast<std::uint64_t>(trial),
                                        2 + static_cast<std::size_t>(trial % 12),
                                        trial % 2 ? GeneratorSpec::CostFamily::huber
                                                  : GeneratorSpec::CostFamily::quadratic);
        SingleRowInstance inst = generate_single_row(spec);
        SolveDiagnostics diag;
        solve(inst, &diag);
        CAPTURE(trial);
        CHECK(diag.max_rightward_motion <= 1e-9);
    }
}

TEST_CASE("each block representative sits inside the argmin range of its cumulated cost") {
    for (int trial = 0; trial < 40; ++trial) {
        GeneratorSpec spec = small_spec(3000 + static_cast<std::uint64_t>(trial),
                                        3 + static_cast<std::size_t>(trial % 6),
                                        GeneratorSpec::CostFamily::huber);
        SingleRowInstance inst = generate_single_row(spec);
        SingleRowSolution sol = solve(inst);
        double pref = 0.0;
        std::size_t cell = 0;
        double total = inst.total_width();
        for (auto [first, last] : sol.blocks) {
            while (cell < first) {
                pref += inst.cells[cell].width;
                ++cell;
            }
            double suffix = total - pref;
            PiecewiseQuadratic fbar = block_cost_function(inst, {first, last});
            auto [alo, ahi] = fbar.argmin_interval(inst.x_min + pref, inst.x_max - suffix);
            CAPTURE(trial);
            CAPTURE(first);
            CHECK(sol.positions[first] >= alo - 1e-6);
            CHECK(sol.positions[first] <= ahi + 1e-6);
        }
    }
}

TEST_CASE("block cost function: singleton and shifted pair") {
    SingleRowInstance inst = make_instance(
        0, 10,
        {{2.0, PiecewiseQuadratic::square_displacement(0, 10, 5.0)},
         {2.0, PiecewiseQuadratic::square_displacement(0, 10, 5.0)}});
    PiecewiseQuadratic lone = block_cost_function(inst, {0, 1});
    CHECK(lone.evaluate(3.0) == doctest::Approx(4.0));

    PiecewiseQuadratic pair = block_cost_function(inst, {0, 2});
    // (x-5)^2 + (x-3)^2
    for (double x : {0.0, 1.5, 4.0, 6.5, 8.0})
        CHECK(pair.evaluate(x) ==
              doctest::Approx((x - 5.0) * (x - 5.0) + (x - 3.0) * (x - 3.0)));
}

TEST_CASE("block cost function equals the shifted member sum pointwise on random blocks") {
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        GeneratorSpec spec = small_spec(4000 + static_cast<std::uint64_t>(trial), 6,
                                        GeneratorSpec::CostFamily::huber);
        SingleRowInstance inst = generate_single_row(spec);
        const std::size_t first = static_cast<std::size_t>(rng.uniform_int(0, 4));
        const std::size_t last = first + static_cast<std::size_t>(rng.uniform_int(1, 2));
        PiecewiseQuadratic fbar = block_cost_function(inst, {first, last});
        for (int i = 0; i <= 100; ++i) {
            const double x = fbar.lo() + (fbar.hi() - fbar.lo()) * i / 100.0;
            double want = 0.0, off = 0.0;
            for (std::size_t l = first; l < last; ++l) {
                want += inst.cells[l].cost.evaluate(x + off);
                off += inst.cells[l].width;
            }
            CHECK(close_rel(fbar.evaluate(x), want, 1e-9));
        }
    }
}

TEST_CASE("restrict_solution: left clamp, identity, and the re-solve oracle") {
    SingleRowInstance one = make_instance(
        0, 10, {{1.0, PiecewiseQuadratic::square_displacement(0, 10, 2.0)}});
    SingleRowSolution sol = solve(one);
    CHECK(sol.positions[0] == doctest::Approx(2.0));
    SingleRowSolution moved = restrict_solution(one, sol, 3.0, 10.0);
    CHECK(moved.positions[0] == doctest::Approx(3.0));

    SingleRowSolution same = restrict_solution(one, sol, 0.0, 10.0);
    CHECK(same.positions[0] == doctest::Approx(sol.positions[0]));

    Rng rng(42);
    for (int trial = 0; trial < 60; ++trial) {
        GeneratorSpec spec = small_spec(5000 + static_cast<std::uint64_t>(trial),
                                        2 + static_cast<std::size_t>(trial % 6),
                                        trial % 2 ? GeneratorSpec::CostFamily::linear
                                                  : GeneratorSpec::CostFamily::quadratic);
        SingleRowInstance inst = generate_single_row(spec);
        SingleRowSolution full = solve(inst);
        const double total = inst.total_width();
        const double slack = (inst.x_max - inst.x_min) - total;
        const double cut_lo = rng.uniform(0.0, slack * 0.5);
        const double cut_hi = rng.uniform(0.0, slack * 0.5);
        const double lo2 = inst.x_min + cut_lo;
        const double hi2 = inst.x_max - cut_hi;
        SingleRowSolution fast = restrict_solution(inst, full, lo2, hi2);

        SingleRowInstance shrunk = inst;
        shrunk.x_min = lo2;
        shrunk.x_max = hi2;
        for (auto& c : shrunk.cells) c.cost = c.cost.restrict(lo2, hi2);
        SingleRowSolution fresh = solve(shrunk);
        CAPTURE(trial);
        CHECK(close_rel(fast.total_cost, fresh.total_cost, 1e-9));
    }
}

TEST_CASE("restrict_solution rejects bad windows") {
    SingleRowInstance one = make_instance(
        0, 10, {{4.0, PiecewiseQuadratic::square_displacement(0, 10, 2.0)}});
    SingleRowSolution sol = solve(one);
    CHECK_THROWS_AS(restrict_solution(one, sol, -1.0, 10.0), DomainError);
    CHECK_THROWS_AS(restrict_solution(one, sol, 0.0, 3.0), InfeasibleError);
}

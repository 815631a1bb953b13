#include "rowlegal/generator.hpp"

#include <algorithm>
#include <cmath>

#include "rowlegal/errors.hpp"

namespace rowlegal {

namespace {

void check_spec(const GeneratorSpec& spec) {
    if (!(spec.density > 0.0 && spec.density <= 1.0))
        throw ValidationError("generator density must lie in (0, 1]");
    if (spec.width_min < 1 || spec.width_max < spec.width_min)
        throw ValidationError("generator widths must satisfy 1 <= width_min <= width_max");
    if (spec.k == 0) throw ValidationError("generator needs k >= 1 cells");
}

PiecewiseQuadratic make_cost(GeneratorSpec::CostFamily family, double lo, double hi,
                             double target, double weight) {
    switch (family) {
    case GeneratorSpec::CostFamily::linear:
        return PiecewiseQuadratic::abs_displacement(lo, hi, target, weight);
    case GeneratorSpec::CostFamily::huber:
        return PiecewiseQuadratic::huber_displacement(lo, hi, target, 1.0, weight);
    case GeneratorSpec::CostFamily::quadratic:
    default:
        return PiecewiseQuadratic::square_displacement(lo, hi, target, weight);
    }
}

double draw_target(Rng& rng, double base, double scatter, double lo, double hi) {
    const double t = base + scatter * (2.0 * rng.uniform() - 1.0);
    return std::round(std::clamp(t, lo, hi)); // integer-ish targets
}

} // namespace

DoubleRowInstance generate_double_row(const GeneratorSpec& spec) {
    check_spec(spec);
    Rng rng(spec.seed);
    const std::size_t k = spec.k;

    DoubleRowInstance inst;
    inst.doubles.resize(k);
    inst.gaps.resize(k + 1);

    double load = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        inst.doubles[i].id = "C" + std::to_string(i + 1);
        inst.doubles[i].width =
            static_cast<double>(rng.uniform_int(spec.width_min, spec.width_max));
        load += inst.doubles[i].width;
    }
    for (std::size_t i = 0; i <= k; ++i) {
        auto draw_row = [&](std::vector<DoubleRowCell>& row, const char* prefix) {
            const std::int64_t count = rng.uniform_int(0, static_cast<std::int64_t>(spec.max_cells_per_gap_row));
            row.resize(static_cast<std::size_t>(count));
            for (std::size_t j = 0; j < row.size(); ++j) {
                row[j].id = std::string(prefix) + std::to_string(i) + "_" + std::to_string(j + 1);
                row[j].width = static_cast<double>(rng.uniform_int(spec.width_min, spec.width_max));
            }
        };
        draw_row(inst.gaps[i].bottom, "b");
        draw_row(inst.gaps[i].top, "t");
        double wb = 0.0, wt = 0.0;
        for (const DoubleRowCell& c : inst.gaps[i].bottom) wb += c.width;
        for (const DoubleRowCell& c : inst.gaps[i].top) wt += c.width;
        load += std::max(wb, wt);
    }

    inst.x_min = 0.0;
    inst.x_max = std::ceil(load / spec.density);

    // Targets spread over the window in cell order, with scatter on top, so
    // dense instances genuinely contend for space.
    const double span = inst.x_max - inst.x_min;
    double packed = 0.0;
    auto next_base = [&](double width) {
        const double base = span * (packed + 0.5 * width) / std::max(load, 1.0);
        packed += width;
        return base;
    };
    for (std::size_t i = 0; i <= k; ++i) {
        double wb = 0.0, wt = 0.0;
        auto fill_row = [&](std::vector<DoubleRowCell>& row, double& wsum) {
            double local = packed; // both rows of a gap share the same stretch
            for (DoubleRowCell& c : row) {
                const double base = span * (local + 0.5 * c.width) / std::max(load, 1.0);
                const double target =
                    draw_target(rng, base, spec.target_scatter, inst.x_min, inst.x_max - c.width);
                const double weight = static_cast<double>(rng.uniform_int(1, spec.weight_max));
                c.cost = make_cost(spec.cost_family, inst.x_min, inst.x_max, target, weight);
                local += c.width;
                wsum += c.width;
            }
        };
        fill_row(inst.gaps[i].bottom, wb);
        fill_row(inst.gaps[i].top, wt);
        packed += std::max(wb, wt);
        if (i < k) {
            DoubleRowCell& c = inst.doubles[i];
            const double base = next_base(c.width);
            const double target =
                draw_target(rng, base, spec.target_scatter, inst.x_min, inst.x_max - c.width);
            const double weight = static_cast<double>(rng.uniform_int(1, spec.weight_max));
            c.cost = make_cost(spec.cost_family, inst.x_min, inst.x_max, target, weight);
        }
    }
    inst.validate();
    return inst;
}

SingleRowInstance generate_single_row(const GeneratorSpec& spec) {
    check_spec(spec);
    Rng rng(spec.seed);
    const std::size_t n = spec.k;

    SingleRowInstance inst;
    inst.cells.resize(n);
    double load = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        inst.cells[i].id = "c" + std::to_string(i + 1);
        inst.cells[i].width = static_cast<double>(rng.uniform_int(spec.width_min, spec.width_max));
        load += inst.cells[i].width;
    }
    inst.x_min = 0.0;
    inst.x_max = std::ceil(load / spec.density);
    const double span = inst.x_max;
    double packed = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        SingleRowCell& c = inst.cells[i];
        const double base = span * (packed + 0.5 * c.width) / load;
        packed += c.width;
        const double target =
            draw_target(rng, base, spec.target_scatter, inst.x_min, inst.x_max - c.width);
        const double weight = static_cast<double>(rng.uniform_int(1, spec.weight_max));
        c.cost = make_cost(spec.cost_family, inst.x_min, inst.x_max, target, weight);
    }
    inst.validate();
    return inst;
}

} // namespace rowlegal

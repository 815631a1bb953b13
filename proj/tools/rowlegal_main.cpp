#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rowlegal/double_row.hpp"
#include "rowlegal/errors.hpp"
#include "rowlegal/generator.hpp"
#include "rowlegal/instance_io.hpp"
#include "rowlegal/oracle.hpp"
#include "rowlegal/single_row.hpp"

namespace {

using namespace rowlegal;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitOracleMismatch = 4;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::uint64_t seed_from_env(std::uint64_t fallback) {
    if (const char* s = std::getenv("ROWLEGAL_SEED")) return std::strtoull(s, nullptr, 10);
    return fallback;
}

int cmd_solve(const std::string& path, bool use_oracle, double sites, double site_origin) {
    ParsedInstance in = parse_instance_file(path);
    nlohmann::json out;
    if (in.single) {
        SingleRowSolution sol =
            use_oracle ? oracle::single_row_exact(*in.single) : solve(*in.single);
        out = emit_solution(*in.single, sol);
    } else {
        const DoubleRowInstance& inst = *in.double_row;
        DoubleRowSolution sol = use_oracle ? oracle::double_row_grid(inst) : solve(inst);
        if (sites > 0.0) {
            GapReference refs = gap_reference_positions(inst);
            std::vector<double> snapped = snap_doubles_to_sites(inst, sol.x, sites, site_origin);
            sol = extend_solution(inst, refs, snapped);
            out = emit_solution(inst, sol);
            out["heuristic"] = true; // site snapping voids the optimality guarantee
            out["site_pitch"] = sites;
        } else {
            out = emit_solution(inst, sol);
        }
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_check(const std::string& path, double delta, double tol) {
    ParsedInstance in = parse_instance_file(path);
    oracle::OracleConfig cfg;
    cfg.grid_step = delta;
    double solver_cost = 0.0, oracle_cost = 0.0, slack = 0.0;
    if (in.single) {
        solver_cost = solve(*in.single).total_cost;
        bool exact = true;
        try {
            oracle_cost = oracle::single_row_exact(*in.single, cfg).total_cost;
        } catch (const OracleLimitError&) {
            exact = false;
            oracle_cost = oracle::single_row_grid(*in.single, cfg).total_cost;
        }
        slack = exact ? 0.0 : oracle::grid_refinement_bound(*in.single, delta);
    } else {
        solver_cost = solve(*in.double_row).total_cost;
        oracle_cost = oracle::double_row_grid(*in.double_row, cfg).total_cost;
        slack = oracle::grid_refinement_bound(*in.double_row, delta);
    }
    const double scale = std::max({1.0, std::abs(solver_cost), std::abs(oracle_cost)});
    const double gap = (solver_cost - oracle_cost) / scale;
    nlohmann::json out{{"format", 1},
                       {"solver_cost", solver_cost},
                       {"oracle_cost", oracle_cost},
                       {"relative_gap", gap},
                       {"refinement_slack", slack}};
    const bool ok = solver_cost <= oracle_cost + tol * scale &&
                    solver_cost >= oracle_cost - slack - tol * scale;
    out["ok"] = ok;
    std::cout << out.dump(2) << "\n";
    return ok ? kExitOk : kExitOracleMismatch;
}

int cmd_compare(const std::string& path) {
    ParsedInstance in = parse_instance_file(path);
    if (!in.double_row) {
        std::cerr << "compare needs a double-row instance\n";
        return kExitValidation;
    }
    const DoubleRowInstance& inst = *in.double_row;
    DoubleRowSolution opt = solve(inst);
    std::vector<double> fixed = project_targets_to_feasible(inst, double_cost_targets(inst));
    DoubleRowSolution base = solve_fixed_doubles(inst, fixed);
    const double ratio = base.total_cost > 0.0 ? opt.total_cost / base.total_cost
                                               : (opt.total_cost > 0.0 ? INFINITY : 1.0);
    nlohmann::json out{{"format", 1},
                       {"solve_cost", opt.total_cost},
                       {"fixed_doubles_cost", base.total_cost},
                       {"ratio", ratio}};
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_bench(const std::string& sizes_csv, bool double_row, std::uint64_t seed) {
    std::vector<std::size_t> sizes;
    std::size_t pos = 0;
    while (pos < sizes_csv.size()) {
        std::size_t next = sizes_csv.find(',', pos);
        if (next == std::string::npos) next = sizes_csv.size();
        sizes.push_back(static_cast<std::size_t>(std::stoull(sizes_csv.substr(pos, next - pos))));
        pos = next + 1;
    }
    std::cout.setf(std::ios::fmtflags(0), std::ios::floatfield);
    std::cout.precision(6);
    if (!double_row) {
        std::cout << "format,kind,n,gen_seconds,solve_seconds,seconds_per_nlogn\n";
        for (std::size_t n : sizes) {
            GeneratorSpec spec;
            spec.seed = seed;
            spec.k = n;
            spec.cost_family = GeneratorSpec::CostFamily::huber; // ~2 kinks per cost
            spec.density = 0.6;
            spec.target_scatter = 8.0;
            auto t0 = std::chrono::steady_clock::now();
            SingleRowInstance inst = generate_single_row(spec);
            const double gen_s = seconds_since(t0);
            t0 = std::chrono::steady_clock::now();
            SingleRowSolution sol = solve(inst);
            const double solve_s = seconds_since(t0);
            const double nlogn = static_cast<double>(n) * std::log2(static_cast<double>(n) + 2.0);
            std::cout << "1,single," << n << "," << gen_s << "," << solve_s << ","
                      << solve_s / nlogn << "\n";
            if (!(sol.total_cost >= 0.0)) return 1; // keep the solve observable
        }
        return kExitOk;
    }
    std::cout << "format,kind,n,serial_seconds,parallel_seconds\n";
    for (std::size_t n : sizes) {
        GeneratorSpec spec;
        spec.seed = seed;
        spec.k = n;
        spec.max_cells_per_gap_row = 2;
        spec.density = 0.7;
        DoubleRowInstance inst = generate_double_row(spec);
        auto t0 = std::chrono::steady_clock::now();
        DoubleRowSolution serial = solve(inst, GapSolveMode::serial);
        const double serial_s = seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        DoubleRowSolution parallel = solve(inst, GapSolveMode::parallel);
        const double parallel_s = seconds_since(t0);
        if (serial.total_cost != parallel.total_cost) {
            std::cerr << "serial and parallel gap solves disagree\n";
            return 1;
        }
        std::cout << "1,double," << n << "," << serial_s << "," << parallel_s << "\n";
    }
    return kExitOk;
}

int cmd_gen(const GeneratorSpec& spec, bool single, const std::string& out_path) {
    nlohmann::json j;
    if (single)
        j = emit_instance(generate_single_row(spec));
    else
        j = emit_instance(generate_double_row(spec));
    if (out_path.empty() || out_path == "-") {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "cannot write " << out_path << "\n";
            return 1;
        }
        out << j.dump(2) << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal double-row legalization: clumping solver, reduction, oracles"};
    app.require_subcommand(1);

    std::string path, sizes = "10000,100000", gen_out;
    bool use_oracle = false, bench_double = false, gen_single = false;
    double sites = 0.0, site_origin = 0.0, delta = 0.01, tol = 1e-5;
    GeneratorSpec spec;
    spec.seed = seed_from_env(1);
    std::string cost_family = "quadratic";

    CLI::App* solve_cmd = app.add_subcommand("solve", "solve an instance file, print JSON");
    solve_cmd->add_option("file", path)->required();
    solve_cmd->add_flag("--oracle", use_oracle, "answer with the reference solver instead");
    solve_cmd->add_option("--sites", sites, "heuristic: snap doubles to this site pitch");
    solve_cmd->add_option("--site-origin", site_origin, "site grid origin");

    CLI::App* check_cmd = app.add_subcommand("check", "solve and compare against the oracle");
    check_cmd->add_option("file", path)->required();
    check_cmd->add_option("--delta", delta, "oracle grid step");
    check_cmd->add_option("--tol", tol, "relative tolerance");

    CLI::App* compare_cmd =
        app.add_subcommand("compare", "solve vs. the fixed-doubles baseline, print cost ratio");
    compare_cmd->add_option("file", path)->required();

    CLI::App* bench_cmd = app.add_subcommand("bench", "scaling benchmark, CSV on stdout");
    bench_cmd->add_option("--sizes", sizes, "comma-separated instance sizes");
    bench_cmd->add_flag("--double-row", bench_double,
                        "bench double-row solves, serial vs. OpenMP gap phase");
    bench_cmd->add_option("--seed", spec.seed, "generator seed");

    CLI::App* gen_cmd = app.add_subcommand("gen", "generate a random instance file");
    gen_cmd->add_option("-o,--out", gen_out, "output path (default stdout)");
    gen_cmd->add_option("--seed", spec.seed, "seed (env ROWLEGAL_SEED overrides the default)");
    gen_cmd->add_option("--k", spec.k, "double-row cell count (or cell count with --single)");
    gen_cmd->add_option("--max-per-gap", spec.max_cells_per_gap_row, "max cells per gap row");
    gen_cmd->add_option("--width-min", spec.width_min);
    gen_cmd->add_option("--width-max", spec.width_max);
    gen_cmd->add_option("--density", spec.density, "total width / window span, in (0, 1]");
    gen_cmd->add_option("--scatter", spec.target_scatter, "target noise length scale");
    gen_cmd->add_option("--cost", cost_family, "quadratic | linear | huber");
    gen_cmd->add_flag("--single", gen_single, "emit a single-row instance");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_cmd->parsed()) return cmd_solve(path, use_oracle, sites, site_origin);
        if (check_cmd->parsed()) return cmd_check(path, delta, tol);
        if (compare_cmd->parsed()) return cmd_compare(path);
        if (bench_cmd->parsed()) return cmd_bench(sizes, bench_double, spec.seed);
        if (gen_cmd->parsed()) {
            if (cost_family == "linear")
                spec.cost_family = GeneratorSpec::CostFamily::linear;
            else if (cost_family == "huber")
                spec.cost_family = GeneratorSpec::CostFamily::huber;
            else if (cost_family != "quadratic") {
                std::cerr << "unknown cost family " << cost_family << "\n";
                return kExitValidation;
            }
            return cmd_gen(spec, gen_single, gen_out);
        }
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const ValidationError& e) {
        std::cerr << "validation: " << e.what() << "\n";
        return kExitValidation;
    } catch (const DomainError& e) {
        std::cerr << "validation: " << e.what() << "\n";
        return kExitValidation;
    } catch (const OracleLimitError& e) {
        std::cerr << "oracle limit: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}

#include "oscchain/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <random>
#include <thread>

#include <json.hpp>

#include "oscchain/config.hpp"
#include "oscchain/diagnostics.hpp"
#include "oscchain/io.hpp"
#include "oscchain/selftest.hpp"

namespace oscchain::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string method;
    double tol = 0.0;
    std::string out_dir;
    int workers = 1;
    long long seed = -1;
    std::string scan;  // diagnose only
};

RunSpec load_spec(const CommonArgs& a) {
    if (a.config_path.empty()) throw ConfigError("--config is required");
    RunSpec spec = parse_config(io::read_text_file(a.config_path));
    if (!a.method.empty()) spec.method = a.method;
    if (a.tol > 0.0) spec.solver.tol = a.tol;
    if (!a.out_dir.empty()) spec.out_dir = a.out_dir;
    if (a.seed >= 0) spec.solver.seed = static_cast<std::uint64_t>(a.seed);
    return spec;
}

std::vector<std::string> methods_of(const RunSpec& spec) {
    if (spec.method == "both") return {"series", "fixed"};
    return {spec.method};
}

void echo_spec(const RunSpec& spec) {
    fs::create_directories(spec.out_dir);
    // The echo reproduces the run from inside its own directory, so it
    // refers to itself; absolute paths would also break byte-identical
    // sweep replays.
    RunSpec echo = spec;
    echo.out_dir = ".";
    io::write_text_file(spec.out_dir + "/run_spec.ini", serialize(echo));
}

// Solves with one method and writes solution + report into out_dir.
spectral::PeriodicSolution solve_one(const RunSpec& spec,
                                     const std::string& method,
                                     bool quiet = false) {
    auto result = (method == "series")
                      ? spectral::series_solve(spec.cfg, spec.solver)
                      : spectral::fixed_point_solve(spec.cfg, spec.solver);
    auto& [sol, rep] = result;
    io::write_solution_csv(spec.out_dir + "/solution_" + method + ".csv", sol);
    io::write_text_file(spec.out_dir + "/report_" + method + ".json",
                        io::report_json(rep));
    if (!quiet) {
        std::cout << method << ": converged in " << rep.iterations
                  << (method == "series" ? " orders" : " iterations")
                  << ", M = " << rep.max_harmonic
                  << ", residual = " << rep.final_residual << ", wall "
                  << rep.wall_seconds << " s\n";
        if (!rep.note.empty()) std::cerr << rep.note << "\n";
    }
    return std::move(sol);
}

int cmd_gap(const CommonArgs& a) {
    const RunSpec spec = load_spec(a);
    const spectral::CouplingRadius r = spectral::coupling_radius(spec.cfg);
    std::cout << "delta_star = " << io::format_g17(r.delta_star) << "\n";
    std::cout << "delta_bar  = " << io::format_g17(r.delta_bar) << "\n";
    std::cout << "nu0        = " << io::format_g17(r.nu0) << "\n";
    std::cout << "nu0_bar    = " << io::format_g17(r.nu0_bar) << "\n";
    if (spec.cfg.half_width == 0) {
        const auto [ds, db] = timedomain::single_oscillator_gap(spec.cfg);
        const double curv = spec.cfg.curvature_bound();
        std::cout << "oscillator delta_star = " << io::format_g17(ds) << "\n";
        std::cout << "oscillator delta_bar  = " << io::format_g17(db) << "\n";
        if (curv > 0.0) {
            std::cout << "oscillator nu0        = " << io::format_g17(ds / curv)
                      << "\n";
            std::cout << "oscillator nu0_bar    = " << io::format_g17(db / curv)
                      << "\n";
        }
    }
    return 0;
}

int cmd_solve(const CommonArgs& a) {
    RunSpec spec = load_spec(a);
    echo_spec(spec);
    std::vector<spectral::PeriodicSolution> sols;
    for (const std::string& m : methods_of(spec))
        sols.push_back(solve_one(spec, m));
    if (sols.size() == 2) {
        const double d = l2_distance(sols[0].field, sols[1].field);
        std::cout << "series vs fixed-point distance: " << d << "\n";
    }
    return 0;
}

spectral::PeriodicSolution load_solution(const RunSpec& spec) {
    for (const char* m : {"fixed", "series"}) {
        const std::string path =
            spec.out_dir + "/solution_" + std::string(m) + ".csv";
        if (fs::exists(path)) return io::read_solution_csv(path, spec.cfg);
    }
    throw ConfigError("no solution file in '" + spec.out_dir +
                      "'; run the solve subcommand first");
}

int cmd_integrate(const CommonArgs& a) {
    RunSpec spec = load_spec(a);
    echo_spec(spec);
    const spectral::PeriodicSolution sol = load_solution(spec);

    ChainState init;
    init.t = 0.0;
    init.q.assign(spec.cfg.sites(), 0.0);
    init.p.assign(spec.cfg.sites(), 0.0);
    if (spec.initial == "solution" || spec.initial == "perturbed") {
        init = spectral::solution_state(sol, 0.0);
        if (spec.initial == "perturbed") {
            std::mt19937_64 rng(spec.solver.seed);
            std::normal_distribution<double> dist(0.0, 1.0);
            for (double& v : init.q) v += spec.perturbation * dist(rng);
            for (double& v : init.p) v += spec.perturbation * dist(rng);
        }
    }

    const timedomain::Trajectory traj =
        timedomain::integrate(spec.cfg, init, spec.integrator);
    const std::vector<double> dist = timedomain::stroboscopic_distance(traj, sol);
    io::write_trajectory_csv(spec.out_dir + "/trajectory.csv", traj);
    io::write_strobe_csv(spec.out_dir + "/strobe.csv", dist, spec.cfg.theta);
    const double balance = diagnostics::energy_balance_residual(traj);
    io::write_text_file(spec.out_dir + "/integrate.json",
                        io::trajectory_json(traj, dist, balance));
    std::cout << "integrated " << spec.integrator.periods
              << " periods; final strobe distance = " << dist.back()
              << ", energy balance residual = " << balance << "\n";
    return 0;
}

int cmd_diagnose(const CommonArgs& a) {
    RunSpec spec = load_spec(a);
    echo_spec(spec);
    const std::string method = spec.method == "series" ? "series" : "fixed";
    const spectral::PeriodicSolution sol = solve_one(spec, method);
    std::vector<int> sizes;
    if (!a.scan.empty()) {
        std::istringstream is(a.scan);
        std::string tok;
        while (std::getline(is, tok, ','))
            if (!tok.empty()) sizes.push_back(std::stoi(tok));
    }
    const diagnostics::DiagnosticsReport rep =
        diagnostics::build_report(sol, sizes, spec.solver);
    io::write_text_file(spec.out_dir + "/diagnostics.json",
                        io::diagnostics_json(rep));
    const std::string text = io::diagnostics_text(rep);
    io::write_text_file(spec.out_dir + "/diagnostics.txt", text);
    std::cout << text;
    return 0;
}

int cmd_greens_dump(const CommonArgs& a) {
    RunSpec spec = load_spec(a);
    echo_spec(spec);
    const int M = spec.solver.max_harmonic > 0
                      ? spec.solver.max_harmonic
                      : std::max(4 * spec.cfg.forcing.max_mode(), 16);
    const greens::GreensKernelSet set = greens::build_kernel_set(spec.cfg, M);
    io::write_greens_csv(spec.out_dir + "/greens.csv", set);
    std::cout << "wrote kernel tables for m = 0.." << M << "\n";
    return 0;
}

int cmd_sweep(const CommonArgs& a) {
    RunSpec spec = load_spec(a);
    if (spec.sweep.empty())
        throw ConfigError("sweep requires a [sweep] section with vary lines");
    echo_spec(spec);

    std::size_t total = 1;
    for (const auto& axis : spec.sweep) total *= axis.values.size();
    if (total == 0) throw ConfigError("empty sweep grid");

    auto point_overrides = [&](std::size_t index) {
        std::vector<std::pair<std::string, double>> overrides;
        std::size_t rem = index;
        for (auto it = spec.sweep.rbegin(); it != spec.sweep.rend(); ++it) {
            overrides.emplace_back(it->key,
                                   it->values[rem % it->values.size()]);
            rem /= it->values.size();
        }
        std::reverse(overrides.begin(), overrides.end());
        return overrides;
    };
    auto point_name = [](std::size_t index) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "point_%04zu", index);
        return std::string(buf);
    };
    auto point_dir = [&](std::size_t index) {
        return spec.out_dir + "/" + point_name(index);
    };

    const int workers =
        std::clamp(a.workers, 1, 64);
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;

    auto run_point = [&](std::size_t index) {
        RunSpec point = spec;
        point.sweep.clear();
        for (const auto& [key, value] : point_overrides(index))
            apply_override(point, key, value);
        point.out_dir = point_dir(index);
        echo_spec(point);
        for (const std::string& m : methods_of(point))
            solve_one(point, m, /*quiet=*/true);
    };

    auto worker = [&] {
        for (;;) {
            const std::size_t index = next.fetch_add(1);
            if (index >= total) return;
            try {
                run_point(index);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);

    // Summary assembled in grid order, independent of completion order.
    ordered_json points = ordered_json::array();
    for (std::size_t index = 0; index < total; ++index) {
        ordered_json pt;
        pt["index"] = index;
        ordered_json ov;
        for (const auto& [key, value] : point_overrides(index)) ov[key] = value;
        pt["overrides"] = std::move(ov);
        pt["directory"] = point_name(index);
        RunSpec point = spec;
        point.sweep.clear();
        for (const auto& [key, value] : point_overrides(index))
            apply_override(point, key, value);
        const std::string method =
            methods_of(point).back();  // fixed when method = both
        point.out_dir = point_dir(index);
        const spectral::PeriodicSolution sol = io::read_solution_csv(
            point.out_dir + "/solution_" + method + ".csv", point.cfg);
        pt["work"] = diagnostics::work_per_period(sol);
        pt["dissipation"] = diagnostics::boundary_dissipation(sol);
        pt["l2_norm"] = l2_norm(sol.field);
        points.push_back(std::move(pt));
    }
    ordered_json summary;
    summary["points"] = std::move(points);
    io::write_text_file(spec.out_dir + "/sweep_summary.json",
                        summary.dump(2) + "\n");
    std::cout << "swept " << total << " points with " << workers
              << " worker(s)\n";
    return 0;
}

int cmd_selftest() {
    const int failures = selftest::run(std::cout);
    if (failures > 0) {
        std::cerr << failures << " selftest suite(s) failed\n";
        throw OracleError("internal oracle failure");
    }
    std::cout << "all selftest suites passed\n";
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{
        "oscchain: periodic steady states of periodically forced, "
        "boundary-damped anharmonic oscillator chains"};
    app.require_subcommand(1);
    app.footer(
        "Config defaults: nu = 0, potentials none, method both, tol = 1e-10,\n"
        "max_harmonic/grid_size auto, max_order = 400, max_iterations = 400,\n"
        "seed = 12345, steps_per_period = 1024, periods = 200,\n"
        "initial = solution, perturbation = 1e-3, directory = out.\n"
        "Required keys: chain.half_width, chain.omega0, chain.gamma,\n"
        "chain.theta or chain.omega, and at least one nonzero forcing mode.");

    CommonArgs common;
    auto add_common = [&common](CLI::App* sub, bool with_scan = false) {
        sub->add_option("--config", common.config_path, "config file path");
        sub->add_option("--method", common.method,
                        "series | fixed | both (overrides config)")
            ->check(CLI::IsMember({"series", "fixed", "both"}));
        sub->add_option("--tol", common.tol, "solver tolerance override");
        sub->add_option("--out", common.out_dir, "output directory override");
        sub->add_option("--workers", common.workers, "parallel sweep workers");
        sub->add_option("--seed", common.seed, "seed override");
        if (with_scan)
            sub->add_option("--scan", common.scan,
                            "comma-separated half-widths for the size scan");
    };

    CLI::App* gap = app.add_subcommand("gap", "print resonance gaps and radii");
    add_common(gap);
    CLI::App* solve =
        app.add_subcommand("solve", "compute the periodic steady state");
    add_common(solve);
    CLI::App* integrate = app.add_subcommand(
        "integrate", "direct time integration against a solved state");
    add_common(integrate);
    CLI::App* diagnose =
        app.add_subcommand("diagnose", "work/energy/localization diagnostics report");
    add_common(diagnose, true);
    CLI::App* sweep =
        app.add_subcommand("sweep", "run a declared parameter grid");
    add_common(sweep);
    CLI::App* gdump =
        app.add_subcommand("greens-dump", "dump kernel tables as CSV");
    add_common(gdump);
    app.add_subcommand("selftest", "run the embedded oracle suites");

    std::vector<const char*> argv;
    argv.push_back("oscchain");
    for (const auto& s : args) argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()),
                  const_cast<char**>(argv.data()));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gap->parsed()) return cmd_gap(common);
        if (solve->parsed()) return cmd_solve(common);
        if (integrate->parsed()) return cmd_integrate(common);
        if (diagnose->parsed()) return cmd_diagnose(common);
        if (sweep->parsed()) return cmd_sweep(common);
        if (gdump->parsed()) return cmd_greens_dump(common);
        return cmd_selftest();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ResonanceError& e) {
        std::cerr << "resonance gate: " << e.what() << "\n";
        return 3;
    } catch (const ConvergenceError& e) {
        std::cerr << "non-convergence: " << e.what() << "\n";
        return 4;
    } catch (const OracleError& e) {
        std::cerr << "oracle failure: " << e.what() << "\n";
        return 5;
    }
}

}  // namespace oscchain::cli

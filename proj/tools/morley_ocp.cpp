// Adaptive finite element runs for the benchmark control problems.
//
//   morley_ocp solve --problem ex1 --theta 0.3 --max-dofs 50000 [--uniform] [--out DIR] [--svg] [--seed N]
//   morley_ocp report run1/run.json run2/run.json [--out DIR]

#include "morley/run_io.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace morley;

namespace {

constexpr int exit_usage = 2;
constexpr int exit_solver = 3;

void configure_threads()
{
    const char* env = std::getenv("MORLEY_OCP_THREADS");
    int n = 1;
    if (env != nullptr && *env != '\0') {
        n = std::max(1, std::atoi(env));
    }
    Eigen::setNbThreads(n);
}

std::ofstream open_output(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

int run_solve(RunConfig config, const fs::path& out_dir, bool svg, bool trace, bool quiet)
{
    const ProblemSpec problem = problem_by_name(config.problem, config.seed);
    fs::create_directories(out_dir);
    if (trace) {
        config.solver.trace = &std::cerr;
    }

    const auto progress = [quiet](const IterationRecord& r) {
        if (quiet) {
            return;
        }
        std::cerr << "iter " << r.iteration << "  dofs " << r.dofs << "  eta_h " << r.eta_h;
        if (r.energy_error) {
            std::cerr << "  error " << *r.energy_error;
        }
        std::cerr << "  mu " << r.mu << "  lambda " << r.lambda_summary << '\n';
    };
    const AdaptiveResult result = adaptive_solve(problem, config.adapt, config.solver, progress);

    {
        auto out = open_output(out_dir / "convergence.csv");
        write_convergence_csv(out, result.records);
    }
    {
        auto out = open_output(out_dir / "run.json");
        out << run_to_json(config, result.records).dump(2) << '\n';
    }
    {
        auto out = open_output(out_dir / "mesh_final.txt");
        write_mesh(out, result.space->mesh());
    }
    {
        auto out = open_output(out_dir / "indicators_final.csv");
        write_indicators(out, result.estimator);
    }
    if (svg) {
        auto out = open_output(out_dir / "convergence.svg");
        write_svg_plot(out, config.problem + ": estimator and error", "DoFs", "value",
                       convergence_series(result.records));
        const auto eff = efficiency_series(result.records);
        if (!eff.empty()) {
            auto out2 = open_output(out_dir / "efficiency.svg");
            write_svg_plot(out2, config.problem + ": efficiency index", "DoFs", "eta_h / error", eff, false);
        }
    }
    return 0;
}

int run_report(const std::vector<std::string>& files, const fs::path& out_dir, bool svg)
{
    std::vector<LabelledRun> runs;
    std::map<std::string, int> used;
    for (const auto& file : files) {
        std::ifstream in(file);
        if (!in) {
            std::cerr << "error: cannot read " << file << '\n';
            return exit_usage;
        }
        try {
            const nlohmann::json j = nlohmann::json::parse(in);
            std::string label = j.at("config").at("problem").get<std::string>() +
                                (j.at("config").at("uniform").get<bool>() ? "-uniform" : "-adaptive");
            if (const int n = used[label]++; n > 0) {
                label += "-" + std::to_string(n + 1);
            }
            runs.push_back({label, records_from_json(j)});
        } catch (const std::exception& e) {
            std::cerr << "error: " << file << ": " << e.what() << '\n';
            return exit_usage;
        }
    }
    fs::create_directories(out_dir);
    {
        auto out = open_output(out_dir / "comparison.csv");
        write_comparison_csv(out, runs);
    }
    if (svg) {
        std::vector<PlotSeries> series;
        for (const auto& run : runs) {
            for (auto& s : convergence_series(run.records, run.label + " ")) {
                series.push_back(std::move(s));
            }
        }
        auto out = open_output(out_dir / "comparison.svg");
        write_svg_plot(out, "estimator and error", "DoFs", "value", series);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    configure_threads();

    CLI::App app{"Adaptive Morley/bubble finite elements for state-constrained optimal control"};
    app.require_subcommand(1);

    RunConfig config;
    std::string out_dir = ".";
    bool svg = false;
    bool trace = false;
    bool quiet = false;
    auto* solve = app.add_subcommand("solve", "run the adaptive loop on one problem");
    solve->add_option("--problem", config.problem, "ex1..ex4, manufactured, manufactured-active")->required();
    solve->add_option("--theta", config.adapt.theta, "Doerfler bulk parameter")
        ->check(CLI::Range(0.0, 1.0).description("in (0,1)"))
        ->capture_default_str();
    solve->add_option("--max-dofs", config.adapt.max_dofs, "stop once this many DoFs are reached")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    solve->add_option("--max-iterations", config.adapt.max_iterations)->check(CLI::PositiveNumber)->capture_default_str();
    solve->add_option("--initial-subdivisions", config.adapt.initial_subdivisions, "cells per side of the initial mesh")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    solve->add_flag("--uniform", config.adapt.uniform, "refine all elements");
    solve->add_option("--seed", config.seed, "seed for manufactured problems")->capture_default_str();
    solve->add_option("--out", out_dir, "output directory")->capture_default_str();
    solve->add_flag("--svg", svg, "write convergence.svg and efficiency.svg");
    solve->add_flag("--timing", config.adapt.timing, "fill the wall_ms column");
    solve->add_option("--linear-tolerance", config.solver.linear_tolerance)->capture_default_str();
    solve->add_option("--pdas-max-iterations", config.solver.pdas_max_iterations)->capture_default_str();
    solve->add_option("--pdas-c", config.solver.pdas_c)->check(CLI::PositiveNumber)->capture_default_str();
    solve->add_flag("--trace", trace, "print active-set iterations to stderr");
    solve->add_flag("--quiet", quiet, "no progress output");

    std::vector<std::string> files;
    std::string report_dir = ".";
    bool report_svg = false;
    auto* report = app.add_subcommand("report", "merge run.json files into one table");
    report->add_option("runs", files, "run.json files")->required();
    report->add_option("--out", report_dir, "output directory")->capture_default_str();
    report->add_flag("--svg", report_svg, "write comparison.svg");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }
    if (config.adapt.theta <= 0.0 || config.adapt.theta >= 1.0) {
        std::cerr << "error: --theta must lie strictly between 0 and 1\n";
        return exit_usage;
    }

    try {
        if (*solve) {
            return run_solve(config, out_dir, svg, trace, quiet);
        }
        return run_report(files, report_dir, report_svg);
    } catch (const ProblemError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const AdaptiveError& e) {
        std::cerr << "solver failure at " << e.what() << '\n';
        return exit_solver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_solver;
    }
}

#include "morley/adaptive.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace morley {

void AdaptConfig::validate() const
{
    if (!(theta > 0.0 && theta < 1.0)) {
        throw std::invalid_argument("theta must lie in (0, 1)");
    }
    if (max_dofs < 1 || max_iterations < 1 || initial_subdivisions < 1) {
        throw std::invalid_argument("max_dofs, max_iterations and initial_subdivisions must be positive");
    }
}

std::vector<Index> doerfler_mark(std::span<const double> indicators, double theta)
{
    if (!(theta > 0.0 && theta < 1.0)) {
        throw MarkingError("theta must lie in (0, 1)");
    }
    double total = 0.0;
    for (double v : indicators) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw MarkingError("indicators must be finite and non-negative");
        }
        total += v;
    }
    if (!(total > 0.0)) {
        throw MarkingError("all indicators vanish");
    }
    std::vector<Index> order(indicators.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return indicators[a] > indicators[b]; });
    const double target = theta * total;
    double sum = 0.0;
    std::vector<Index> marked;
    for (Index t : order) {
        marked.push_back(t);
        sum += indicators[t];
        if (sum >= target) {
            break;
        }
    }
    std::sort(marked.begin(), marked.end());
    return marked;
}

AdaptiveResult adaptive_solve(const ProblemSpec& problem, const AdaptConfig& config,
                              const SolverConfig& solver_config, const ProgressCallback& progress)
{
    problem.validate();
    config.validate();
    AdaptiveResult result;
    auto mesh = std::make_shared<const Mesh>(initial_mesh(problem.domain, config.initial_subdivisions));

    for (int it = 0; it < config.max_iterations; ++it) {
        const auto start = std::chrono::steady_clock::now();
        auto space = std::make_shared<const FeSpace>(mesh);
        const LinearSystem system = assemble_system(*space, problem);
        const ConstraintSet constraints = assemble_constraints(*space, problem);
        ViSolution solution;
        try {
            solution = solve_vi(system.matrix, system.rhs, constraints, solver_config);
        } catch (const SolverError& e) {
            throw AdaptiveError(it, e.what());
        }
        EstimatorBreakdown est = estimate(*space, solution, problem);

        IterationRecord rec;
        rec.iteration = it;
        rec.dofs = space->num_dofs();
        rec.elements = mesh->num_elements();
        rec.eta_h = est.eta_h();
        for (int k = 0; k < 5; ++k) {
            rec.eta[k] = est.eta(k + 1);
        }
        rec.oscillation = std::sqrt(est.oscillation_total);
        if (const auto err = true_error(*space, solution.y, problem, rec.eta_h)) {
            rec.energy_error = err->energy_error;
            rec.l2_error = err->l2_error;
            rec.h2_error = err->h2_seminorm_error;
            rec.efficiency_index = err->efficiency_index;
        }
        rec.mu = solution.mu;
        rec.lambda_summary = solution.lambda_magnitude();
        rec.active_state = solution.active_state;
        rec.active_control = solution.active_control;
        for (BoundState s : solution.element_state) {
            rec.lower_active += s == BoundState::lower ? 1 : 0;
            rec.upper_active += s == BoundState::upper ? 1 : 0;
        }
        rec.solver_iterations = solution.iterations;
        rec.kkt = kkt_residual(system.matrix, system.rhs, constraints, solution);
        if (config.timing) {
            rec.wall_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        }
        result.records.push_back(rec);
        if (progress) {
            progress(rec);
        }

        const bool last = rec.dofs >= config.max_dofs || it + 1 == config.max_iterations || !(est.total > 0.0);
        if (last) {
            result.space = std::move(space);
            result.solution = std::move(solution);
            result.estimator = std::move(est);
            break;
        }

        std::vector<Index> marked;
        if (config.uniform) {
            marked.resize(mesh->num_elements());
            std::iota(marked.begin(), marked.end(), Index{0});
        } else {
            marked = doerfler_mark(est.element, config.theta);
        }
        auto refined = std::make_shared<const Mesh>(bisect(*mesh, marked));
        if (const std::string audit = conformity_audit(*refined); !audit.empty()) {
            throw AdaptiveError(it, "refined mesh failed the conformity audit: " + audit);
        }
        mesh = std::move(refined);
    }
    return result;
}

double fit_slope(std::span<const double> dofs, std::span<const double> values, int window)
{
    if (window < 2 || dofs.size() != values.size() || static_cast<int>(dofs.size()) < window) {
        throw std::invalid_argument("fit_slope needs at least `window` >= 2 samples");
    }
    const std::size_t first = dofs.size() - static_cast<std::size_t>(window);
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = first; i < dofs.size(); ++i) {
        mx += std::log(dofs[i]);
        my += std::log(values[i]);
    }
    mx /= window;
    my /= window;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = first; i < dofs.size(); ++i) {
        const double dx = std::log(dofs[i]) - mx;
        sxy += dx * (std::log(values[i]) - my);
        sxx += dx * dx;
    }
    if (!(sxx > 0.0)) {
        throw std::invalid_argument("fit_slope needs distinct DoF counts");
    }
    return sxy / sxx;
}

double fit_slope(const std::vector<IterationRecord>& records, const std::function<double(const IterationRecord&)>& field,
                 int window)
{
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& r : records) {
        x.push_back(static_cast<double>(r.dofs));
        y.push_back(field(r));
    }
    return fit_slope(x, y, window);
}

}  // namespace morley

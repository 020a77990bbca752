#pragma once

#include "morley/estimator.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace morley {

struct AdaptConfig {
    double theta = 0.3;
    /// The loop stops once the space has at least this many DoFs.
    Index max_dofs = 30000;
    int max_iterations = 100;
    /// Refine every element instead of a Doerfler set.
    bool uniform = false;
    int initial_subdivisions = 2;
    /// Record wall-clock time per iteration (breaks byte-identical output).
    bool timing = false;

    void validate() const;
};

struct IterationRecord {
    int iteration = 0;
    Index dofs = 0;
    Index elements = 0;
    double eta_h = 0.0;
    /// eta_1 .. eta_5 (not squared).
    std::array<double, 5> eta{};
    double oscillation = 0.0;
    std::optional<double> energy_error;
    std::optional<double> l2_error;
    std::optional<double> h2_error;
    std::optional<double> efficiency_index;
    double mu = 0.0;
    /// Scalar multiplier, or max |lambda_T| for pointwise control constraints.
    double lambda_summary = 0.0;
    bool active_state = false;
    bool active_control = false;
    Index lower_active = 0;
    Index upper_active = 0;
    int solver_iterations = 0;
    KktReport kkt;
    std::optional<double> wall_ms;
};

struct AdaptiveResult {
    std::vector<IterationRecord> records;
    std::shared_ptr<const FeSpace> space;
    ViSolution solution;
    EstimatorBreakdown estimator;
};

class AdaptiveError : public std::runtime_error {
public:
    AdaptiveError(int iteration, const std::string& what)
        : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration)
    {
    }
    int iteration() const { return iteration_; }

private:
    int iteration_;
};

class MarkingError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Smallest set of elements, taken by decreasing indicator (ties by ascending
/// id), whose indicators sum to at least theta times the total. Returned in
/// ascending id order.
std::vector<Index> doerfler_mark(std::span<const double> indicators, double theta);

using ProgressCallback = std::function<void(const IterationRecord&)>;

AdaptiveResult adaptive_solve(const ProblemSpec& problem, const AdaptConfig& config,
                              const SolverConfig& solver_config = {}, const ProgressCallback& progress = {});

/// Least-squares slope of log(values) against log(dofs) over the last `window`
/// entries.
double fit_slope(std::span<const double> dofs, std::span<const double> values, int window);

/// Slope of a record field (e.g. eta_h) against DoFs over the last `window` records.
double fit_slope(const std::vector<IterationRecord>& records, const std::function<double(const IterationRecord&)>& field,
                 int window);

}  // namespace morley

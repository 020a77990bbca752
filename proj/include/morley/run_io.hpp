#pragma once

#include "morley/adaptive.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace morley {

/// Everything needed to repeat a run.
struct RunConfig {
    std::string problem = "ex1";
    std::uint64_t seed = 0;
    AdaptConfig adapt;
    SolverConfig solver;
};

class RunFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Column order of convergence.csv. Optional quantities are empty cells.
inline constexpr const char* convergence_header =
    "iter,dofs,eta_h,eta1,eta2,eta3,eta4,eta5,energy_error,l2_error,eff_index,mu_h,lambda_summary,wall_ms";

void write_convergence_csv(std::ostream& out, const std::vector<IterationRecord>& records);

nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const IterationRecord& record);
nlohmann::json run_to_json(const RunConfig& config, const std::vector<IterationRecord>& records);

/// Inverse of run_to_json for the record list; throws RunFormatError on a schema mismatch.
std::vector<IterationRecord> records_from_json(const nlohmann::json& run);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Line plot with logarithmic x axis and, if `log_y`, logarithmic y axis.
void write_svg_plot(std::ostream& out, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<PlotSeries>& series, bool log_y = true);

/// eta_h and energy error against DoFs.
std::vector<PlotSeries> convergence_series(const std::vector<IterationRecord>& records, const std::string& prefix = "");
/// Efficiency index against DoFs (empty when no exact solution exists).
std::vector<PlotSeries> efficiency_series(const std::vector<IterationRecord>& records, const std::string& prefix = "");

struct LabelledRun {
    std::string label;
    std::vector<IterationRecord> records;
};

/// Long-format table: a "run" column followed by the convergence.csv columns.
void write_comparison_csv(std::ostream& out, const std::vector<LabelledRun>& runs);

}  // namespace morley

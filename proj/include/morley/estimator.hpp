#pragma once

#include "morley/problems.hpp"
#include "morley/vi_solver.hpp"

#include <array>
#include <cmath>
#include <iosfwd>
#include <optional>
#include <vector>

namespace morley {

/// Squared residual indicators. Element terms:
///   eta1_T = beta^-1 h_T^4 |y_d + mu - y_h - beta Laplacian(f)|^2_{L2(T)}
///   eta5_T = beta^-1 h_T^2 lambda_T^2
/// Interior-edge terms (zero on boundary edges):
///   eta2_e = beta h_e^-1 |[d_n y_h]|^2,  eta3_e = beta h_e |[d_nn y_h]|^2,
///   eta4_e = beta h_e^3 |[d_n Laplacian(y_h)]|^2.
struct ElementTerms {
    std::vector<double> eta1;
    std::vector<double> eta5;
};

struct EdgeTerms {
    std::vector<double> eta2;
    std::vector<double> eta3;
    std::vector<double> eta4;
};

struct EstimatorBreakdown {
    ElementTerms element_terms;
    EdgeTerms edge_terms;
    /// eta1_T + eta5_T + half of each interior-edge term on the boundary of T.
    std::vector<double> element;
    /// h_T^4 |y_d - mean_T(y_d)|^2_{L2(T)}; reported, not part of eta_h.
    std::vector<double> oscillation;

    std::array<double, 5> totals{};
    double total = 0.0;
    double oscillation_total = 0.0;

    double eta_h() const;
    double eta(int k) const { return std::sqrt(totals[k - 1]); }
};

/// `lambda` holds one multiplier per element (the scalar value repeated for
/// integral control constraints).
ElementTerms eta_interior(const FeSpace& space, const Eigen::VectorXd& y, double mu, const Eigen::VectorXd& lambda,
                          const ProblemSpec& problem);

EdgeTerms eta_edges(const FeSpace& space, const Eigen::VectorXd& y, double beta);

std::vector<double> oscillation(const FeSpace& space, const ScalarField& desired_state);

EstimatorBreakdown estimate(const FeSpace& space, const ViSolution& solution, const ProblemSpec& problem);

/// Per-element multiplier vector of a solution.
Eigen::VectorXd element_multipliers(const ViSolution& solution, Index num_elements);

struct ErrorReport {
    double energy_error = 0.0;
    double l2_error = 0.0;
    double h2_seminorm_error = 0.0;
    std::optional<double> efficiency_index;
};

/// |y* - y_h|_h with |w|_h^2 = beta sum_T |w|^2_{H2(T)} + |w|^2_{L2}, by
/// element-wise degree-8 quadrature.
ErrorReport true_error(const FeSpace& space, const Eigen::VectorXd& y, const SmoothField& exact, double beta);

/// Empty when the problem has no exact solution.
std::optional<ErrorReport> true_error(const FeSpace& space, const Eigen::VectorXd& y, const ProblemSpec& problem,
                                      double eta_h);

/// CSV "element,eta_T2,eta1,eta5,edge_share,oscillation".
void write_indicators(std::ostream& out, const EstimatorBreakdown& breakdown);

}  // namespace morley

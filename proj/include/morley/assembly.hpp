#pragma once

#include "morley/fe_space.hpp"
#include "morley/problems.hpp"

#include <Eigen/Sparse>

#include <iosfwd>

namespace morley {

using SparseMatrix = Eigen::SparseMatrix<double>;
using RowMajorSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// A_h(w, v) = beta sum_T int_T D^2 w : D^2 v + int w v, and the load
/// b(w) = int y_d w - beta int f Laplacian_h(w).
struct LinearSystem {
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
};

SparseMatrix assemble_matrix(const FeSpace& space, double beta);
Eigen::VectorXd assemble_load(const FeSpace& space, const ProblemSpec& problem);
LinearSystem assemble_system(const FeSpace& space, const ProblemSpec& problem);

/// Linear constraints on the coefficient vector, all of the form row(y) >= bound
/// (or lower <= row(y) <= upper for the per-element rows).
struct ConstraintSet {
    bool pointwise = false;

    /// w -> int_Omega w
    Eigen::VectorXd state_row;
    double state_bound = 0.0;

    /// w -> int_Omega -Laplacian_h(w); bound delta1 + int f (integral control only)
    Eigen::VectorXd control_row;
    double control_bound = 0.0;

    /// Row T: w -> int_T -Laplacian(w), bounds int_T (u_a + f) and int_T (u_b + f)
    /// (pointwise control only).
    RowMajorSparse element_rows;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    Eigen::VectorXd areas;

    Index num_elements() const { return static_cast<Index>(areas.size()); }
};

ConstraintSet assemble_constraints(const FeSpace& space, const ProblemSpec& problem);

/// "row col value" per stored entry (0-based), preceded by "rows cols nnz".
void write_coordinate(std::ostream& out, const SparseMatrix& matrix);

}  // namespace morley

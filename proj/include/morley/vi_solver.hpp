#pragma once

#include "morley/assembly.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <vector>

namespace morley {

struct SolverConfig {
    /// Relative residual |A x - b| / |b| required of every SPD solve, unless
    /// the rounding floor 64 eps ||A| |x|| / |b| is larger.
    double linear_tolerance = 1e-12;
    int pdas_max_iterations = 50;
    /// Weight of the primal residual in the active-set switching rule.
    double pdas_c = 1.0;
    /// Relative tolerance for feasibility, multiplier signs and complementarity.
    double complementarity_tolerance = 1e-9;
    /// At most this many pinned rows are handled by a Schur complement on A;
    /// larger active sets use a sparse saddle-point factorisation.
    int schur_row_limit = 32;
    /// Per-iteration PDAS trace (iteration, |lower|, |upper|, stationarity).
    std::ostream* trace = nullptr;
};

class SolverError : public std::runtime_error {
public:
    enum class Kind { factorization, no_convergence, singular_schur, no_candidate, iteration_limit, cycling };

    SolverError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Factorises an SPD matrix once (sparse Cholesky) and reuses it. If the
/// factorisation breaks down, or cannot reach the residual target after
/// iterative refinement, Jacobi-preconditioned CG takes over.
class SpdSolver {
public:
    SpdSolver(const SparseMatrix& matrix, const SolverConfig& config);

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
    Index dimension() const { return static_cast<Index>(matrix_->rows()); }
    const SparseMatrix& matrix() const { return *matrix_; }

private:
    Eigen::VectorXd conjugate_gradient(const Eigen::VectorXd& rhs, const Eigen::VectorXd& guess) const;

    double rounding_floor(const Eigen::VectorXd& x) const;

    const SparseMatrix* matrix_;
    SparseMatrix abs_matrix_;
    SolverConfig config_;
    std::unique_ptr<Eigen::SimplicialLLT<SparseMatrix>> cholesky_;
};

Eigen::VectorXd solve_spd(const SparseMatrix& matrix, const Eigen::VectorXd& rhs, const SolverConfig& config = {});

/// Minimiser of 1/2 x'Ax - b'x subject to rows[k] . x = targets[k]. Returns x
/// and multipliers nu with A x - b = sum_k nu_k rows[k].
struct EqualityQpResult {
    Eigen::VectorXd x;
    Eigen::VectorXd multipliers;
    double schur_condition = 1.0;
};

EqualityQpResult solve_equality_qp(const SpdSolver& solver, const Eigen::VectorXd& b,
                                   const std::vector<Eigen::VectorXd>& rows, const std::vector<double>& targets);
EqualityQpResult solve_equality_qp(const SparseMatrix& matrix, const Eigen::VectorXd& b,
                                   const std::vector<Eigen::VectorXd>& rows, const std::vector<double>& targets,
                                   const SolverConfig& config = {});

enum class BoundState : std::int8_t { inactive = 0, lower = 1, upper = 2 };

/// Discrete optimum with its multipliers. The stationarity condition reads
///   A y - b = mu * state_row + lambda * control_row            (integral control)
///   A y - b = mu * state_row + sum_T lambda_T * element_row_T  (pointwise control)
struct ViSolution {
    Eigen::VectorXd y;
    double mu = 0.0;
    double lambda = 0.0;
    Eigen::VectorXd element_lambda;
    bool active_state = false;
    bool active_control = false;
    std::vector<BoundState> element_state;
    int iterations = 0;
    double schur_condition = 1.0;

    bool pointwise() const { return element_lambda.size() > 0 || !element_state.empty(); }
    /// Largest |lambda| (scalar, or over elements).
    double lambda_magnitude() const;
};

/// Exact enumeration over {}, {state}, {control}, {state, control}.
ViSolution solve_case_i(const SparseMatrix& matrix, const Eigen::VectorXd& b, const ConstraintSet& constraints,
                        const SolverConfig& config = {});

/// Primal-dual active set iteration on the element rows inside an outer
/// enumeration of the state constraint (inactive first, then active).
ViSolution solve_case_ii(const SparseMatrix& matrix, const Eigen::VectorXd& b, const ConstraintSet& constraints,
                         const SolverConfig& config = {});

ViSolution solve_vi(const SparseMatrix& matrix, const Eigen::VectorXd& b, const ConstraintSet& constraints,
                    const SolverConfig& config = {});

/// Normalised certificate quantities; all zero for an exact KKT point.
struct KktReport {
    double stationarity = 0.0;
    double feasibility = 0.0;
    double complementarity = 0.0;
    double sign_violation = 0.0;

    bool certified(double stationarity_tol = 1e-8, double tol = 1e-9) const
    {
        return stationarity <= stationarity_tol && feasibility <= tol && complementarity <= tol &&
               sign_violation <= tol;
    }
};

KktReport kkt_residual(const SparseMatrix& matrix, const Eigen::VectorXd& b, const ConstraintSet& constraints,
                       const ViSolution& solution);

}  // namespace morley

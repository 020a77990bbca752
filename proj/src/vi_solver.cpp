#include "morley/vi_solver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

namespace morley {

namespace {

/// rhs - A x accumulated in long double, so that the residual of an accurate
/// solution is not swamped by rounding in the product.
/// With `rows` given, the columns weighted by `weights` are added to rhs first.
Eigen::VectorXd precise_residual(const SparseMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& rhs,
                                 const Eigen::MatrixXd* rows = nullptr, const Eigen::VectorXd* weights = nullptr)
{
    std::vector<long double> r(static_cast<std::size_t>(rhs.size()));
    for (Eigen::Index i = 0; i < rhs.size(); ++i) {
        r[i] = rhs[i];
    }
    if (rows != nullptr) {
        for (Eigen::Index j = 0; j < rows->cols(); ++j) {
            const long double w = (*weights)[j];
            for (Eigen::Index i = 0; i < rhs.size(); ++i) {
                r[i] += static_cast<long double>((*rows)(i, j)) * w;
            }
        }
    }
    for (Eigen::Index c = 0; c < a.outerSize(); ++c) {
        const long double xc = x[c];
        for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
            r[it.row()] -= static_cast<long double>(it.value()) * xc;
        }
    }
    Eigen::VectorXd out(rhs.size());
    for (Eigen::Index i = 0; i < rhs.size(); ++i) {
        out[i] = static_cast<double>(r[i]);
    }
    return out;
}

double relative_residual(const SparseMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& rhs)
{
    const double scale = rhs.norm();
    return precise_residual(a, x, rhs).norm() / (scale > 0.0 ? scale : 1.0);
}

long double precise_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    long double s = 0.0L;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        s += static_cast<long double>(a[i]) * b[i];
    }
    return s;
}

/// Constraint row as a sparse list of (column, value).
struct SparseRow {
    std::vector<std::pair<Index, double>> entries;

    double dot(const Eigen::VectorXd& x) const
    {
        double s = 0.0;
        for (const auto& [j, v] : entries) {
            s += v * x[j];
        }
        return s;
    }
    double abs_dot(const Eigen::VectorXd& x) const
    {
        double s = 0.0;
        for (const auto& [j, v] : entries) {
            s += std::abs(v * x[j]);
        }
        return s;
    }
    Eigen::VectorXd dense(Index n) const
    {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
        for (const auto& [j, v] : entries) {
            out[j] = v;
        }
        return out;
    }
};

SparseRow sparse_row(const Eigen::VectorXd& v)
{
    SparseRow r;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
        if (v[j] != 0.0) {
            r.entries.emplace_back(static_cast<Index>(j), v[j]);
        }
    }
    return r;
}

SparseRow sparse_row(const RowMajorSparse& m, Index t)
{
    SparseRow r;
    for (RowMajorSparse::InnerIterator it(m, t); it; ++it) {
        r.entries.emplace_back(static_cast<Index>(it.col()), it.value());
    }
    return r;
}

EqualityQpResult solve_saddle(const SparseMatrix& a, const Eigen::VectorXd& b, const std::vector<SparseRow>& rows,
                              const std::vector<double>& targets)
{
    const Index n = static_cast<Index>(a.rows());
    const Index k = static_cast<Index>(rows.size());
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(a.nonZeros()) + 2 * rows.size() * 4);
    for (Eigen::Index c = 0; c < a.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
            triplets.emplace_back(it.row(), it.col(), it.value());
        }
    }
    for (Index r = 0; r < k; ++r) {
        for (const auto& [j, v] : rows[r].entries) {
            triplets.emplace_back(n + r, j, v);
            triplets.emplace_back(j, n + r, v);
        }
    }
    SparseMatrix kkt(n + k, n + k);
    kkt.setFromTriplets(triplets.begin(), triplets.end());
    kkt.makeCompressed();

    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(kkt);
    lu.factorize(kkt);
    if (lu.info() != Eigen::Success) {
        throw SolverError(SolverError::Kind::factorization, "saddle-point factorisation failed: " + lu.lastErrorMessage());
    }
    Eigen::VectorXd rhs(n + k);
    rhs.head(n) = b;
    for (Index r = 0; r < k; ++r) {
        rhs[n + r] = targets[r];
    }
    Eigen::VectorXd sol = lu.solve(rhs);
    double res = relative_residual(kkt, sol, rhs);
    for (int step = 0; step < 4 && res > 0.0; ++step) {
        const Eigen::VectorXd corrected = sol + lu.solve(precise_residual(kkt, sol, rhs));
        const double next = relative_residual(kkt, corrected, rhs);
        if (!(next < res)) {
            break;
        }
        sol = corrected;
        res = next;
    }
    if (!sol.allFinite()) {
        throw SolverError(SolverError::Kind::factorization, "saddle-point solve produced non-finite values");
    }
    EqualityQpResult out;
    out.x = sol.head(n);
    out.multipliers = -sol.tail(k);
    out.schur_condition = 0.0;
    return out;
}

EqualityQpResult solve_pinned(const SpdSolver& solver, const Eigen::VectorXd& b, const std::vector<SparseRow>& rows,
                              const std::vector<double>& targets, const SolverConfig& config)
{
    if (static_cast<int>(rows.size()) > config.schur_row_limit) {
        return solve_saddle(solver.matrix(), b, rows, targets);
    }
    std::vector<Eigen::VectorXd> dense;
    dense.reserve(rows.size());
    for (const auto& r : rows) {
        dense.push_back(r.dense(solver.dimension()));
    }
    return solve_equality_qp(solver, b, dense, targets);
}

double multiplier_tolerance(const Eigen::VectorXd& b, const SparseRow& row, double tol)
{
    double row_max = 0.0;
    for (const auto& e : row.entries) {
        row_max = std::max(row_max, std::abs(e.second));
    }
    const double b_max = b.cwiseAbs().maxCoeff();
    return tol * std::max(1.0, row_max > 0.0 ? b_max / row_max : 0.0);
}

double slack_tolerance(const SparseRow& row, const Eigen::VectorXd& x, double bound, double tol)
{
    return tol * std::max({1.0, std::abs(bound), row.abs_dot(x)});
}

}  // namespace

SpdSolver::SpdSolver(const SparseMatrix& matrix, const SolverConfig& config)
    : matrix_(&matrix), abs_matrix_(matrix.cwiseAbs()), config_(config),
      cholesky_(std::make_unique<Eigen::SimplicialLLT<SparseMatrix>>())
{
    if (matrix.rows() != matrix.cols()) {
        throw SolverError(SolverError::Kind::factorization, "matrix is not square");
    }
    cholesky_->compute(matrix);
    if (cholesky_->info() != Eigen::Success) {
        cholesky_.reset();
    }
}

// Residual norm below which rounding in forming A x dominates: a solution this
// close is as accurate as the matrix allows, whatever the target.
double SpdSolver::rounding_floor(const Eigen::VectorXd& x) const
{
    return 64.0 * std::numeric_limits<double>::epsilon() * (abs_matrix_ * x.cwiseAbs()).norm();
}

Eigen::VectorXd SpdSolver::conjugate_gradient(const Eigen::VectorXd& rhs, const Eigen::VectorXd& guess) const
{
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(config_.linear_tolerance);
    cg.setMaxIterations(10 * matrix_->rows());
    cg.compute(*matrix_);
    Eigen::VectorXd x = cg.solveWithGuess(rhs, guess);
    const double res = relative_residual(*matrix_, x, rhs);
    if (cg.info() != Eigen::Success && res > std::max(config_.linear_tolerance, rounding_floor(x) / rhs.norm())) {
        throw SolverError(SolverError::Kind::no_convergence,
                          "conjugate gradients stalled at relative residual " +
                              std::to_string(res));
    }
    return x;
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& rhs) const
{
    if (rhs.size() != matrix_->rows()) {
        throw SolverError(SolverError::Kind::factorization, "right-hand side has the wrong length");
    }
    if (rhs.squaredNorm() == 0.0) {
        return Eigen::VectorXd::Zero(rhs.size());
    }
    Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
    if (cholesky_) {
        x = cholesky_->solve(rhs);
        double res = relative_residual(*matrix_, x, rhs);
        for (int step = 0; step < 3 && res > config_.linear_tolerance; ++step) {
            const Eigen::VectorXd corrected = x + cholesky_->solve(precise_residual(*matrix_, x, rhs));
            const double next = relative_residual(*matrix_, corrected, rhs);
            if (!(next < res)) {
                break;
            }
            x = corrected;
            res = next;
        }
        const double floor = x.allFinite() ? rounding_floor(x) / rhs.norm() : 0.0;
        if (x.allFinite() && res <= std::max(config_.linear_tolerance, floor)) {
            return x;
        }
        if (!x.allFinite()) {
            x.setZero();
        }
    }
    return conjugate_gradient(rhs, x);
}

Eigen::VectorXd solve_spd(const SparseMatrix& matrix, const Eigen::VectorXd& rhs, const SolverConfig& config)
{
    return SpdSolver(matrix, config).solve(rhs);
}

EqualityQpResult solve_equality_qp(const SpdSolver& solver, const Eigen::VectorXd& b,
                                   const std::vector<Eigen::VectorXd>& rows, const std::vector<double>& targets)
{
    if (rows.size() != targets.size()) {
        throw SolverError(SolverError::Kind::singular_schur, "constraint rows and targets differ in number");
    }
    EqualityQpResult out;
    out.x = solver.solve(b);
    const auto k = static_cast<Eigen::Index>(rows.size());
    out.multipliers = Eigen::VectorXd::Zero(k);
    if (k == 0) {
        return out;
    }
    const Eigen::Index n = solver.dimension();
    Eigen::MatrixXd m(n, k);
    Eigen::MatrixXd z(n, k);
    Eigen::VectorXd gap(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        m.col(j) = rows[j];
        z.col(j) = solver.solve(rows[j]);
        gap[j] = targets[j] - rows[j].dot(out.x);
    }
    Eigen::MatrixXd schur = m.transpose() * z;
    schur = 0.5 * (schur + schur.transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(schur, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(hi > 0.0) || !(lo > 1e-14 * hi)) {
        throw SolverError(SolverError::Kind::singular_schur, "Schur complement of the active rows is singular");
    }
    out.schur_condition = hi / lo;
    const auto schur_ldlt = schur.ldlt();
    out.multipliers = schur_ldlt.solve(gap);
    out.x += z * out.multipliers;

    // refinement on the whole system A x - M nu = b, M' x = targets with
    // residuals in extended precision
    auto residual_norm = [&](const Eigen::VectorXd& r, const Eigen::VectorXd& g) {
        return r.cwiseAbs().maxCoeff() + g.cwiseAbs().maxCoeff();
    };
    auto residuals = [&](const EqualityQpResult& s, Eigen::VectorXd& r, Eigen::VectorXd& g) {
        r = precise_residual(solver.matrix(), s.x, b, &m, &s.multipliers);
        g.resize(k);
        for (Eigen::Index j = 0; j < k; ++j) {
            g[j] = static_cast<double>(targets[j] - precise_dot(rows[j], s.x));
        }
    };
    Eigen::VectorXd r;
    Eigen::VectorXd g;
    residuals(out, r, g);
    double current = residual_norm(r, g);
    for (int step = 0; step < 2 && current > 0.0; ++step) {
        const Eigen::VectorXd dx0 = solver.solve(r);
        const Eigen::VectorXd dnu = schur_ldlt.solve(Eigen::VectorXd(g - m.transpose() * dx0));
        EqualityQpResult next = out;
        next.x += dx0 + z * dnu;
        next.multipliers += dnu;
        Eigen::VectorXd nr;
        Eigen::VectorXd ng;
        residuals(next, nr, ng);
        const double value = residual_norm(nr, ng);
        if (!(value < current)) {
            break;
        }
        out = std::move(next);
        r = std::move(nr);
        g = std::move(ng);
        current = value;
    }
    return out;
}

EqualityQpResult solve_equality_qp(const SparseMatrix& matrix, const Eigen::VectorXd& b,
                                   const std::vector<Eigen::VectorXd>& rows, const std::vector<double>& targets,
                                   const SolverConfig& config)
{
    const SpdSolver solver(matrix, config);
    return solve_equality_qp(solver, b, rows, targets);
}

double ViSolution::lambda_magnitude() const
{
    if (element_lambda.size() > 0) {
        return element_lambda.cwiseAbs().maxCoeff();
    }
    return std::abs(lambda);
}

ViSolution solve_case_i(const SparseMatrix& matrix, const Eigen::VectorXd& b, const ConstraintSet& constraints,
                        const SolverConfig& config)
{
    if (constraints.pointwise) {
        throw SolverError(SolverError::Kind::no_candidate, "integral-control solver given pointwise constraints");
    }
    const SpdSolver solver(matrix, config);
    const SparseRow state = sparse_row(constraints.state_row);
    const SparseRow control = sparse_row(constraints.control_row);
    const double tol = config.complementarity_tolerance;

    const std::pair<bool, bool> candidates[] = {{false, false}, {true, false}, {false, true}, {true, true}};
    int tried = 0;
    for (const auto& [use_state, use_control] : candidates) {
        ++tried;
        std::vector<SparseRow> rows;
        std::vector<double> targets;
        if (use_state) {
            rows.push_back(state);
            targets.push_back(constraints.state_bound);
        }
        if (use_control) {
            rows.push_back(control);
            targets.push_back(constraints.control_bound);
        }
        EqualityQpResult qp;
        try {
            qp = solve_pinned(solver, b, rows, targets, config);
        } catch (const SolverError& e) {
            if (e.kind() == SolverError::Kind::singular_schur) {
                continue;
            }
            throw;
        }
        double mu = use_state ? qp.multipliers[0] : 0.0;
        double lambda = use_control ? qp.multipliers[use_state ? 1 : 0] : 0.0;

        bool ok = true;
        if (!use_state) {
            ok = ok && state.dot(qp.x) >= constraints.state_bound -
                                               slack_tolerance(state, qp.x, constraints.state_bound, tol);
        } else {
            ok = ok && mu >= -multiplier_tolerance(b, state, tol);
        }
        if (!use_control) {
            ok = ok && control.dot(qp.x) >= constraints.control_bound -
                                                 slack_tolerance(control, qp.x, constraints.control_bound, tol);
        } else {
            ok = ok && lambda >= -multiplier_tolerance(b, control, tol);
        }
        if (!ok) {
            continue;
        }
        ViSolution sol;
        sol.y = std::move(qp.x);
        sol.mu = std::max(mu, 0.0);
        sol.lambda = std::max(lambda, 0.0);
        sol.active_state = use_state;
        sol.active_control = use_control;
        sol.iterations = tried;
        sol.schur_condition = qp.schur_condition;
        return sol;
    }
    throw SolverError(SolverError::Kind::no_candidate, "no active set satisfies the optimality conditions");
}

ViSolution solve_case_ii(const SparseMatrix& matrix, const Eigen::VectorXd& b, const ConstraintSet& constraints,
                         const SolverConfig& config)
{
    if (!constraints.pointwise) {
        throw SolverError(SolverError::Kind::no_candidate, "pointwise-control solver given integral constraints");
    }
    const SpdSolver solver(matrix, config);
    const Index nt = constraints.num_elements();
    const SparseRow state = sparse_row(constraints.state_row);
    std::vector<SparseRow> element(nt);
    for (Index t = 0; t < nt; ++t) {
        element[t] = sparse_row(constraints.element_rows, t);
    }
    const double tol = config.complementarity_tolerance;
    const double c = config.pdas_c;

    for (const bool use_state : {false, true}) {
        std::vector<BoundState> sets(nt, BoundState::inactive);
        std::set<std::vector<BoundState>> history;
        EqualityQpResult qp;
        Eigen::VectorXd lambda = Eigen::VectorXd::Zero(nt);
        double mu = 0.0;
        int iteration = 0;
        bool converged = false;
        // iteration 0 solves with no element row pinned; unless that is already
        // optimal it seeds the sets
        while (!converged) {
            if (iteration > config.pdas_max_iterations) {
                throw SolverError(SolverError::Kind::iteration_limit,
                                  "active-set iteration exceeded " + std::to_string(config.pdas_max_iterations) +
                                      " steps");
            }
            std::vector<SparseRow> rows;
            std::vector<double> targets;
            std::vector<Index> pinned;
            if (use_state) {
                rows.push_back(state);
                targets.push_back(constraints.state_bound);
            }
            for (Index t = 0; t < nt; ++t) {
                if (sets[t] != BoundState::inactive) {
                    rows.push_back(element[t]);
                    targets.push_back(sets[t] == BoundState::lower ? constraints.lower[t] : constraints.upper[t]);
                    pinned.push_back(t);
                }
            }
            qp = solve_pinned(solver, b, rows, targets, config);
            const int offset = use_state ? 1 : 0;
            mu = use_state ? qp.multipliers[0] : 0.0;
            lambda.setZero();
            for (std::size_t k = 0; k < pinned.size(); ++k) {
                lambda[pinned[k]] = qp.multipliers[offset + static_cast<Eigen::Index>(k)];
            }

            std::vector<BoundState> next(nt, BoundState::inactive);
            int n_lower = 0;
            int n_upper = 0;
            for (Index t = 0; t < nt; ++t) {
                const double r = element[t].dot(qp.x);
                const double area = constraints.areas[t];
                if (lambda[t] + c * (constraints.lower[t] - r) / area > 0.0) {
                    next[t] = BoundState::lower;
                    ++n_lower;
                } else if (lambda[t] + c * (constraints.upper[t] - r) / area < 0.0) {
                    next[t] = BoundState::upper;
                    ++n_upper;
                }
            }
            if (config.trace != nullptr) {
                const Eigen::VectorXd r = matrix * qp.x - b - mu * constraints.state_row -
                                          constraints.element_rows.transpose() * lambda;
                const double b_max = b.cwiseAbs().maxCoeff();
                *config.trace << "pdas state=" << (use_state ? 1 : 0) << " iter=" << iteration
                              << " lower=" << n_lower << " upper=" << n_upper
                              << " stationarity=" << r.cwiseAbs().maxCoeff() / (b_max > 0.0 ? b_max : 1.0) << '\n';
            }
            if (next == sets) {
                converged = true;
                break;
            }
            history.insert(sets);
            if (history.contains(next)) {
                throw SolverError(SolverError::Kind::cycling, "active-set iteration revisited a previous set");
            }
            sets = std::move(next);
            ++iteration;
        }

        const bool feasible = use_state ? mu >= -multiplier_tolerance(b, state, tol)
                                        : state.dot(qp.x) >= constraints.state_bound -
                                                                 slack_tolerance(state, qp.x, constraints.state_bound, tol);
        if (!feasible) {
            continue;
        }
        ViSolution sol;
        sol.y = std::move(qp.x);
        sol.mu = std::max(mu, 0.0);
        sol.active_state = use_state;
        sol.element_lambda = lambda;
        sol.element_state = std::move(sets);
        sol.active_control = std::any_of(sol.element_state.begin(), sol.element_state.end(),
                                         [](BoundState s) { return s != BoundState::inactive; });
        sol.iterations = iteration;
        sol.schur_condition = qp.schur_condition;
        return sol;
    }
    throw SolverError(SolverError::Kind::no_candidate, "no state-constraint branch satisfies the optimality conditions");
}

ViSolution solve_vi(const SparseMatrix& matrix, const Eigen::VectorXd& b, const ConstraintSet& constraints,
                    const SolverConfig& config)
{
    return constraints.pointwise ? solve_case_ii(matrix, b, constraints, config)
                                 : solve_case_i(matrix, b, constraints, config);
}

KktReport kkt_residual(const SparseMatrix& matrix, const Eigen::VectorXd& b, const ConstraintSet& constraints,
                       const ViSolution& solution)
{
    const Eigen::VectorXd& y = solution.y;
    // b + mu s + sum lambda_k r_k - A y, accumulated in extended precision
    Eigen::MatrixXd rows(b.size(), 1);
    Eigen::VectorXd weights(1);
    rows.col(0) = constraints.state_row;
    weights[0] = solution.mu;
    Eigen::VectorXd rhs = b;
    if (constraints.pointwise) {
        if (solution.element_lambda.size() > 0) {
            rhs += constraints.element_rows.transpose() * solution.element_lambda;
        }
    } else {
        rows.conservativeResize(Eigen::NoChange, 2);
        rows.col(1) = constraints.control_row;
        weights.conservativeResize(2);
        weights[1] = solution.lambda;
    }
    const Eigen::VectorXd r = precise_residual(matrix, y, rhs, &rows, &weights);
    const double b_max = b.size() > 0 ? b.cwiseAbs().maxCoeff() : 0.0;
    KktReport k;
    k.stationarity = (r.size() > 0 ? r.cwiseAbs().maxCoeff() : 0.0) / (b_max > 0.0 ? b_max : 1.0);

    auto account = [&k](double value, double bound, double multiplier, double slack) {
        const double scale = std::max(1.0, std::abs(bound));
        k.feasibility = std::max(k.feasibility, std::max(0.0, bound - value) / scale);
        k.complementarity =
            std::max(k.complementarity, std::abs(multiplier) * std::abs(slack) / (scale * std::max(1.0, std::abs(multiplier))));
    };

    const double state_value = constraints.state_row.dot(y);
    account(state_value, constraints.state_bound, solution.mu, state_value - constraints.state_bound);
    k.sign_violation = std::max(k.sign_violation, -solution.mu);

    if (!constraints.pointwise) {
        const double control_value = constraints.control_row.dot(y);
        account(control_value, constraints.control_bound, solution.lambda, control_value - constraints.control_bound);
        k.sign_violation = std::max(k.sign_violation, -solution.lambda);
        return k;
    }

    const Eigen::VectorXd values = constraints.element_rows * y;
    for (Index t = 0; t < constraints.num_elements(); ++t) {
        const double v = values[t];
        const double lo = constraints.lower[t];
        const double hi = constraints.upper[t];
        const double lam = solution.element_lambda.size() > 0 ? solution.element_lambda[t] : 0.0;
        const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
        k.feasibility = std::max({k.feasibility, std::max(0.0, lo - v) / scale, std::max(0.0, v - hi) / scale});
        // positive multipliers belong to the lower bound, negative ones to the upper bound
        const double slack = lam > 0.0 ? v - lo : (lam < 0.0 ? hi - v : 0.0);
        k.complementarity =
            std::max(k.complementarity, std::abs(lam) * std::abs(slack) / (scale * std::max(1.0, std::abs(lam))));
        if (!solution.element_state.empty()) {
            const BoundState s = solution.element_state[t];
            const double wrong = s == BoundState::lower ? -lam : (s == BoundState::upper ? lam : std::abs(lam));
            k.sign_violation = std::max(k.sign_violation, wrong);
        }
    }
    return k;
}

}  // namespace morley

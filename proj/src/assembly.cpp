#include "morley/assembly.hpp"

#include "morley/quadrature.hpp"

#include <iomanip>
#include <ostream>

namespace morley {

namespace {

double integrate(const FeSpace& space, Index t, const ScalarField& field, int degree)
{
    const auto& rule = triangle_rule(degree);
    const auto& g = space.geometry(t);
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        sum += rule.weights[q] * field(g.point(rule.points[q]));
    }
    return sum * g.area;
}

}  // namespace

SparseMatrix assemble_matrix(const FeSpace& space, double beta)
{
    const Index nt = space.mesh().num_elements();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(nt) * 49);

    const auto& stiff_rule = triangle_rule(4);
    const auto& mass_rule = triangle_rule(6);
    for (Index t = 0; t < nt; ++t) {
        const auto& basis = space.basis(t);
        const double area = space.geometry(t).area;
        LocalMatrix local = LocalMatrix::Zero();
        for (std::size_t q = 0; q < stiff_rule.size(); ++q) {
            const auto shape = basis.evaluate(stiff_rule.points[q]);
            const double w = beta * stiff_rule.weights[q] * area;
            for (int i = 0; i < local_dofs; ++i) {
                for (int j = i; j < local_dofs; ++j) {
                    local(i, j) += w * shape.hessians[i].cwiseProduct(shape.hessians[j]).sum();
                }
            }
        }
        for (std::size_t q = 0; q < mass_rule.size(); ++q) {
            const auto shape = basis.evaluate(mass_rule.points[q]);
            const double w = mass_rule.weights[q] * area;
            for (int i = 0; i < local_dofs; ++i) {
                for (int j = i; j < local_dofs; ++j) {
                    local(i, j) += w * shape.values[i] * shape.values[j];
                }
            }
        }
        const auto& ids = space.element_dofs(t);
        for (int i = 0; i < local_dofs; ++i) {
            if (ids[i] == invalid_index) {
                continue;
            }
            for (int j = 0; j < local_dofs; ++j) {
                if (ids[j] == invalid_index) {
                    continue;
                }
                triplets.emplace_back(ids[i], ids[j], i <= j ? local(i, j) : local(j, i));
            }
        }
    }
    SparseMatrix a(space.num_dofs(), space.num_dofs());
    a.setFromTriplets(triplets.begin(), triplets.end());
    return a;
}

Eigen::VectorXd assemble_load(const FeSpace& space, const ProblemSpec& problem)
{
    Eigen::VectorXd b = Eigen::VectorXd::Zero(space.num_dofs());
    const auto& rule = triangle_rule(6);
    for (Index t = 0; t < space.mesh().num_elements(); ++t) {
        const auto& g = space.geometry(t);
        const auto& basis = space.basis(t);
        std::array<double, 7> local{};
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point2 x = g.point(rule.points[q]);
            const double yd = problem.desired_state(x);
            const double f = problem.source(x);
            const auto shape = basis.evaluate(rule.points[q]);
            const double w = rule.weights[q] * g.area;
            for (int i = 0; i < local_dofs; ++i) {
                local[i] += w * (yd * shape.values[i] - problem.beta * f * shape.hessians[i].trace());
            }
        }
        const auto& ids = space.element_dofs(t);
        for (int i = 0; i < local_dofs; ++i) {
            if (ids[i] != invalid_index) {
                b[ids[i]] += local[i];
            }
        }
    }
    return b;
}

LinearSystem assemble_system(const FeSpace& space, const ProblemSpec& problem)
{
    return {assemble_matrix(space, problem.beta), assemble_load(space, problem)};
}

ConstraintSet assemble_constraints(const FeSpace& space, const ProblemSpec& problem)
{
    problem.validate();
    const Index n = space.num_dofs();
    const Index nt = space.mesh().num_elements();
    const auto& dofs = space.dofs();

    ConstraintSet c;
    c.pointwise = problem.pointwise.has_value();
    c.areas.resize(nt);

    // element means are the bubble DOFs, so int w = sum_T |T| w_bubble(T)
    c.state_row = Eigen::VectorXd::Zero(n);
    for (Index t = 0; t < nt; ++t) {
        c.areas[t] = space.geometry(t).area;
        c.state_row[dofs.bubble_dof(t)] = c.areas[t];
    }

    // int_T -Laplacian(w) depends only on the three edge DOFs of T
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(nt) * 3);
    c.control_row = Eigen::VectorXd::Zero(n);
    for (Index t = 0; t < nt; ++t) {
        const auto& ids = space.element_dofs(t);
        const auto& lap = space.basis(t).laplacian_integrals();
        for (int i = 0; i < local_dofs; ++i) {
            if (ids[i] != invalid_index && lap[i] != 0.0) {
                triplets.emplace_back(t, ids[i], -lap[i]);
                c.control_row[ids[i]] -= lap[i];
            }
        }
    }

    if (problem.integral) {
        c.state_bound = problem.integral->delta2;
        double source_integral = 0.0;
        for (Index t = 0; t < nt; ++t) {
            source_integral += integrate(space, t, problem.source, 10);
        }
        c.control_bound = problem.integral->delta1 + source_integral;
    } else {
        c.state_bound = problem.pointwise->delta3;
        c.element_rows.resize(nt, n);
        c.element_rows.setFromTriplets(triplets.begin(), triplets.end());
        c.lower.resize(nt);
        c.upper.resize(nt);
        const auto& lower = problem.pointwise->lower;
        const auto& upper = problem.pointwise->upper;
        const auto& source = problem.source;
        for (Index t = 0; t < nt; ++t) {
            c.lower[t] = integrate(space, t, [&](Point2 x) { return lower(x) + source(x); }, 10);
            c.upper[t] = integrate(space, t, [&](Point2 x) { return upper(x) + source(x); }, 10);
        }
        c.control_row.resize(0);
    }
    return c;
}

void write_coordinate(std::ostream& out, const SparseMatrix& matrix)
{
    out << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << '\n';
    out << std::setprecision(17);
    for (Eigen::Index k = 0; k < matrix.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(matrix, k); it; ++it) {
            out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
        }
    }
}

}  // namespace morley

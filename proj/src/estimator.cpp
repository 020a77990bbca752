#include "morley/estimator.hpp"

#include "morley/number_format.hpp"
#include "morley/quadrature.hpp"

#include <cmath>
#include <ostream>

namespace morley {

namespace {

Bary barycentric(const ElementGeometry& g, Point2 x)
{
    const Point2 c = (1.0 / 3.0) * (g.vertices[0] + g.vertices[1] + g.vertices[2]);
    const Point2 d = x - c;
    return {1.0 / 3.0 + dot(g.barycentric_gradients[0], d), 1.0 / 3.0 + dot(g.barycentric_gradients[1], d),
            1.0 / 3.0 + dot(g.barycentric_gradients[2], d)};
}

}  // namespace

double EstimatorBreakdown::eta_h() const { return std::sqrt(total); }

Eigen::VectorXd element_multipliers(const ViSolution& solution, Index num_elements)
{
    if (solution.element_lambda.size() == num_elements) {
        return solution.element_lambda;
    }
    return Eigen::VectorXd::Constant(num_elements, solution.lambda);
}

ElementTerms eta_interior(const FeSpace& space, const Eigen::VectorXd& y, double mu, const Eigen::VectorXd& lambda,
                          const ProblemSpec& problem)
{
    const Index nt = space.mesh().num_elements();
    const auto& rule = triangle_rule(8);
    const double beta = problem.beta;
    ElementTerms out;
    out.eta1.assign(nt, 0.0);
    out.eta5.assign(nt, 0.0);
    for (Index t = 0; t < nt; ++t) {
        const auto& g = space.geometry(t);
        double sum = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point2 x = g.point(rule.points[q]);
            const double r = problem.desired_state(x) + mu - space.evaluate(y, t, rule.points[q]).value -
                             beta * problem.source_laplacian(x);
            sum += rule.weights[q] * r * r;
        }
        const double h2 = g.diameter * g.diameter;
        out.eta1[t] = h2 * h2 * sum * g.area / beta;
        out.eta5[t] = h2 * lambda[t] * lambda[t] / beta;
    }
    return out;
}

EdgeTerms eta_edges(const FeSpace& space, const Eigen::VectorXd& y, double beta)
{
    const Mesh& mesh = space.mesh();
    const Index ne = mesh.num_edges();
    const auto& rule = edge_rule(5);
    EdgeTerms out;
    out.eta2.assign(ne, 0.0);
    out.eta3.assign(ne, 0.0);
    out.eta4.assign(ne, 0.0);
    for (Index e = 0; e < ne; ++e) {
        if (mesh.edge(e).boundary) {
            continue;
        }
        const EdgeFrame f = edge_jump_frame(mesh, e);
        const Vec2 n = to_vec(f.normal);
        const auto& gp = space.geometry(f.plus);
        const auto& gm = space.geometry(f.minus);
        double j1 = 0.0;
        double j2 = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double s = rule.points[q][0];
            const Point2 x = (1.0 - s) * f.endpoints[0] + s * f.endpoints[1];
            const PointValue vp = space.evaluate(y, f.plus, barycentric(gp, x));
            const PointValue vm = space.evaluate(y, f.minus, barycentric(gm, x));
            const double dn = n.dot(vp.gradient - vm.gradient);
            const double dnn = n.dot((vp.hessian - vm.hessian) * n);
            j1 += rule.weights[q] * dn * dn;
            j2 += rule.weights[q] * dnn * dnn;
        }
        const double h = f.length;
        const double d3 = n.dot(space.laplacian_gradient(y, f.plus) - space.laplacian_gradient(y, f.minus));
        // rule weights sum to one, so each integral carries a factor h
        out.eta2[e] = beta * j1;
        out.eta3[e] = beta * h * h * j2;
        out.eta4[e] = beta * h * h * h * h * d3 * d3;
    }
    return out;
}

std::vector<double> oscillation(const FeSpace& space, const ScalarField& desired_state)
{
    const Index nt = space.mesh().num_elements();
    const auto& rule = triangle_rule(8);
    std::vector<double> out(nt, 0.0);
    std::vector<double> values(rule.size());
    for (Index t = 0; t < nt; ++t) {
        const auto& g = space.geometry(t);
        double mean = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            values[q] = desired_state(g.point(rule.points[q]));
            mean += rule.weights[q] * values[q];
        }
        double sum = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            sum += rule.weights[q] * (values[q] - mean) * (values[q] - mean);
        }
        const double h2 = g.diameter * g.diameter;
        out[t] = h2 * h2 * sum * g.area;
    }
    return out;
}

EstimatorBreakdown estimate(const FeSpace& space, const ViSolution& solution, const ProblemSpec& problem)
{
    const Mesh& mesh = space.mesh();
    const Index nt = mesh.num_elements();
    EstimatorBreakdown b;
    b.element_terms =
        eta_interior(space, solution.y, solution.mu, element_multipliers(solution, nt), problem);
    b.edge_terms = eta_edges(space, solution.y, problem.beta);
    b.oscillation = oscillation(space, problem.desired_state);

    b.element.assign(nt, 0.0);
    for (Index t = 0; t < nt; ++t) {
        double share = 0.0;
        for (Index e : mesh.element_edges(t)) {
            share += b.edge_terms.eta2[e] + b.edge_terms.eta3[e] + b.edge_terms.eta4[e];
        }
        b.element[t] = b.element_terms.eta1[t] + b.element_terms.eta5[t] + 0.5 * share;
        b.totals[0] += b.element_terms.eta1[t];
        b.totals[4] += b.element_terms.eta5[t];
        b.oscillation_total += b.oscillation[t];
    }
    for (Index e = 0; e < mesh.num_edges(); ++e) {
        b.totals[1] += b.edge_terms.eta2[e];
        b.totals[2] += b.edge_terms.eta3[e];
        b.totals[3] += b.edge_terms.eta4[e];
    }
    b.total = b.totals[0] + b.totals[1] + b.totals[2] + b.totals[3] + b.totals[4];
    return b;
}

ErrorReport true_error(const FeSpace& space, const Eigen::VectorXd& y, const SmoothField& exact, double beta)
{
    const auto& rule = triangle_rule(8);
    double l2 = 0.0;
    double h2 = 0.0;
    for (Index t = 0; t < space.mesh().num_elements(); ++t) {
        const auto& g = space.geometry(t);
        double el = 0.0;
        double eh = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point2 x = g.point(rule.points[q]);
            const PointValue v = space.evaluate(y, t, rule.points[q]);
            const double d = exact.value(x) - v.value;
            el += rule.weights[q] * d * d;
            eh += rule.weights[q] * (exact.hessian(x) - v.hessian).squaredNorm();
        }
        l2 += el * g.area;
        h2 += eh * g.area;
    }
    ErrorReport r;
    r.l2_error = std::sqrt(l2);
    r.h2_seminorm_error = std::sqrt(h2);
    r.energy_error = std::sqrt(beta * h2 + l2);
    return r;
}

std::optional<ErrorReport> true_error(const FeSpace& space, const Eigen::VectorXd& y, const ProblemSpec& problem,
                                      double eta_h)
{
    if (!problem.exact) {
        return std::nullopt;
    }
    ErrorReport r = true_error(space, y, problem.exact->state, problem.beta);
    if (r.energy_error > 0.0) {
        r.efficiency_index = eta_h / r.energy_error;
    }
    return r;
}

void write_indicators(std::ostream& out, const EstimatorBreakdown& breakdown)
{
    out << "element,eta_T2,eta1,eta5,edge_share,oscillation\n";
    for (std::size_t t = 0; t < breakdown.element.size(); ++t) {
        const double e1 = breakdown.element_terms.eta1[t];
        const double e5 = breakdown.element_terms.eta5[t];
        out << t << ',' << format_number(breakdown.element[t]) << ',' << format_number(e1) << ','
            << format_number(e5) << ',' << format_number(breakdown.element[t] - e1 - e5) << ','
            << format_number(breakdown.oscillation[t]) << '\n';
    }
}

}  // namespace morley

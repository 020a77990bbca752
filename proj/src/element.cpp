#include "morley/element.hpp"

#include "morley/quadrature.hpp"

#include <Eigen/LU>

#include <cmath>
#include <stdexcept>

namespace morley {

namespace {

// Monomials in barycentric coordinates: l0, l1, l2, l1 l2, l2 l0, l0 l1, 60 l0 l1 l2.
struct RawBasis {
    std::array<double, 7> values{};
    std::array<Vec2, 7> gradients;
    std::array<Mat2, 7> hessians;
};

Mat2 sym_outer(const Vec2& a, const Vec2& b) { return a * b.transpose() + b * a.transpose(); }

RawBasis raw_basis(const std::array<Vec2, 3>& g, const Bary& l)
{
    RawBasis r;
    for (int i = 0; i < 3; ++i) {
        r.values[i] = l[i];
        r.gradients[i] = g[i];
        r.hessians[i] = Mat2::Zero();
    }
    for (int j = 0; j < 3; ++j) {
        const int a = (j + 1) % 3;
        const int b = (j + 2) % 3;
        r.values[3 + j] = l[a] * l[b];
        r.gradients[3 + j] = l[b] * g[a] + l[a] * g[b];
        r.hessians[3 + j] = sym_outer(g[a], g[b]);
    }
    r.values[6] = 60.0 * l[0] * l[1] * l[2];
    r.gradients[6] = 60.0 * (l[1] * l[2] * g[0] + l[0] * l[2] * g[1] + l[0] * l[1] * g[2]);
    r.hessians[6] = 60.0 * (l[2] * sym_outer(g[0], g[1]) + l[1] * sym_outer(g[0], g[2]) +
                            l[0] * sym_outer(g[1], g[2]));
    return r;
}

std::array<Vec2, 3> gradients_of(const ElementGeometry& geometry)
{
    std::array<Vec2, 3> g;
    for (int i = 0; i < 3; ++i) {
        g[i] = to_vec(geometry.barycentric_gradients[i]);
    }
    return g;
}

Bary edge_point(int j, double t)
{
    Bary b{};
    b[j] = 0.0;
    b[(j + 1) % 3] = 1.0 - t;
    b[(j + 2) % 3] = t;
    return b;
}

}  // namespace

PointValue bubble(const ElementGeometry& geometry, const Bary& point)
{
    const auto raw = raw_basis(gradients_of(geometry), point);
    return {raw.values[6], raw.gradients[6], raw.hessians[6]};
}

ElementBasis::ElementBasis(const ElementGeometry& geometry, const std::array<int, 3>& edge_signs)
{
    grads_ = gradients_of(geometry);
    for (int j = 0; j < 3; ++j) {
        edge_normals_[j] = edge_signs[j] * to_vec(geometry.outward_normals[j]);
    }

    // dof_matrix(i, k) = N_i(monomial k)
    LocalMatrix dof_matrix = LocalMatrix::Zero();
    for (int i = 0; i < 3; ++i) {
        dof_matrix(i, i) = 1.0;
    }
    const auto& edge = edge_rule(5);
    for (int j = 0; j < 3; ++j) {
        for (std::size_t q = 0; q < edge.size(); ++q) {
            const auto raw = raw_basis(grads_, edge_point(j, edge.points[q][0]));
            for (int k = 0; k < local_dofs; ++k) {
                dof_matrix(3 + j, k) += edge.weights[q] * raw.gradients[k].dot(edge_normals_[j]);
            }
        }
    }
    // element means: |T|^-1 int l_i = 1/3, int l_a l_b = 1/12, int 60 l0 l1 l2 = 1
    for (int k = 0; k < 3; ++k) {
        dof_matrix(6, k) = 1.0 / 3.0;
        dof_matrix(6, 3 + k) = 1.0 / 12.0;
    }
    dof_matrix(6, 6) = 1.0;

    Eigen::FullPivLU<LocalMatrix> lu(dof_matrix);
    if (!lu.isInvertible()) {
        throw std::runtime_error("singular element DOF matrix (degenerate triangle)");
    }
    coefficients_ = lu.inverse();

    // grad(Laplacian) of the monomials: only the bubble contributes
    const Vec2 bubble_term = 120.0 * (grads_[2] * grads_[0].dot(grads_[1]) + grads_[1] * grads_[0].dot(grads_[2]) +
                                      grads_[0] * grads_[1].dot(grads_[2]));
    for (int i = 0; i < local_dofs; ++i) {
        laplacian_gradients_[i] = coefficients_(6, i) * bubble_term;
    }

    // int_T Laplacian(phi_i) = sum_j int_{e_j} grad phi_i . n_out = sum_j sign_j |e_j| N_{3+j}(phi_i)
    for (int i = 0; i < local_dofs; ++i) {
        double sum = 0.0;
        for (int j = 0; j < 3; ++j) {
            if (i == 3 + j) {
                sum += edge_signs[j] * geometry.edge_lengths[j];
            }
        }
        laplacian_integrals_[i] = sum;
    }
}

LocalBasis ElementBasis::evaluate(const Bary& point) const
{
    const auto raw = raw_basis(grads_, point);
    LocalBasis out;
    for (int i = 0; i < local_dofs; ++i) {
        double v = 0.0;
        Vec2 g = Vec2::Zero();
        Mat2 h = Mat2::Zero();
        for (int k = 0; k < local_dofs; ++k) {
            const double c = coefficients_(k, i);
            if (c == 0.0) {
                continue;
            }
            v += c * raw.values[k];
            g += c * raw.gradients[k];
            h += c * raw.hessians[k];
        }
        out.values[i] = v;
        out.gradients[i] = g;
        out.hessians[i] = h;
    }
    return out;
}

std::array<double, 7> apply_dof_functionals(const ElementGeometry& geometry,
                                            const std::array<Vec2, 3>& edge_normals,
                                            const std::function<double(Point2)>& value,
                                            const std::function<Vec2(Point2)>& gradient, int edge_degree,
                                            int area_degree, int pieces)
{
    std::array<double, 7> dofs{};
    for (int i = 0; i < 3; ++i) {
        dofs[i] = value(geometry.vertices[i]);
    }
    const double n = pieces;
    const auto& edge = edge_rule(edge_degree);
    for (int j = 0; j < 3; ++j) {
        double mean = 0.0;
        for (int k = 0; k < pieces; ++k) {
            for (std::size_t q = 0; q < edge.size(); ++q) {
                const Point2 x = geometry.point(edge_point(j, (k + edge.points[q][0]) / n));
                mean += edge.weights[q] * gradient(x).dot(edge_normals[j]);
            }
        }
        dofs[3 + j] = mean / n;
    }
    // uniform subdivision into pieces^2 similar triangles, in (l1, l2) coordinates
    const auto& tri = triangle_rule(area_degree);
    double mean = 0.0;
    for (int a = 0; a < pieces; ++a) {
        for (int b = 0; a + b < pieces; ++b) {
            for (const int flip : {0, 1}) {
                if (flip == 1 && a + b + 1 >= pieces) {
                    continue;
                }
                for (std::size_t q = 0; q < tri.size(); ++q) {
                    const auto& r = tri.points[q];
                    double l1 = (a + r[1]) / n;
                    double l2 = (b + r[2]) / n;
                    if (flip == 1) {
                        l1 = (a + 1 - r[1]) / n;
                        l2 = (b + 1 - r[2]) / n;
                    }
                    mean += tri.weights[q] * value(geometry.point({1.0 - l1 - l2, l1, l2}));
                }
            }
        }
    }
    dofs[6] = mean / (n * n);
    return dofs;
}

}  // namespace morley

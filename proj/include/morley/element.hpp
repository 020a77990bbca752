#pragma once

#include "morley/mesh.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>

namespace morley {

using Bary = std::array<double, 3>;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline Vec2 to_vec(Point2 p) { return {p.x, p.y}; }

/// Value, gradient and Hessian of a scalar function at one point.
struct PointValue {
    double value = 0.0;
    Vec2 gradient = Vec2::Zero();
    Mat2 hessian = Mat2::Zero();
};

/// The cubic bubble 60 l0 l1 l2, normalised so that its element mean is one.
PointValue bubble(const ElementGeometry& geometry, const Bary& point);

/// Shape functions of P2 + span{b_T} on one element, evaluated at one point.
/// Index order: three vertex values, three edge-mean normal derivatives
/// (local edge j opposite vertex j), element mean.
struct LocalBasis {
    std::array<double, 7> values{};
    std::array<Vec2, 7> gradients;
    std::array<Mat2, 7> hessians;
};

inline constexpr int local_dofs = 7;
using LocalMatrix = Eigen::Matrix<double, local_dofs, local_dofs>;

/// Nodal basis of one element, dual to the functionals
///   N_i(w) = w(p_i),
///   N_{3+j}(w) = |e_j|^-1 int_{e_j} grad w . n_j ds   (n_j the global edge normal),
///   N_6(w) = |T|^-1 int_T w dx.
/// The dual basis is obtained by inverting the 7x7 matrix of functionals applied
/// to the barycentric monomials {l0, l1, l2, l1 l2, l2 l0, l0 l1, 60 l0 l1 l2}.
class ElementBasis {
public:
    ElementBasis() = default;
    ElementBasis(const ElementGeometry& geometry, const std::array<int, 3>& edge_signs);

    LocalBasis evaluate(const Bary& point) const;

    /// grad(Laplacian) of each shape function; constant on the element.
    const std::array<Vec2, 7>& laplacian_gradients() const { return laplacian_gradients_; }

    /// int_T Laplacian(phi_i) dx for each shape function.
    const std::array<double, 7>& laplacian_integrals() const { return laplacian_integrals_; }

    /// Global edge normals n_j used by the edge functionals.
    const std::array<Vec2, 3>& edge_normals() const { return edge_normals_; }

    /// Coefficients of the nodal basis in the monomial basis, column i = phi_i.
    const LocalMatrix& coefficients() const { return coefficients_; }

private:
    std::array<Vec2, 3> grads_;
    std::array<Vec2, 3> edge_normals_;
    LocalMatrix coefficients_ = LocalMatrix::Zero();
    std::array<Vec2, 7> laplacian_gradients_;
    std::array<double, 7> laplacian_integrals_{};
};

/// Evaluates the seven DOF functionals of ElementBasis on an arbitrary function
/// given through its value and gradient. Edge means use an edge Gauss rule of
/// the given degree, the element mean a triangle rule of `area_degree`; with
/// `pieces` > 1 both rules are applied on a uniform subdivision of the edges
/// and of the element.
std::array<double, 7> apply_dof_functionals(const ElementGeometry& geometry,
                                            const std::array<Vec2, 3>& edge_normals,
                                            const std::function<double(Point2)>& value,
                                            const std::function<Vec2(Point2)>& gradient,
                                            int edge_degree = 9, int area_degree = 10, int pieces = 1);

}  // namespace morley

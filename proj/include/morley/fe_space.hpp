#pragma once

#include "morley/element.hpp"
#include "morley/mesh.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <vector>

namespace morley {

/// A smooth function given in closed form with its first two derivatives.
struct SmoothField {
    std::function<double(Point2)> value;
    std::function<Vec2(Point2)> gradient;
    std::function<Mat2(Point2)> hessian;
};

/// Global numbering of W_h = P2 Morley + element bubbles. Vertex DOFs exist only
/// for interior vertices (boundary vertex values are pinned to zero); every edge
/// carries one normal-derivative DOF and every element one mean-value DOF.
/// Layout: [interior vertices | edges | elements].
class DofMap {
public:
    DofMap() = default;
    explicit DofMap(const Mesh& mesh);

    Index vertex_dof(Index v) const { return vertex_dofs_[v]; }
    Index edge_dof(Index e) const { return edge_offset_ + e; }
    Index bubble_dof(Index t) const { return bubble_offset_ + t; }
    Index total() const { return total_; }
    Index num_vertex_dofs() const { return edge_offset_; }

    /// Global ids of the seven local DOFs of element t; invalid_index where a
    /// boundary vertex value is pinned.
    std::array<Index, 7> element_dofs(const Mesh& mesh, Index t) const;

private:
    std::vector<Index> vertex_dofs_;
    Index edge_offset_ = 0;
    Index bubble_offset_ = 0;
    Index total_ = 0;
};

/// Mesh, numbering and per-element nodal bases. Immutable.
class FeSpace {
public:
    explicit FeSpace(std::shared_ptr<const Mesh> mesh);

    const Mesh& mesh() const { return *mesh_; }
    std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
    const DofMap& dofs() const { return dofs_; }
    Index num_dofs() const { return dofs_.total(); }

    const ElementGeometry& geometry(Index t) const { return geometry_[t]; }
    const ElementBasis& basis(Index t) const { return basis_[t]; }
    const std::array<Index, 7>& element_dofs(Index t) const { return element_dofs_[t]; }

    /// Local coefficient vector of element t (zero at pinned DOFs).
    std::array<double, 7> local_coefficients(const Eigen::VectorXd& coefficients, Index t) const;

    PointValue evaluate(const Eigen::VectorXd& coefficients, Index t, const Bary& point) const;

    /// grad(Laplacian) of the discrete function on element t (constant).
    Vec2 laplacian_gradient(const Eigen::VectorXd& coefficients, Index t) const;

    /// The interpolation operator: vertex values, edge-mean normal derivatives
    /// and element means of `field`. Boundary vertex values are dropped (the
    /// field is assumed to vanish there).
    Eigen::VectorXd interpolate(const SmoothField& field) const;

private:
    std::shared_ptr<const Mesh> mesh_;
    DofMap dofs_;
    std::vector<ElementGeometry> geometry_;
    std::vector<ElementBasis> basis_;
    std::vector<std::array<Index, 7>> element_dofs_;
};

/// Coefficient vector bound to the space it lives in.
struct FeFunction {
    std::shared_ptr<const FeSpace> space;
    Eigen::VectorXd coefficients;

    PointValue evaluate(Index t, const Bary& point) const { return space->evaluate(coefficients, t, point); }
};

}  // namespace morley

#include "morley/fe_space.hpp"

namespace morley {

DofMap::DofMap(const Mesh& mesh)
{
    vertex_dofs_.assign(static_cast<std::size_t>(mesh.num_vertices()), invalid_index);
    Index next = 0;
    for (Index v = 0; v < mesh.num_vertices(); ++v) {
        if (!mesh.is_boundary_vertex(v)) {
            vertex_dofs_[v] = next++;
        }
    }
    edge_offset_ = next;
    bubble_offset_ = edge_offset_ + mesh.num_edges();
    total_ = bubble_offset_ + mesh.num_elements();
}

std::array<Index, 7> DofMap::element_dofs(const Mesh& mesh, Index t) const
{
    std::array<Index, 7> ids{};
    const auto& el = mesh.element(t);
    for (int i = 0; i < 3; ++i) {
        ids[i] = vertex_dofs_[el.vertices[i]];
        ids[3 + i] = edge_dof(mesh.element_edges(t)[i]);
    }
    ids[6] = bubble_dof(t);
    return ids;
}

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)), dofs_(*mesh_)
{
    const Index nt = mesh_->num_elements();
    geometry_.reserve(static_cast<std::size_t>(nt));
    basis_.reserve(static_cast<std::size_t>(nt));
    element_dofs_.reserve(static_cast<std::size_t>(nt));
    for (Index t = 0; t < nt; ++t) {
        geometry_.push_back(element_geometry(*mesh_, t));
        basis_.emplace_back(geometry_.back(), mesh_->edge_signs(t));
        element_dofs_.push_back(dofs_.element_dofs(*mesh_, t));
    }
}

std::array<double, 7> FeSpace::local_coefficients(const Eigen::VectorXd& coefficients, Index t) const
{
    std::array<double, 7> local{};
    const auto& ids = element_dofs_[t];
    for (int i = 0; i < local_dofs; ++i) {
        local[i] = ids[i] == invalid_index ? 0.0 : coefficients[ids[i]];
    }
    return local;
}

PointValue FeSpace::evaluate(const Eigen::VectorXd& coefficients, Index t, const Bary& point) const
{
    const auto local = local_coefficients(coefficients, t);
    const auto shape = basis_[t].evaluate(point);
    PointValue out;
    for (int i = 0; i < local_dofs; ++i) {
        out.value += local[i] * shape.values[i];
        out.gradient += local[i] * shape.gradients[i];
        out.hessian += local[i] * shape.hessians[i];
    }
    return out;
}

Vec2 FeSpace::laplacian_gradient(const Eigen::VectorXd& coefficients, Index t) const
{
    const auto local = local_coefficients(coefficients, t);
    Vec2 g = Vec2::Zero();
    for (int i = 0; i < local_dofs; ++i) {
        g += local[i] * basis_[t].laplacian_gradients()[i];
    }
    return g;
}

namespace {

// composite rules keep the DOF functionals accurate for oscillatory fields on coarse meshes
constexpr int interpolation_pieces = 4;

}  // namespace

Eigen::VectorXd FeSpace::interpolate(const SmoothField& field) const
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(num_dofs());
    for (Index t = 0; t < mesh_->num_elements(); ++t) {
        // each shared DOF is written by every adjacent element with the same value
        const auto values = apply_dof_functionals(geometry_[t], basis_[t].edge_normals(), field.value, field.gradient, 9,
                                                  10, interpolation_pieces);
        const auto& ids = element_dofs_[t];
        for (int i = 0; i < local_dofs; ++i) {
            if (ids[i] != invalid_index) {
                out[ids[i]] = values[i];
            }
        }
    }
    return out;
}

}  // namespace morley

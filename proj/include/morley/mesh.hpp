#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace morley {

using Index = std::int32_t;
inline constexpr Index invalid_index = -1;

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
double norm(Point2 a);

class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Triangle with counter-clockwise vertices. Local edge i is the edge opposite
/// local vertex i; `refinement_edge` names the edge that newest vertex bisection
/// splits next.
struct Element {
    std::array<Index, 3> vertices{};
    int refinement_edge = 0;
    int generation = 0;
    /// Element of the previous mesh this one descends from (itself for an
    /// unrefined element, invalid_index for an initial mesh).
    Index parent = invalid_index;
};

/// Global edge. Endpoints are stored lower id first; the normal is the unit
/// tangent (lower -> higher) rotated 90 degrees counter-clockwise.
struct Edge {
    std::array<Index, 2> endpoints{};
    std::array<Index, 2> elements{invalid_index, invalid_index};
    bool boundary = false;
    Point2 normal;
    double length = 0.0;
};

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Square {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 1.0;
    double y1 = 1.0;

    double area() const { return (x1 - x0) * (y1 - y0); }
};

/// Conforming triangulation. Immutable once constructed; refinement returns a
/// new mesh.
class Mesh {
public:
    Mesh() = default;
    /// Validates orientation and conformity and builds the edge topology.
    Mesh(std::vector<Point2> vertices, std::vector<Element> elements);

    const std::vector<Point2>& vertices() const { return vertices_; }
    const std::vector<Element>& elements() const { return elements_; }
    const std::vector<Edge>& edges() const { return edges_; }

    Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
    Index num_elements() const { return static_cast<Index>(elements_.size()); }
    Index num_edges() const { return static_cast<Index>(edges_.size()); }

    const Point2& vertex(Index v) const { return vertices_[v]; }
    const Element& element(Index t) const { return elements_[t]; }
    const Edge& edge(Index e) const { return edges_[e]; }

    /// Global edge ids of the three local edges of element t.
    const std::array<Index, 3>& element_edges(Index t) const { return element_edges_[t]; }
    /// +1 where the global normal of local edge j points out of element t, -1 otherwise.
    const std::array<int, 3>& edge_signs(Index t) const { return edge_signs_[t]; }

    bool is_boundary_vertex(Index v) const { return boundary_vertex_[v] != 0; }
    const std::vector<char>& boundary_vertex_flags() const { return boundary_vertex_; }

    double area(Index t) const;
    double diameter(Index t) const;
    double total_area() const;

private:
    std::vector<Point2> vertices_;
    std::vector<Element> elements_;
    std::vector<Edge> edges_;
    std::vector<std::array<Index, 3>> element_edges_;
    std::vector<std::array<int, 3>> edge_signs_;
    std::vector<char> boundary_vertex_;
};

/// Geometric data of one element.
struct ElementGeometry {
    std::array<Point2, 3> vertices;
    double area = 0.0;
    double diameter = 0.0;
    std::array<Point2, 3> barycentric_gradients;
    std::array<double, 3> edge_lengths{};
    std::array<Point2, 3> outward_normals;
    std::array<Point2, 3> edge_midpoints;

    Point2 point(const std::array<double, 3>& bary) const;
};

ElementGeometry element_geometry(const Mesh& mesh, Index t);

/// Orientation data for jumps across an edge. `normal` points from the plus
/// element to the minus element; on the boundary it is the outward normal and
/// `minus` is invalid.
struct EdgeFrame {
    Index plus = invalid_index;
    Index minus = invalid_index;
    Point2 normal;
    Point2 tangent;
    std::array<Point2, 2> endpoints;
    double length = 0.0;
};

EdgeFrame edge_jump_frame(const Mesh& mesh, Index e);

/// Criss-cross triangulation: each of the subdivisions^2 cells is split into
/// four triangles through its centre. Refinement edges are the cell sides.
Mesh initial_mesh(const Square& domain, int subdivisions);

/// Newest vertex bisection of the marked elements plus the closure needed to
/// keep the mesh conforming.
Mesh bisect(const Mesh& mesh, std::span<const Index> marked);

/// Empty string when the mesh is conforming and positively oriented, otherwise
/// a description of the first problem found.
std::string conformity_audit(const Mesh& mesh);

/// Smallest interior angle over all elements, in degrees.
double min_angle_degrees(const Mesh& mesh);

/// "x y" per vertex, then "v0 v1 v2" per element, preceded by a count line.
void write_mesh(std::ostream& out, const Mesh& mesh);

}  // namespace morley

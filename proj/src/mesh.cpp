#include "morley/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace morley {

namespace {

std::uint64_t edge_key(Index a, Index b)
{
    if (a > b) {
        std::swap(a, b);
    }
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

double signed_area(const Point2& a, const Point2& b, const Point2& c)
{
    return 0.5 * cross(b - a, c - a);
}

constexpr int max_bisection_depth = 64;

}  // namespace

double norm(Point2 a) { return std::hypot(a.x, a.y); }

Mesh::Mesh(std::vector<Point2> vertices, std::vector<Element> elements)
    : vertices_(std::move(vertices)), elements_(std::move(elements))
{
    const auto nv = static_cast<Index>(vertices_.size());
    for (const auto& p : vertices_) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw MeshError("mesh vertex with non-finite coordinate");
        }
    }

    std::unordered_map<std::uint64_t, Index> lookup;
    lookup.reserve(elements_.size() * 2);
    element_edges_.resize(elements_.size());
    edge_signs_.resize(elements_.size());

    for (Index t = 0; t < static_cast<Index>(elements_.size()); ++t) {
        const auto& el = elements_[t];
        for (Index v : el.vertices) {
            if (v < 0 || v >= nv) {
                throw MeshError("element " + std::to_string(t) + " references vertex out of range");
            }
        }
        if (el.vertices[0] == el.vertices[1] || el.vertices[1] == el.vertices[2] ||
            el.vertices[0] == el.vertices[2]) {
            throw MeshError("element " + std::to_string(t) + " has repeated vertices");
        }
        if (el.refinement_edge < 0 || el.refinement_edge > 2) {
            throw MeshError("element " + std::to_string(t) + " has invalid refinement edge");
        }
        const auto& a = vertices_[el.vertices[0]];
        const auto& b = vertices_[el.vertices[1]];
        const auto& c = vertices_[el.vertices[2]];
        if (!(signed_area(a, b, c) > 0.0)) {
            throw MeshError("element " + std::to_string(t) + " is not positively oriented");
        }

        for (int j = 0; j < 3; ++j) {
            const Index p = el.vertices[(j + 1) % 3];
            const Index q = el.vertices[(j + 2) % 3];
            const auto key = edge_key(p, q);
            auto [it, inserted] = lookup.try_emplace(key, static_cast<Index>(edges_.size()));
            if (inserted) {
                Edge e;
                e.endpoints = {std::min(p, q), std::max(p, q)};
                const Point2 d = vertices_[e.endpoints[1]] - vertices_[e.endpoints[0]];
                e.length = norm(d);
                e.normal = {-d.y / e.length, d.x / e.length};
                e.elements[0] = t;
                edges_.push_back(e);
            } else {
                auto& e = edges_[it->second];
                if (e.elements[1] != invalid_index) {
                    throw MeshError("edge shared by more than two elements");
                }
                e.elements[1] = t;
            }
            element_edges_[t][j] = it->second;
        }
    }

    boundary_vertex_.assign(vertices_.size(), 0);
    for (auto& e : edges_) {
        e.boundary = e.elements[1] == invalid_index;
        if (e.boundary) {
            boundary_vertex_[e.endpoints[0]] = 1;
            boundary_vertex_[e.endpoints[1]] = 1;
        }
    }

    for (Index t = 0; t < static_cast<Index>(elements_.size()); ++t) {
        const auto& el = elements_[t];
        for (int j = 0; j < 3; ++j) {
            const auto& e = edges_[element_edges_[t][j]];
            const Point2 mid = 0.5 * (vertices_[e.endpoints[0]] + vertices_[e.endpoints[1]]);
            const Point2 inward = vertices_[el.vertices[j]] - mid;
            edge_signs_[t][j] = dot(e.normal, inward) < 0.0 ? 1 : -1;
        }
    }

    std::vector<int> sign_sum(edges_.size(), 0);
    for (Index t = 0; t < static_cast<Index>(elements_.size()); ++t) {
        for (int j = 0; j < 3; ++j) {
            sign_sum[element_edges_[t][j]] += edge_signs_[t][j];
        }
    }
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        if (!edges_[e].boundary && sign_sum[e] != 0) {
            throw MeshError("overlapping elements across interior edge " + std::to_string(e));
        }
    }
}

double Mesh::area(Index t) const
{
    const auto& el = elements_[t];
    return signed_area(vertices_[el.vertices[0]], vertices_[el.vertices[1]], vertices_[el.vertices[2]]);
}

double Mesh::diameter(Index t) const
{
    double h = 0.0;
    for (Index e : element_edges_[t]) {
        h = std::max(h, edges_[e].length);
    }
    return h;
}

double Mesh::total_area() const
{
    double sum = 0.0;
    for (Index t = 0; t < num_elements(); ++t) {
        sum += area(t);
    }
    return sum;
}

Point2 ElementGeometry::point(const std::array<double, 3>& bary) const
{
    return bary[0] * vertices[0] + bary[1] * vertices[1] + bary[2] * vertices[2];
}

ElementGeometry element_geometry(const Mesh& mesh, Index t)
{
    ElementGeometry g;
    const auto& el = mesh.element(t);
    for (int i = 0; i < 3; ++i) {
        g.vertices[i] = mesh.vertex(el.vertices[i]);
    }
    g.area = signed_area(g.vertices[0], g.vertices[1], g.vertices[2]);
    const double two_area = 2.0 * g.area;
    for (int i = 0; i < 3; ++i) {
        const Point2& p = g.vertices[(i + 1) % 3];
        const Point2& q = g.vertices[(i + 2) % 3];
        const Point2 d = q - p;
        g.edge_lengths[i] = norm(d);
        // outward normal of a counter-clockwise edge p -> q
        g.outward_normals[i] = {d.y / g.edge_lengths[i], -d.x / g.edge_lengths[i]};
        g.edge_midpoints[i] = 0.5 * (p + q);
        // grad lambda_i is perpendicular to the opposite edge, pointing inward
        g.barycentric_gradients[i] = {-d.y / two_area, d.x / two_area};
        g.diameter = std::max(g.diameter, g.edge_lengths[i]);
    }
    return g;
}

EdgeFrame edge_jump_frame(const Mesh& mesh, Index e)
{
    const Edge& edge = mesh.edge(e);
    EdgeFrame f;
    f.endpoints = {mesh.vertex(edge.endpoints[0]), mesh.vertex(edge.endpoints[1])};
    f.length = edge.length;
    const Point2 d = f.endpoints[1] - f.endpoints[0];
    f.tangent = {d.x / edge.length, d.y / edge.length};

    auto local_index = [&](Index t) {
        const auto& ids = mesh.element_edges(t);
        return static_cast<int>(std::find(ids.begin(), ids.end(), e) - ids.begin());
    };

    const Index t0 = edge.elements[0];
    const int sign0 = mesh.edge_signs(t0)[local_index(t0)];
    if (edge.boundary) {
        f.plus = t0;
        f.normal = sign0 > 0 ? edge.normal : -1.0 * edge.normal;
        return f;
    }
    f.normal = edge.normal;
    if (sign0 > 0) {
        f.plus = t0;
        f.minus = edge.elements[1];
    } else {
        f.plus = edge.elements[1];
        f.minus = t0;
    }
    return f;
}

Mesh initial_mesh(const Square& domain, int subdivisions)
{
    if (subdivisions < 1) {
        throw MeshError("initial mesh needs at least one subdivision");
    }
    if (!(domain.x1 > domain.x0) || !(domain.y1 > domain.y0)) {
        throw MeshError("degenerate domain");
    }
    const int n = subdivisions;
    const double dx = (domain.x1 - domain.x0) / n;
    const double dy = (domain.y1 - domain.y0) / n;

    std::vector<Point2> vertices;
    vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1) + n * n));
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            vertices.push_back({domain.x0 + i * dx, domain.y0 + j * dy});
        }
    }
    auto corner = [n](int i, int j) { return static_cast<Index>(j * (n + 1) + i); };

    std::vector<Element> elements;
    elements.reserve(static_cast<std::size_t>(4 * n * n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const auto centre = static_cast<Index>(vertices.size());
            vertices.push_back({domain.x0 + (i + 0.5) * dx, domain.y0 + (j + 0.5) * dy});
            const std::array<Index, 4> ring = {corner(i, j), corner(i + 1, j), corner(i + 1, j + 1),
                                               corner(i, j + 1)};
            for (int k = 0; k < 4; ++k) {
                Element el;
                el.vertices = {centre, ring[k], ring[(k + 1) % 4]};
                el.refinement_edge = 0;  // cell side, the longest edge
                elements.push_back(el);
            }
        }
    }
    return Mesh(std::move(vertices), std::move(elements));
}

Mesh bisect(const Mesh& mesh, std::span<const Index> marked)
{
    const Index nt = mesh.num_elements();
    std::vector<char> edge_marked(static_cast<std::size_t>(mesh.num_edges()), 0);
    for (Index t : marked) {
        if (t < 0 || t >= nt) {
            throw MeshError("marked element id out of range: " + std::to_string(t));
        }
        const auto& el = mesh.element(t);
        edge_marked[mesh.element_edges(t)[el.refinement_edge]] = 1;
    }

    // closure: an element with any marked edge must have its refinement edge marked
    std::vector<Index> work;
    for (Index e = 0; e < mesh.num_edges(); ++e) {
        if (edge_marked[e]) {
            for (Index t : mesh.edge(e).elements) {
                if (t != invalid_index) {
                    work.push_back(t);
                }
            }
        }
    }
    std::size_t sweeps = 0;
    const std::size_t sweep_cap = 4 * static_cast<std::size_t>(mesh.num_edges()) + 16;
    while (!work.empty()) {
        if (++sweeps > sweep_cap) {
            throw MeshError("refinement closure did not terminate");
        }
        const Index t = work.back();
        work.pop_back();
        const Index ref = mesh.element_edges(t)[mesh.element(t).refinement_edge];
        if (edge_marked[ref]) {
            continue;
        }
        edge_marked[ref] = 1;
        for (Index s : mesh.edge(ref).elements) {
            if (s != invalid_index && s != t) {
                work.push_back(s);
            }
        }
    }

    std::vector<Point2> vertices = mesh.vertices();
    std::unordered_map<std::uint64_t, Index> midpoint;
    for (Index e = 0; e < mesh.num_edges(); ++e) {
        if (edge_marked[e]) {
            const auto& edge = mesh.edge(e);
            midpoint.emplace(edge_key(edge.endpoints[0], edge.endpoints[1]),
                             static_cast<Index>(vertices.size()));
            vertices.push_back(0.5 * (mesh.vertex(edge.endpoints[0]) + mesh.vertex(edge.endpoints[1])));
        }
    }

    std::vector<Element> elements;
    elements.reserve(static_cast<std::size_t>(nt) + 2 * midpoint.size());

    auto refine = [&](auto&& self, const Element& el, int depth) -> void {
        if (depth > max_bisection_depth) {
            throw MeshError("bisection depth exceeded; incompatible refinement edges");
        }
        const int r = el.refinement_edge;
        const Index a0 = el.vertices[r];
        const Index a1 = el.vertices[(r + 1) % 3];
        const Index a2 = el.vertices[(r + 2) % 3];
        const auto it = midpoint.find(edge_key(a1, a2));
        if (it == midpoint.end()) {
            elements.push_back(el);
            return;
        }
        const Index m = it->second;
        Element left;
        left.vertices = {a0, a1, m};
        left.refinement_edge = 2;
        left.generation = el.generation + 1;
        left.parent = el.parent;
        Element right;
        right.vertices = {a0, m, a2};
        right.refinement_edge = 1;
        right.generation = el.generation + 1;
        right.parent = el.parent;
        self(self, left, depth + 1);
        self(self, right, depth + 1);
    };

    for (Index t = 0; t < nt; ++t) {
        Element el = mesh.element(t);
        el.parent = t;
        refine(refine, el, 0);
    }
    return Mesh(std::move(vertices), std::move(elements));
}

std::string conformity_audit(const Mesh& mesh)
{
    std::ostringstream msg;
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        if (!(mesh.area(t) > 0.0)) {
            msg << "element " << t << " not positively oriented";
            return msg.str();
        }
    }

    double xmin = std::numeric_limits<double>::max();
    double xmax = std::numeric_limits<double>::lowest();
    double ymin = xmin;
    double ymax = xmax;
    for (const auto& p : mesh.vertices()) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    const double tol = 1e-12 * std::max(xmax - xmin, ymax - ymin);
    auto on_side = [&](Point2 a, Point2 b) {
        return (std::abs(a.x - xmin) < tol && std::abs(b.x - xmin) < tol) ||
               (std::abs(a.x - xmax) < tol && std::abs(b.x - xmax) < tol) ||
               (std::abs(a.y - ymin) < tol && std::abs(b.y - ymin) < tol) ||
               (std::abs(a.y - ymax) < tol && std::abs(b.y - ymax) < tol);
    };

    // A hanging node leaves an edge with a single neighbour inside the domain.
    for (Index e = 0; e < mesh.num_edges(); ++e) {
        const auto& edge = mesh.edge(e);
        const bool single = edge.elements[1] == invalid_index;
        if (edge.boundary != single) {
            msg << "edge " << e << " boundary flag inconsistent";
            return msg.str();
        }
        if (single && !on_side(mesh.vertex(edge.endpoints[0]), mesh.vertex(edge.endpoints[1]))) {
            msg << "edge " << e << " has one neighbour but lies inside the domain";
            return msg.str();
        }
        for (Index t : edge.elements) {
            if (t == invalid_index) {
                continue;
            }
            const auto& v = mesh.element(t).vertices;
            for (Index p : edge.endpoints) {
                if (std::find(v.begin(), v.end(), p) == v.end()) {
                    msg << "edge " << e << " endpoints disagree with element " << t;
                    return msg.str();
                }
            }
        }
    }
    return {};
}

double min_angle_degrees(const Mesh& mesh)
{
    double smallest = 180.0;
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        const auto& el = mesh.element(t);
        for (int i = 0; i < 3; ++i) {
            const Point2 p = mesh.vertex(el.vertices[i]);
            const Point2 u = mesh.vertex(el.vertices[(i + 1) % 3]) - p;
            const Point2 v = mesh.vertex(el.vertices[(i + 2) % 3]) - p;
            const double angle = std::atan2(std::abs(cross(u, v)), dot(u, v));
            smallest = std::min(smallest, angle * 180.0 / std::numbers::pi);
        }
    }
    return smallest;
}

void write_mesh(std::ostream& out, const Mesh& mesh)
{
    out << mesh.num_vertices() << ' ' << mesh.num_elements() << '\n';
    out << std::setprecision(17);
    for (const auto& p : mesh.vertices()) {
        out << p.x << ' ' << p.y << '\n';
    }
    for (const auto& el : mesh.elements()) {
        out << el.vertices[0] << ' ' << el.vertices[1] << ' ' << el.vertices[2] << '\n';
    }
}

}  // namespace morley

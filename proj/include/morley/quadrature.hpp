#pragma once

#include <array>
#include <stdexcept>
#include <vector>

namespace morley {

/// Quadrature on the reference simplex. Triangle points are barycentric
/// triples, edge points are a single parameter t in [0, 1] stored in
/// points[i][0]. Weights sum to 1 and are scaled by the measure on use.
struct QuadratureRule {
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;
    int exact_degree = 0;

    std::size_t size() const { return weights.size(); }
};

enum class QuadratureKind { triangle, edge };

class QuadratureError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Symmetric rule with positive weights, exact for polynomials up to
/// `exact_degree` (at most 10). Rules are built once and cached.
const QuadratureRule& quadrature(QuadratureKind kind, int exact_degree);

inline const QuadratureRule& triangle_rule(int degree) { return quadrature(QuadratureKind::triangle, degree); }
inline const QuadratureRule& edge_rule(int degree) { return quadrature(QuadratureKind::edge, degree); }

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace morley

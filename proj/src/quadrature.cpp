#include "morley/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace morley {

namespace {

constexpr int max_degree = 10;

void add_orbit(QuadratureRule& rule, double a, double b, double c, double w)
{
    // all distinct permutations of (a, b, c), each with weight w
    const std::array<std::array<double, 3>, 6> perms = {{
        {a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a},
    }};
    std::vector<std::array<double, 3>> seen;
    for (const auto& p : perms) {
        bool duplicate = false;
        for (const auto& q : seen) {
            if (p == q) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) {
            seen.push_back(p);
            rule.points.push_back(p);
            rule.weights.push_back(w);
        }
    }
}

// Dunavant's symmetric rules, degrees 1 to 6.
QuadratureRule dunavant(int degree)
{
    QuadratureRule r;
    r.exact_degree = degree;
    switch (degree) {
    case 1:
        add_orbit(r, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0);
        break;
    case 2:
        add_orbit(r, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0);
        break;
    case 3:
        // Strang-Fix six point rule
        add_orbit(r, 0.659027622374092, 0.231933368553031, 0.109039009072877, 1.0 / 6.0);
        break;
    case 4:
        add_orbit(r, 0.816847572980459, 0.091576213509771, 0.091576213509771, 0.109951743655322);
        add_orbit(r, 0.108103018168070, 0.445948490915965, 0.445948490915965, 0.223381589678011);
        break;
    case 5:
        add_orbit(r, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.225);
        add_orbit(r, 0.797426985353087, 0.101286507323456, 0.101286507323456, 0.125939180544827);
        add_orbit(r, 0.059715871789770, 0.470142064105115, 0.470142064105115, 0.132394152788506);
        break;
    case 6:
        add_orbit(r, 0.873821971016996, 0.063089014491502, 0.063089014491502, 0.050844906370207);
        add_orbit(r, 0.501426509658179, 0.249286745170910, 0.249286745170910, 0.116786275726379);
        add_orbit(r, 0.636502499121399, 0.310352451033785, 0.053145049844816, 0.082851075618374);
        break;
    default:
        throw QuadratureError("no tabulated rule");
    }
    // the tabulated values carry 15 digits; renormalise the weight sum exactly
    double sum = 0.0;
    for (double w : r.weights) {
        sum += w;
    }
    for (double& w : r.weights) {
        w /= sum;
    }
    return r;
}

// Conical (Duffy) product of Gauss-Legendre rules, symmetrised over the six
// permutations of the barycentric coordinates. Positive and exact to `degree`.
QuadratureRule symmetrised_conical(int degree)
{
    const int n = (degree + 3) / 2;
    std::vector<double> x;
    std::vector<double> w;
    gauss_legendre(n, x, w);
    QuadratureRule r;
    r.exact_degree = degree;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            // (u, v) in the unit square -> (s, t) = (u, v (1 - u)) in the triangle
            const double s = x[i];
            const double t = x[j] * (1.0 - x[i]);
            // reference triangle has area 1/2; weights normalised to sum 1
            const double weight = 2.0 * w[i] * w[j] * (1.0 - x[i]);
            const std::array<double, 3> b = {1.0 - s - t, s, t};
            const std::array<std::array<double, 3>, 6> perms = {{
                {b[0], b[1], b[2]}, {b[0], b[2], b[1]}, {b[1], b[0], b[2]},
                {b[1], b[2], b[0]}, {b[2], b[0], b[1]}, {b[2], b[1], b[0]},
            }};
            for (const auto& p : perms) {
                r.points.push_back(p);
                r.weights.push_back(weight / 6.0);
            }
        }
    }
    return r;
}

QuadratureRule gauss_edge(int degree)
{
    const int n = degree / 2 + 1;
    std::vector<double> x;
    std::vector<double> w;
    gauss_legendre(n, x, w);
    QuadratureRule r;
    r.exact_degree = 2 * n - 1;
    for (int i = 0; i < n; ++i) {
        r.points.push_back({x[i], 0.0, 0.0});
        r.weights.push_back(w[i]);
    }
    return r;
}

}  // namespace

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights)
{
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        // Newton iteration on P_n from the Chebyshev-like initial guess
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) {
                break;
            }
        }
        {
            double p0 = 1.0;
            double p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
        }
        // map [-1, 1] -> [0, 1]
        nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - z);
        weights[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
}

const QuadratureRule& quadrature(QuadratureKind kind, int exact_degree)
{
    if (exact_degree < 0 || exact_degree > max_degree) {
        throw QuadratureError("unsupported quadrature degree " + std::to_string(exact_degree));
    }
    static std::mutex guard;
    static std::map<std::pair<int, int>, QuadratureRule> cache;
    const std::lock_guard lock(guard);
    const auto key = std::make_pair(static_cast<int>(kind), exact_degree);
    auto it = cache.find(key);
    if (it == cache.end()) {
        QuadratureRule rule;
        if (kind == QuadratureKind::edge) {
            rule = gauss_edge(exact_degree);
        } else if (exact_degree <= 6) {
            rule = dunavant(std::max(exact_degree, 1));
        } else {
            rule = symmetrised_conical(exact_degree);
        }
        it = cache.emplace(key, std::move(rule)).first;
    }
    return it->second;
}

}  // namespace morley

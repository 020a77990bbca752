#pragma once

#include "morley/mesh.hpp"

#include <random>

namespace testing {

/// Random NVB refinement of a criss-cross mesh of the given square with at
/// most `max_elements` elements.
inline morley::Mesh random_mesh(std::mt19937_64& rng, const morley::Square& domain, int max_elements)
{
    morley::Mesh mesh = morley::initial_mesh(domain, 1);
    for (int step = 0; step < 20; ++step) {
        std::uniform_int_distribution<morley::Index> pick(0, mesh.num_elements() - 1);
        const morley::Index marked[] = {pick(rng)};
        morley::Mesh next = morley::bisect(mesh, marked);
        if (next.num_elements() > max_elements) {
            break;
        }
        mesh = std::move(next);
    }
    return mesh;
}

inline morley::Square random_square(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> offset(-1.0, 1.0);
    std::uniform_real_distribution<double> side(0.5, 2.0);
    const double x0 = offset(rng);
    const double y0 = offset(rng);
    return {x0, y0, x0 + side(rng), y0 + side(rng)};
}

}  // namespace testing

#include "morley/fe_space.hpp"
#include "morley/problems.hpp"
#include "oracle.hpp"

namespace testing {

/// Oracle index of every library DOF.
inline std::vector<int> oracle_indices(const morley::FeSpace& space, const oracle::Discretisation& d)
{
    const morley::Mesh& mesh = space.mesh();
    std::vector<int> map(static_cast<std::size_t>(space.num_dofs()), -1);
    for (morley::Index v = 0; v < mesh.num_vertices(); ++v) {
        if (const morley::Index k = space.dofs().vertex_dof(v); k != morley::invalid_index) {
            map[k] = d.index({0, v, 0});
        }
    }
    for (morley::Index e = 0; e < mesh.num_edges(); ++e) {
        const auto& ends = mesh.edge(e).endpoints;
        map[space.dofs().edge_dof(e)] = d.index({1, ends[0], ends[1]});
    }
    for (morley::Index t = 0; t < mesh.num_elements(); ++t) {
        map[space.dofs().bubble_dof(t)] = d.index({2, t, 0});
    }
    return map;
}

inline oracle::Problem oracle_problem(const morley::ProblemSpec& p)
{
    auto wrap = [](const morley::ScalarField& f) { return [f](oracle::Vec x) { return f({x.x(), x.y()}); }; };
    return {p.beta, wrap(p.desired_state), wrap(p.source), wrap(p.source_laplacian)};
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testing

namespace testing {

/// Bivariate polynomial sum c_ij x^i y^j.
struct Poly {
    std::vector<std::array<double, 3>> terms;  // {c, i, j}

    double value(morley::Point2 p) const
    {
        double v = 0.0;
        for (const auto& [c, i, j] : terms) {
            v += c * std::pow(p.x, i) * std::pow(p.y, j);
        }
        return v;
    }
    Poly laplacian() const
    {
        Poly out;
        for (const auto& [c, i, j] : terms) {
            if (i >= 2) {
                out.terms.push_back({c * i * (i - 1), i - 2, j});
            }
            if (j >= 2) {
                out.terms.push_back({c * j * (j - 1), i, j - 2});
            }
        }
        return out;
    }
    static Poly random(std::mt19937_64& rng, int degree)
    {
        std::normal_distribution<double> g;
        Poly p;
        for (int i = 0; i <= degree; ++i) {
            for (int j = 0; i + j <= degree; ++j) {
                p.terms.push_back({g(rng), static_cast<double>(i), static_cast<double>(j)});
            }
        }
        return p;
    }
};

/// Integral-constraint problem with a cubic desired state and a quartic source,
/// so that every quadrature in the load and the estimator is exact.
inline morley::ProblemSpec polynomial_problem(std::mt19937_64& rng)
{
    morley::ProblemSpec p;
    p.name = "polynomial";
    p.domain = {0.0, 0.0, 1.0, 1.0};
    p.beta = std::uniform_real_distribution<double>(0.2, 2.0)(rng);
    const Poly yd = Poly::random(rng, 3);
    const Poly f = Poly::random(rng, 4);
    const Poly lf = f.laplacian();
    p.desired_state = [yd](morley::Point2 x) { return yd.value(x); };
    p.source = [f](morley::Point2 x) { return f.value(x); };
    p.source_laplacian = [lf](morley::Point2 x) { return lf.value(x); };
    p.integral = morley::IntegralControlConstraints{-1.0, -1.0};
    p.validate();
    return p;
}

}  // namespace testing

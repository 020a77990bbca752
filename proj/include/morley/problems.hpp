#pragma once

#include "morley/fe_space.hpp"
#include "morley/mesh.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace morley {

using ScalarField = std::function<double(Point2)>;

/// int y >= delta2 and int u >= delta1 with u = -Laplacian(y) - f.
struct IntegralControlConstraints {
    double delta1 = 0.0;
    double delta2 = 0.0;
};

/// int y >= delta3 and lower <= u <= upper with u = -Laplacian(y) - f.
struct PointwiseControlConstraints {
    double delta3 = 0.0;
    ScalarField lower;
    ScalarField upper;
};

struct ExactSolution {
    SmoothField state;
    ScalarField control;
    ScalarField adjoint;
    /// False when the closed forms are not the optimum of the stated data.
    bool consistent = true;
};

class ProblemError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Data of min 1/2 |y - y_d|^2 + beta/2 |u|^2 subject to -Laplacian(y) = f + u,
/// y = 0 on the boundary, and one of the two constraint families.
struct ProblemSpec {
    std::string name;
    Square domain;
    double beta = 1.0;
    ScalarField desired_state;
    ScalarField source;
    ScalarField source_laplacian;
    std::optional<IntegralControlConstraints> integral;
    std::optional<PointwiseControlConstraints> pointwise;
    std::optional<ExactSolution> exact;

    /// Throws ProblemError for beta <= 0, missing fields, both or neither
    /// constraint family, or lower >= upper at sample points.
    void validate() const;
};

/// Sum of c sin(a pi x) sin(b pi y) plus a constant, with closed-form derivatives.
class SineSeries {
public:
    struct Term {
        double coefficient;
        double a;
        double b;
    };

    SineSeries() = default;
    SineSeries(std::vector<Term> terms, double constant = 0.0) : terms_(std::move(terms)), constant_(constant) {}

    double value(Point2 p) const;
    Vec2 gradient(Point2 p) const;
    Mat2 hessian(Point2 p) const;
    double laplacian(Point2 p) const;
    double bilaplacian(Point2 p) const;
    double integral(const Square& domain) const;

    /// Laplacian as another series (the constant drops out).
    SineSeries laplacian_series() const;
    SineSeries scaled(double s) const;
    SineSeries plus(const SineSeries& other) const;

    SmoothField field() const;
    ScalarField scalar() const;

private:
    std::vector<Term> terms_;
    double constant_ = 0.0;
};

/// The four benchmark problems, ids 1 to 4.
ProblemSpec example(int id);

/// "ex1".."ex4", "manufactured" or "manufactured-active".
ProblemSpec problem_by_name(const std::string& name, std::uint64_t seed = 0);

enum class ManufacturedVariant { inactive, state_active };

/// Random smooth problem on the unit square whose exact optimum is known:
/// all constraints inactive, or the state constraint active with a known
/// multiplier (returned through `state_multiplier`).
ProblemSpec manufactured(std::uint64_t seed, ManufacturedVariant variant = ManufacturedVariant::inactive,
                         double* state_multiplier = nullptr);

}  // namespace morley

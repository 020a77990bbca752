#include "morley/problems.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace morley {

namespace {

constexpr double pi = std::numbers::pi;

ScalarField constant_field(double c)
{
    return [c](Point2) { return c; };
}

}  // namespace

double SineSeries::value(Point2 p) const
{
    double v = constant_;
    for (const auto& t : terms_) {
        v += t.coefficient * std::sin(t.a * pi * p.x) * std::sin(t.b * pi * p.y);
    }
    return v;
}

Vec2 SineSeries::gradient(Point2 p) const
{
    Vec2 g = Vec2::Zero();
    for (const auto& t : terms_) {
        const double ka = t.a * pi;
        const double kb = t.b * pi;
        g.x() += t.coefficient * ka * std::cos(ka * p.x) * std::sin(kb * p.y);
        g.y() += t.coefficient * kb * std::sin(ka * p.x) * std::cos(kb * p.y);
    }
    return g;
}

Mat2 SineSeries::hessian(Point2 p) const
{
    Mat2 h = Mat2::Zero();
    for (const auto& t : terms_) {
        const double ka = t.a * pi;
        const double kb = t.b * pi;
        const double sx = std::sin(ka * p.x);
        const double cx = std::cos(ka * p.x);
        const double sy = std::sin(kb * p.y);
        const double cy = std::cos(kb * p.y);
        h(0, 0) -= t.coefficient * ka * ka * sx * sy;
        h(1, 1) -= t.coefficient * kb * kb * sx * sy;
        h(0, 1) += t.coefficient * ka * kb * cx * cy;
    }
    h(1, 0) = h(0, 1);
    return h;
}

double SineSeries::laplacian(Point2 p) const { return laplacian_series().value(p); }

double SineSeries::bilaplacian(Point2 p) const { return laplacian_series().laplacian_series().value(p); }

double SineSeries::integral(const Square& d) const
{
    double sum = constant_ * d.area();
    for (const auto& t : terms_) {
        const double ka = t.a * pi;
        const double kb = t.b * pi;
        const double ix = (std::cos(ka * d.x0) - std::cos(ka * d.x1)) / ka;
        const double iy = (std::cos(kb * d.y0) - std::cos(kb * d.y1)) / kb;
        sum += t.coefficient * ix * iy;
    }
    return sum;
}

SineSeries SineSeries::laplacian_series() const
{
    std::vector<Term> out;
    out.reserve(terms_.size());
    for (const auto& t : terms_) {
        out.push_back({-t.coefficient * (t.a * t.a + t.b * t.b) * pi * pi, t.a, t.b});
    }
    return SineSeries(std::move(out));
}

SineSeries SineSeries::scaled(double s) const
{
    auto out = terms_;
    for (auto& t : out) {
        t.coefficient *= s;
    }
    return SineSeries(std::move(out), s * constant_);
}

SineSeries SineSeries::plus(const SineSeries& other) const
{
    auto out = terms_;
    out.insert(out.end(), other.terms_.begin(), other.terms_.end());
    return SineSeries(std::move(out), constant_ + other.constant_);
}

SmoothField SineSeries::field() const
{
    return {[s = *this](Point2 p) { return s.value(p); }, [s = *this](Point2 p) { return s.gradient(p); },
            [s = *this](Point2 p) { return s.hessian(p); }};
}

ScalarField SineSeries::scalar() const
{
    return [s = *this](Point2 p) { return s.value(p); };
}

void ProblemSpec::validate() const
{
    if (!(beta > 0.0)) {
        throw ProblemError(name + ": beta must be positive");
    }
    if (!desired_state || !source || !source_laplacian) {
        throw ProblemError(name + ": desired state, source and its Laplacian are required");
    }
    if (integral.has_value() == pointwise.has_value()) {
        throw ProblemError(name + ": exactly one constraint family must be declared");
    }
    if (pointwise) {
        if (!pointwise->lower || !pointwise->upper) {
            throw ProblemError(name + ": pointwise control bounds missing");
        }
        const int n = 16;
        for (int i = 0; i <= n; ++i) {
            for (int j = 0; j <= n; ++j) {
                const Point2 p{domain.x0 + (domain.x1 - domain.x0) * i / n,
                               domain.y0 + (domain.y1 - domain.y0) * j / n};
                if (!(pointwise->lower(p) < pointwise->upper(p))) {
                    throw ProblemError(name + ": control bounds must satisfy lower < upper");
                }
            }
        }
    }
}

ProblemSpec example(int id)
{
    ProblemSpec pb;
    switch (id) {
    case 1: {
        pb.name = "ex1";
        pb.domain = {0.0, 0.0, 1.0, 1.0};
        pb.beta = 1.0;
        const SineSeries p({{1.0, 2, 2}, {3.0 / 8.0, 2, 4}});
        const SineSeries lap_p = p.laplacian_series();
        const SineSeries y_d = p.plus(lap_p).plus(SineSeries({}, -0.4));
        const SineSeries f = lap_p.scaled(-1.0).plus(p);  // -Laplacian(y) - u with u = -p
        pb.desired_state = y_d.scalar();
        pb.source = f.scalar();
        pb.source_laplacian = f.laplacian_series().scalar();
        pb.integral = IntegralControlConstraints{0.0, -0.4};
        pb.exact = ExactSolution{p.field(), p.scaled(-1.0).scalar(), p.scalar(), true};
        break;
    }
    case 2: {
        pb.name = "ex2";
        pb.domain = {0.0, 0.0, 1.0, 1.0};
        pb.beta = 1.0;
        const SineSeries p({{1.0, 1, 1}});
        const SineSeries y = p.scaled(2.0 * pi * pi);
        const SineSeries f = p.scaled(4.0 * std::pow(pi, 4) + 1.0).plus(SineSeries({}, -4.0 / (pi * pi)));
        pb.desired_state = constant_field(0.0);
        pb.source = f.scalar();
        pb.source_laplacian = f.laplacian_series().scalar();
        pb.integral = IntegralControlConstraints{0.0, 100.0};
        // int y = 8 < delta2 = 100: the printed state cannot be the optimum
        pb.exact = ExactSolution{y.field(), p.scaled(-1.0).plus(SineSeries({}, 4.0 / (pi * pi))).scalar(),
                                 p.scalar(), false};
        break;
    }
    case 3: {
        pb.name = "ex3";
        pb.domain = {-1.0, -1.0, 1.0, 1.0};
        pb.beta = 1.0;
        const SineSeries p({{1.0, 1, 1}});
        const SineSeries y = p.scaled(-1.0 / (2.0 * pi * pi));
        const SineSeries y_d = p.scaled(-(2.0 * pi * pi + 1.0 / (2.0 * pi * pi))).plus(SineSeries({}, -0.6));
        pb.desired_state = y_d.scalar();
        pb.source = constant_field(0.0);
        pb.source_laplacian = constant_field(0.0);
        pb.integral = IntegralControlConstraints{0.0, 0.0};
        pb.exact = ExactSolution{y.field(), p.scaled(-1.0).scalar(), p.scalar(), true};
        break;
    }
    case 4: {
        pb.name = "ex4";
        pb.domain = {0.0, 0.0, 1.0, 1.0};
        pb.beta = 0.01;
        pb.desired_state = [](Point2 x) { return 10.0 * (std::sin(pi * x.x) + std::sin(pi * x.y)); };
        pb.source = constant_field(0.0);
        pb.source_laplacian = constant_field(0.0);
        pb.pointwise = PointwiseControlConstraints{0.0, constant_field(0.0), constant_field(30.0)};
        break;
    }
    default:
        throw ProblemError("unknown example id " + std::to_string(id));
    }
    pb.validate();
    return pb;
}

ProblemSpec manufactured(std::uint64_t seed, ManufacturedVariant variant, double* state_multiplier)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_real_distribution<double> positive(0.5, 1.5);

    ProblemSpec pb;
    pb.name = variant == ManufacturedVariant::inactive ? "manufactured" : "manufactured-active";
    pb.domain = {0.0, 0.0, 1.0, 1.0};
    pb.beta = positive(rng);

    std::vector<SineSeries::Term> y_terms;
    for (int a = 1; a <= 2; ++a) {
        for (int b = 1; b <= 2; ++b) {
            y_terms.push_back({coef(rng), static_cast<double>(a), static_cast<double>(b)});
        }
    }
    const SineSeries y(std::move(y_terms));
    const SineSeries f({{coef(rng), 1, 1}, {coef(rng), 2, 1}});
    const double mu = variant == ManufacturedVariant::inactive ? 0.0 : positive(rng);
    if (state_multiplier != nullptr) {
        *state_multiplier = mu;
    }

    // stationarity: beta Lap^2 y + y = y_d + mu - beta Lap f, and the natural
    // boundary condition Lap y + f = 0 holds because every mode vanishes there
    const SineSeries lap_y = y.laplacian_series();
    const SineSeries lap_f = f.laplacian_series();
    const SineSeries y_d =
        lap_y.laplacian_series().scaled(pb.beta).plus(lap_f.scaled(pb.beta)).plus(y).plus(SineSeries({}, -mu));
    const SineSeries u = lap_y.scaled(-1.0).plus(f.scaled(-1.0));

    pb.desired_state = y_d.scalar();
    pb.source = f.scalar();
    pb.source_laplacian = lap_f.scalar();
    const double y_mean = y.integral(pb.domain);
    const double u_mean = u.integral(pb.domain);
    if (variant == ManufacturedVariant::inactive) {
        pb.integral = IntegralControlConstraints{u_mean - 10.0, y_mean - 10.0};
    } else {
        pb.integral = IntegralControlConstraints{u_mean - 10.0, y_mean};
    }
    pb.exact = ExactSolution{y.field(), u.scalar(), {}, true};
    pb.validate();
    return pb;
}

ProblemSpec problem_by_name(const std::string& name, std::uint64_t seed)
{
    if (name.size() == 3 && name.starts_with("ex") && name[2] >= '1' && name[2] <= '4') {
        return example(name[2] - '0');
    }
    if (name == "manufactured") {
        return manufactured(seed, ManufacturedVariant::inactive);
    }
    if (name == "manufactured-active") {
        return manufactured(seed, ManufacturedVariant::state_active);
    }
    throw ProblemError("unknown problem '" + name + "'");
}

}  // namespace morley

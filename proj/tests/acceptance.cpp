// Acceptance run: prints one PASS/FAIL line per criterion.
//
//   acceptance [--strict]
//
// The exit status is 0 once every criterion has been evaluated; with --strict
// any FAIL also gives exit status 1.

#include "morley/run_io.hpp"

#include "helpers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>

using namespace morley;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& why)
    {
        if (!ok) {
            if (pass) {
                detail << " first failure: " << why << ';';
            }
            pass = false;
        }
    }
};

void report(int id, Verdict& v)
{
    std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << " " << v.detail.str() << std::endl;
}

std::string num(double x)
{
    std::ostringstream s;
    s.precision(4);
    s << x;
    return s.str();
}

double rel_max(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    return (a - b).lpNorm<Eigen::Infinity>() / std::max(1.0, b.lpNorm<Eigen::Infinity>());
}

AdaptiveResult run_example(int id, Index max_dofs)
{
    AdaptConfig config;
    config.theta = 0.3;
    config.max_dofs = max_dofs;
    const auto start = std::chrono::steady_clock::now();
    AdaptiveResult r = adaptive_solve(example(id), config);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cerr << "ex" << id << ": " << r.records.size() << " iterations, " << r.records.back().dofs << " dofs, "
              << num(secs) << " s\n";
    return r;
}

double energy(const IterationRecord& r) { return r.energy_error.value_or(std::nan("")); }

// Criterion 4: library against the dense oracle on small random meshes.
void oracle_equivalence(Verdict& v)
{
    std::mt19937_64 rng(20261019);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_a = 0.0;
    double worst_eta = 0.0;
    double worst_i = 0.0;
    double worst_ii = 0.0;

    for (int trial = 0; trial < 10; ++trial) {
        const ProblemSpec p = testing::polynomial_problem(rng);
        auto mesh = std::make_shared<const Mesh>(testing::random_mesh(rng, p.domain, 16));
        const FeSpace space(mesh);
        const oracle::Discretisation d(oracle::from_library(*mesh, p.domain));
        const auto map = testing::oracle_indices(space, d);
        const Index n = space.num_dofs();

        // (a) matrix entries
        const Eigen::MatrixXd lib(assemble_matrix(space, p.beta));
        const Eigen::MatrixXd ref = d.matrix(p.beta);
        const double scale = testing::max_abs(ref);
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                worst_a = std::max(worst_a, std::abs(lib(i, j) - ref(map[i], map[j])) / scale);
            }
        }

        // (b) estimator terms for a random discrete function
        Eigen::VectorXd y(n);
        Eigen::VectorXd y_ref(n);
        for (Index i = 0; i < n; ++i) {
            y[i] = g(rng);
            y_ref[map[i]] = y[i];
        }
        const double mu = std::abs(g(rng));
        Eigen::VectorXd lambda(mesh->num_elements());
        for (Index t = 0; t < lambda.size(); ++t) {
            lambda[t] = g(rng);
        }
        const ElementTerms el = eta_interior(space, y, mu, lambda, p);
        const EdgeTerms ed = eta_edges(space, y, p.beta);
        const auto est = d.estimate(y_ref, mu, std::vector<double>(lambda.data(), lambda.data() + lambda.size()),
                                    testing::oracle_problem(p));
        // indicators compared as norms, i.e. square roots of the stored squares
        auto track = [&](double a, double b) {
            worst_eta = std::max(worst_eta, std::abs(std::sqrt(a) - std::sqrt(b)) / std::sqrt(b));
        };
        for (Index t = 0; t < mesh->num_elements(); ++t) {
            track(el.eta1[t], est.eta1[t]);
            track(el.eta5[t], est.eta5[t]);
        }
        for (Index e = 0; e < mesh->num_edges(); ++e) {
            const Edge& edge = mesh->edge(e);
            if (edge.boundary) {
                continue;
            }
            const auto& r = est.edges.at({edge.endpoints[0], edge.endpoints[1]});
            track(ed.eta2[e], r[0]);
            track(ed.eta3[e], r[1]);
            track(ed.eta4[e], r[2]);
        }

        // (c) integral constraints: candidate enumeration and projected gradient
        const LinearSystem sys = assemble_system(space, p);
        ConstraintSet c = assemble_constraints(space, p);
        const Eigen::VectorXd free = solve_spd(sys.matrix, sys.rhs);
        c.state_bound = c.state_row.dot(free) * (0.5 + u(rng));
        c.control_bound = c.control_row.dot(free) + (u(rng) - 0.5) * std::abs(c.control_row.dot(free));
        const ViSolution sol = solve_case_i(sys.matrix, sys.rhs, c);
        const Eigen::MatrixXd a(sys.matrix);
        Eigen::MatrixXd rows(2, n);
        rows.row(0) = c.state_row.transpose();
        rows.row(1) = c.control_row.transpose();
        const Eigen::Vector2d bounds(c.state_bound, c.control_bound);
        bool found = false;
        for (int mask = 0; mask < 4; ++mask) {
            std::vector<int> act;
            for (int k = 0; k < 2; ++k) {
                if (mask & (1 << k)) {
                    act.push_back(k);
                }
            }
            Eigen::MatrixXd r(act.size(), n);
            Eigen::VectorXd tv(act.size());
            for (std::size_t k = 0; k < act.size(); ++k) {
                r.row(k) = rows.row(act[k]);
                tv[k] = bounds[act[k]];
            }
            Eigen::VectorXd x;
            Eigen::VectorXd nu;
            oracle::equality_qp(a, sys.rhs, r, tv, x, nu);
            bool ok = (nu.array() >= -1e-10).all();
            for (int k = 0; k < 2; ++k) {
                ok = ok && rows.row(k).dot(x) >= bounds[k] - 1e-10 * std::max(1.0, std::abs(bounds[k]));
            }
            if (ok && !found) {
                found = true;
                worst_i = std::max(worst_i, rel_max(sol.y, x));
            }
        }
        v.require(found, "no enumeration candidate passed");
        worst_i = std::max(worst_i, rel_max(sol.y, oracle::projected_gradient(a, sys.rhs, rows, bounds, 200000)));

        // (d) pointwise constraints on a four-element mesh
        ProblemSpec q = example(4);
        q.beta = 0.01 + u(rng);
        const Square sq = testing::random_square(rng);
        q.domain = sq;
        auto small = std::make_shared<const Mesh>(initial_mesh(sq, 1));
        const FeSpace s4(small);
        const LinearSystem sys4 = assemble_system(s4, q);
        ConstraintSet c4 = assemble_constraints(s4, q);
        const Eigen::VectorXd free4 = solve_spd(sys4.matrix, sys4.rhs);
        const Eigen::VectorXd values = c4.element_rows * free4;
        for (Index t = 0; t < c4.num_elements(); ++t) {
            const double width = 0.5 * std::abs(values[t]) + 0.1;
            c4.lower[t] = values[t] - width * (2.0 * u(rng) - 0.5);
            c4.upper[t] = c4.lower[t] + width * (0.2 + u(rng));
        }
        c4.state_bound = c4.state_row.dot(free4) * (0.5 + u(rng));
        const ViSolution sol4 = solve_case_ii(sys4.matrix, sys4.rhs, c4);
        const oracle::BoxResult box =
            oracle::enumerate_box(Eigen::MatrixXd(sys4.matrix), sys4.rhs, c4.state_row, c4.state_bound,
                                  Eigen::MatrixXd(c4.element_rows), c4.lower, c4.upper, 1e-10);
        v.require(box.candidates_passing >= 1, "no box candidate passed");
        if (box.candidates_passing >= 1) {
            worst_ii = std::max({worst_ii, rel_max(sol4.y, box.x), rel_max(sol4.element_lambda, box.lambda),
                                 std::abs(sol4.mu - box.mu) / std::max(1.0, std::abs(box.mu))});
        }
    }
    v.require(worst_a <= 1e-12, "matrix deviation " + num(worst_a));
    v.require(worst_eta <= 1e-12, "estimator deviation " + num(worst_eta));
    v.require(worst_i <= 1e-8, "case i deviation " + num(worst_i));
    v.require(worst_ii <= 1e-8, "case ii deviation " + num(worst_ii));
    v.detail << " matrix " << num(worst_a) << ", eta " << num(worst_eta) << ", case i " << num(worst_i)
             << ", case ii " << num(worst_ii);
}

// Criterion 6: integral identities of the interpolant and I_h K in K_h.
void interpolation(Verdict& v)
{
    std::mt19937_64 rng(6);
    const Square unit{0.0, 0.0, 1.0, 1.0};
    Mesh m = initial_mesh(unit, 2);
    for (int k = 0; k < 12; ++k) {
        std::uniform_int_distribution<Index> pick(0, m.num_elements() - 1);
        const Index marked[] = {pick(rng), pick(rng), pick(rng)};
        m = bisect(m, marked);
    }
    auto mesh = std::make_shared<const Mesh>(m);
    const FeSpace space(mesh);
    const ConstraintSet rows = assemble_constraints(space, example(4));

    const std::vector<SineSeries> functions = {
        SineSeries({{1.0, 1, 1}}),
        SineSeries({{0.5, 2, 1}, {-0.2, 1, 3}}),
        SineSeries({{0.3, 3, 3}}),
        SineSeries({{1.0, 1, 2}, {0.4, 4, 1}, {-0.1, 2, 2}}),
        SineSeries({{-0.7, 5, 2}, {0.2, 1, 1}}),
    };
    double worst = 0.0;
    std::vector<oracle::Vec> qp;
    std::vector<double> qw;
    for (const auto& xi : functions) {
        const Eigen::VectorXd c = space.interpolate(xi.field());
        const double exact = xi.integral(unit);
        worst = std::max(worst, std::abs(rows.state_row.dot(c) - exact) / std::max(1.0, std::abs(exact)));
        for (Index t = 0; t < mesh->num_elements(); ++t) {
            const auto& tv = mesh->element(t).vertices;
            std::array<oracle::Vec, 3> tri;
            for (int i = 0; i < 3; ++i) {
                tri[i] = {mesh->vertex(tv[i]).x, mesh->vertex(tv[i]).y};
            }
            oracle::triangle_quadrature(tri, 12, qp, qw);
            double lap = 0.0;
            for (std::size_t q = 0; q < qp.size(); ++q) {
                lap += qw[q] * xi.laplacian({qp[q].x(), qp[q].y()});
            }
            worst = std::max(worst, std::abs(rows.element_rows.row(t).dot(c) + lap) / std::max(1.0, std::abs(lap)));
        }
    }
    v.require(worst <= 1e-10, "identity deviation " + num(worst));

    // members of K for the pointwise bounds 0 <= -Laplacian(xi) <= 30 and int xi >= 0
    int members = 0;
    for (const double amp : {0.1, 0.5, 1.0, 1.4, 1.5}) {
        const SineSeries xi({{amp, 1, 1}});
        const ProblemSpec p = example(4);
        const ConstraintSet cs = assemble_constraints(space, p);
        const Eigen::VectorXd c = space.interpolate(xi.field());
        const Eigen::VectorXd u = cs.element_rows * c;
        bool inside = cs.state_row.dot(c) >= cs.state_bound;
        for (Index t = 0; t < cs.num_elements(); ++t) {
            const double tol = 1e-10 * std::max(1.0, std::abs(cs.upper[t]));
            inside = inside && u[t] >= cs.lower[t] - tol && u[t] <= cs.upper[t] + tol;
        }
        members += inside;
    }
    // and for the integral bounds of the first example
    for (const double amp : {0.5, 1.0, 2.0, 3.0, 4.0}) {
        const ProblemSpec p = example(1);
        const ConstraintSet cs = assemble_constraints(space, p);
        const SineSeries xi({{amp, 1, 1}});
        const Eigen::VectorXd c = space.interpolate(xi.field());
        // int xi and int -Laplacian(xi) - f are both above their bounds
        const bool in_k = xi.integral(unit) >= p.integral->delta2 &&
                          xi.laplacian_series().scaled(-1.0).integral(unit) >= cs.control_bound;
        if (in_k) {
            members += cs.state_row.dot(c) >= cs.state_bound - 1e-10 && cs.control_row.dot(c) >= cs.control_bound - 1e-10;
        } else {
            v.require(false, "test function outside K");
        }
    }
    v.require(members == 10, std::to_string(members) + " of 10 interpolants in K_h");
    v.detail << " max deviation " << num(worst) << ", " << members << "/10 interpolants in K_h";
}

// Criterion 7: random newest vertex bisection stress test.
void mesh_stress(Verdict& v)
{
    std::mt19937_64 rng(7);
    const Square unit{0.0, 0.0, 1.0, 1.0};
    Mesh m = initial_mesh(unit, 2);
    double min_angle = 90.0;
    double area_error = 0.0;
    for (int it = 0; it < 200; ++it) {
        std::uniform_int_distribution<Index> pick(0, m.num_elements() - 1);
        std::vector<Index> marked;
        // a few random elements, plus a focus near one corner to force deep refinement
        for (int k = 0; k < 2; ++k) {
            marked.push_back(pick(rng));
        }
        for (Index t = 0; t < m.num_elements(); ++t) {
            const auto& tv = m.element(t).vertices;
            if (m.vertex(tv[0]).x + m.vertex(tv[0]).y < 1e-12 && m.element(t).generation < 40) {
                marked.push_back(t);
            }
        }
        m = bisect(m, marked);
        const std::string audit = conformity_audit(m);
        v.require(audit.empty(), "iteration " + std::to_string(it) + ": " + audit);
        min_angle = std::min(min_angle, min_angle_degrees(m));
        area_error = std::max(area_error, std::abs(m.total_area() - unit.area()) / unit.area());
    }
    v.require(min_angle >= 10.0, "min angle " + num(min_angle));
    v.require(area_error <= 1e-12, "area error " + num(area_error));
    v.detail << " " << m.num_elements() << " elements, min angle " << num(min_angle) << " deg, area error "
             << num(area_error);
}

int run_cli(const std::string& args)
{
    const std::string cmd = "MORLEY_OCP_THREADS=1 " + std::string(MORLEY_OCP_BINARY) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

int main(int argc, char** argv)
{
    const bool strict = argc > 1 && std::string(argv[1]) == "--strict";
    Eigen::setNbThreads(1);
    int failed = 0;
    auto finish = [&](int id, Verdict& v) {
        report(id, v);
        failed += !v.pass;
    };

    try {
        const AdaptiveResult ex1 = run_example(1, 30000);
        const AdaptiveResult ex2 = run_example(2, 30000);
        const AdaptiveResult ex3 = run_example(3, 30000);
        const AdaptiveResult ex4 = run_example(4, 20000);

        {
            Verdict v;
            const double se = fit_slope(ex1.records, [](const IterationRecord& r) { return r.eta_h; }, 6);
            const double sr = fit_slope(ex1.records, energy, 6);
            v.require(ex1.records.back().dofs >= 30000, "stopped below 3e4 DoFs");
            v.require(se >= -0.6 && se <= -0.4, "eta_h slope " + num(se));
            v.require(sr >= -0.6 && sr <= -0.4, "error slope " + num(sr));
            v.detail << " ex1 dofs " << ex1.records.back().dofs << ", eta_h slope " << num(se) << ", error slope "
                     << num(sr);
            finish(1, v);
        }
        {
            Verdict v;
            for (const auto* r : {&ex1, &ex3}) {
                const auto& rec = r->records;
                double lo = INFINITY;
                double hi = 0.0;
                for (std::size_t k = rec.size() - std::min<std::size_t>(5, rec.size()); k < rec.size(); ++k) {
                    lo = std::min(lo, rec[k].efficiency_index.value_or(NAN));
                    hi = std::max(hi, rec[k].efficiency_index.value_or(NAN));
                }
                const std::string name = r == &ex1 ? "ex1" : "ex3";
                v.require(hi / lo <= 2.0, name + " band " + num(hi / lo));
                v.detail << " " << name << " index in [" << num(lo) << ", " << num(hi) << "], ratio " << num(hi / lo)
                         << ';';
            }
            finish(2, v);
        }
        {
            Verdict v;
            for (const auto* r : {&ex1, &ex2, &ex3}) {
                const std::string name = r == &ex1 ? "ex1" : r == &ex2 ? "ex2" : "ex3";
                int bad = -1;
                double ratio = INFINITY;
                for (const auto& rec : r->records) {
                    ratio = std::min(ratio, rec.eta_h / energy(rec));
                    if (bad < 0 && !(rec.eta_h >= energy(rec))) {
                        bad = rec.iteration;
                    }
                }
                v.require(bad < 0, name + " eta_h < error at iteration " + std::to_string(bad));
                v.detail << " " << name << " min eta_h/error " << num(ratio)
                         << (bad < 0 ? "" : " (first below 1 at iteration " + std::to_string(bad) + ")") << ';';
            }
            finish(3, v);
        }
        {
            Verdict v;
            oracle_equivalence(v);
            finish(4, v);
        }
        {
            Verdict v;
            int solves = 0;
            double worst_stat = 0.0;
            double worst_other = 0.0;
            for (const auto* r : {&ex1, &ex2, &ex3, &ex4}) {
                for (const auto& rec : r->records) {
                    ++solves;
                    worst_stat = std::max(worst_stat, rec.kkt.stationarity);
                    worst_other = std::max({worst_other, rec.kkt.feasibility, rec.kkt.complementarity,
                                            rec.kkt.sign_violation});
                    v.require(rec.kkt.certified(), "uncertified solve at iteration " + std::to_string(rec.iteration));
                }
            }
            v.detail << " " << solves << " solves, max stationarity " << num(worst_stat)
                     << ", max feasibility/complementarity/sign " << num(worst_other);
            finish(5, v);
        }
        {
            Verdict v;
            interpolation(v);
            finish(6, v);
        }
        {
            Verdict v;
            mesh_stress(v);
            finish(7, v);
        }
        {
            Verdict v;
            const double s = fit_slope(ex4.records, [](const IterationRecord& r) { return r.eta_h; }, 6);
            bool certified = true;
            for (const auto& rec : ex4.records) {
                certified = certified && rec.kkt.certified();
            }
            v.require(ex4.records.back().dofs >= 20000, "stopped below 2e4 DoFs");
            v.require(s <= -0.3, "eta_h slope " + num(s));
            v.require(certified, "uncertified solve");
            const auto& last = ex4.records.back();
            v.detail << " ex4 dofs " << last.dofs << ", eta_h slope " << num(s) << ", eta1..eta5 = " << num(last.eta[0])
                     << " " << num(last.eta[1]) << " " << num(last.eta[2]) << " " << num(last.eta[3]) << " "
                     << num(last.eta[4]);
            finish(8, v);
        }
        {
            Verdict v;
            const fs::path dir = fs::temp_directory_path() / ("morley_acceptance_" + std::to_string(::getpid()));
            const std::string common = " --max-dofs 5000 --quiet --out ";
            int rc = 0;
            rc |= run_cli("solve --problem ex1" + common + (dir / "a1").string());
            rc |= run_cli("solve --problem ex1" + common + (dir / "a2").string());
            rc |= run_cli("solve --problem ex4" + common + (dir / "b1").string());
            rc |= run_cli("solve --problem ex4" + common + (dir / "b2").string());
            v.require(rc == 0, "solver run failed");
            int identical = 0;
            for (const char* f : {"convergence.csv", "indicators_final.csv"}) {
                identical += slurp(dir / "a1" / f) == slurp(dir / "a2" / f) && !slurp(dir / "a1" / f).empty();
                identical += slurp(dir / "b1" / f) == slurp(dir / "b2" / f) && !slurp(dir / "b1" / f).empty();
            }
            v.require(identical == 4, "outputs differ between repeats");
            v.detail << " " << identical << "/4 CSV files byte-identical across repeats";
            fs::remove_all(dir);
            finish(9, v);
        }
    } catch (const std::exception& e) {
        std::cout << "acceptance aborted: " << e.what() << std::endl;
        return 2;
    }
    std::cout << (9 - failed) << " of 9 criteria passed" << std::endl;
    return strict && failed > 0 ? 1 : 0;
}

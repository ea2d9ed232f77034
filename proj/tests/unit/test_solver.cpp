#include <cmath>
#include <numbers>
#include <string>

#include "doctest.h"
#include "llab/error.hpp"
#include "llab/solver.hpp"

using llab::Scenario;

namespace {

Scenario make(const std::string& text) { return llab::parse_scenario(llab::parse_json_text(text)); }

double max_error(const Scenario& s, const llab::ScalarField& u, std::size_t level, double (*exact)(double, double, double)) {
    const auto& g = s.grid.space;
    double m = 0.0;
    for (std::size_t k = 0; k < g.node_count(); ++k)
        m = std::max(m, std::fabs(u.at(level, k) - exact(g.coord(k, 0), g.coord(k, 1), s.grid.time(level))));
    return m;
}

}  // namespace

TEST_CASE("affine data is a steady state") {
    const auto s = make(R"J({"domain": {"lower": [0,0], "upper": [1,1]}, "grid": {"nodes": 17, "T": 0.1, "steps": 5},
                          "p": 3, "nu": 0.5, "f": "0", "g": "2*x1 + x2", "epsilon_schedule": [0.001]})J");
    const auto r = llab::solve_cauchy_dirichlet(s, 0.001);
    double m = 0.0;
    for (std::size_t l = 0; l <= s.grid.steps; ++l)
        for (std::size_t k = 0; k < s.grid.space.node_count(); ++k)
            m = std::max(m, std::fabs(r.u.at(l, k) - (2 * s.grid.space.coord(k, 0) + s.grid.space.coord(k, 1))));
    CHECK(m <= 1e-12);
    CHECK(r.weak_form.pass);
}

TEST_CASE("Dirichlet values are reproduced bit-exactly") {
    const auto s = make(R"J({"grid": {"nodes": 17, "T": 0.2, "steps": 4}, "p": 2.5, "nu": 0.3,
                          "f": "sin(3*x1)*t", "g": "x1*x2 + t*x1^2", "epsilon_schedule": [0.01]})J");
    const auto r = llab::solve_cauchy_dirichlet(s, 0.01);
    for (std::size_t l = 0; l <= s.grid.steps; ++l)
        for (std::size_t k = 0; k < s.grid.space.node_count(); ++k)
            if (l == 0 || s.grid.space.on_boundary(k)) CHECK(r.u.at(l, k) == s.g.at(s.grid, l, k));
}

TEST_CASE("stagnant bump moves by at most O(epsilon)") {
    // |D g| < nu everywhere, so only the epsilon part of the flux acts.
    const double eps = 1e-3;
    const auto s = make(R"J({"grid": {"nodes": 33, "T": 1, "steps": 20}, "p": 2, "nu": 1,
                          "f": "0", "g": "0.2*exp(-20*((x1-0.5)^2 + (x2-0.5)^2))", "epsilon_schedule": [0.001]})J");
    const auto r = llab::solve_cauchy_dirichlet(s, eps);
    double drift = 0.0;
    for (std::size_t k = 0; k < s.grid.space.node_count(); ++k)
        drift = std::max(drift, std::fabs(r.u.at(s.grid.steps, k) - r.u.at(0, k)));
    // heat-equation maximum principle: |u(T) - u(0)| <= eps T max|Lap g| = 16 eps
    CHECK(drift <= 16.0 * eps * 1.5);
    CHECK(drift > 0.0);
}

TEST_CASE("manufactured solution (1+t) x1^2 / 2 with p = 2, nu = 0") {
    // u_t - (1 + eps) Lap u = x1^2/2 - (1 + eps)(1 + t)
    const double eps = 0.01;
    double prev = 0.0;
    for (int n : {17, 33}) {
        const auto s = make(R"J({"grid": {"nodes": )J" + std::to_string(n) +
                            R"J(, "T": 0.5, "steps": 10}, "p": 2, "nu": 0, "mollify": false,
                            "f": "x1^2/2 - 1.01*(1+t)", "g": "(1+t)*x1^2/2", "epsilon_schedule": [0.01]})J");
        const auto r = llab::solve_cauchy_dirichlet(s, eps);
        const double err =
            max_error(s, r.u, s.grid.steps, [](double x, double, double t) { return (1 + t) * x * x / 2; });
        CHECK(err < 0.02);
        if (prev > 0.0) CHECK(std::log2(prev / err) >= 0.9);
        prev = err;
        CHECK(r.weak_form.pass);
    }
}

TEST_CASE("heat equation oracle") {
    // p = 2, nu = 0: u_t = (1 + eps) Lap u, u = exp(-2(1+eps)t) sin x1 sin x2
    const double eps = 1e-4;
    double prev = 0.0;
    for (int n : {17, 33}) {
        const int steps = (n - 1) * 2;
        const auto s = make(R"J({"domain": {"lower": [0,0], "upper": [3.141592653589793, 3.141592653589793]},
                              "grid": {"nodes": )J" + std::to_string(n) + R"J(, "T": 0.25, "steps": )J" +
                            std::to_string(steps) + R"J(}, "p": 2, "nu": 0, "mollify": false, "f": "0",
                            "g": "exp(-2.0002*t)*sin(x1)*sin(x2)", "epsilon_schedule": [0.0001]})J");
        const auto r = llab::solve_cauchy_dirichlet(s, eps);
        const double err = max_error(s, r.u, s.grid.steps, [](double x, double y, double t) {
            return std::exp(-2.0002 * t) * std::sin(x) * std::sin(y);
        });
        CHECK(err < 0.05);
        if (prev > 0.0) CHECK(std::log2(prev / err) >= 0.9);
        prev = err;
    }
}

TEST_CASE("Newton converges and damping keeps residuals monotone") {
    const auto s = make(R"J({"grid": {"nodes": 17, "T": 0.2, "steps": 4}, "p": 3, "nu": 0.5,
                          "f": "20*sin(6*x1)*cos(5*x2)", "g": "3*x1^2 - x2", "epsilon_schedule": [0.001]})J");
    const auto r = llab::solve_cauchy_dirichlet(s, 0.001);
    for (const auto& st : r.steps) {
        CHECK(st.final_residual <= st.tolerance);
        CHECK(st.final_residual <= st.initial_residual);
    }
    CHECK(r.total_newton_iterations() > 0);
    CHECK(r.weak_form.pass);
}

TEST_CASE("Picard fallback and step failure") {
    auto s = make(R"J({"grid": {"nodes": 17, "T": 0.2, "steps": 2}, "p": 3, "nu": 0.5,
                    "f": "5*x1", "g": "x1^2", "epsilon_schedule": [0.01]})J");
    s.newton.max_iterations = 1;
    const auto r = llab::solve_cauchy_dirichlet(s, 0.01);
    for (const auto& st : r.steps) {
        CHECK(st.fell_back);
        CHECK(st.picard_iterations > 0);
        CHECK(st.final_residual <= st.tolerance);
    }
    s.newton.picard_fallback = false;
    try {
        (void)llab::solve_cauchy_dirichlet(s, 0.01);
        FAIL("expected StepFailure");
    } catch (const llab::StepFailure& e) {
        CHECK(e.level() == 1);
        CHECK(e.epsilon() == 0.01);
        CHECK(e.residual() > 0.0);
    }
    CHECK_THROWS_AS(llab::solve_cauchy_dirichlet(s, 0.0), llab::ParameterError);
}

TEST_CASE("single step agrees with the marching solver") {
    const auto s = make(R"J({"grid": {"nodes": 9, "T": 0.2, "steps": 2}, "p": 2.5, "nu": 0.2,
                          "f": "1", "g": "x1*x2", "epsilon_schedule": [0.05]})J");
    const auto r = llab::solve_cauchy_dirichlet(s, 0.05);
    const auto u1 = llab::step_implicit(r.u.slice(0), 1, s, r.f_eps, 0.05);
    for (std::size_t k = 0; k < u1.size(); ++k) CHECK(u1[k] == r.u.at(1, k));
}

TEST_CASE("continuation records monotone comparison quantities") {
    const auto s = make(R"J({"domain": {"lower": [-1,-1], "upper": [1,1]}, "grid": {"nodes": 17, "T": 0.25, "steps": 5},
                          "p": 2, "nu": 1, "f": "4*exp(-8*(x1^2+x2^2))", "g": "1.5*(x1^2+x2^2)",
                          "epsilon_schedule": [0.1, 0.025, 0.00625]})J");
    const auto c = llab::continuation_solve(s);
    REQUIRE(c.solves.size() == 3);
    REQUIRE(c.pairs.size() == 2);
    CHECK(c.grad_lp.size() == 3);
    for (const auto& p : c.pairs) {
        CHECK(p.monotone_ok);
        CHECK(p.sup_l2_sq >= 0.0);
        CHECK(p.h_half_l2_sq >= 0.0);
    }
    CHECK(c.pairs[1].sup_l2_sq < c.pairs[0].sup_l2_sq);
    for (const auto& r : c.solves) CHECK(r.weak_form.pass);
}

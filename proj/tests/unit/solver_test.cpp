#include "isotherm/error.hpp"
#include "isotherm/solver.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <doctest.h>

#include <cmath>

using namespace isotherm;

namespace {

DomainSpec half_line() { return DomainSpec::halfspace(make_point({1.0}), 0.0); }
DomainSpec unit_disk() { return DomainSpec::ball(make_point({0.0, 0.0}), 1.0); }

double F(double xi) { return 0.5 * std::erfc(0.5 * xi); }

// 1 - u for the unit disk with u = 1 on the boundary: separation of variables.
double disk_center_oracle(double t, int modes)
{
    double s = 0.0;
    for (int k = 1; k <= modes; ++k) {
        const double j = boost::math::cyl_bessel_j_zero(0.0, k);
        s += 2.0 / (j * boost::math::cyl_bessel_j(1, j)) * std::exp(-j * j * t);
    }
    return 1.0 - s;
}

double max_rel_error(const SolutionSeries& s, double t, bool cauchy)
{
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < s.grid.node_count(); ++i) {
        const double x = s.grid.position(i)[0];
        if (x < 0.1 - 1e-12 || x > 1.0 + 1e-12) continue;
        const double exact = cauchy ? F(x / std::sqrt(t)) : std::erfc(x / (2.0 * std::sqrt(t)));
        err = std::max(err, std::abs(s.at(t).values[i] - exact));
        scale = std::max(scale, exact);
    }
    return err / scale;
}

}  // namespace

TEST_CASE("time grid contains the schedule")
{
    TimeStepping st;
    st.steps_per_doubling = 4;
    const std::vector<double> sched{0.01, 0.03, 0.04};
    const auto g = time_grid(sched, st, 0.1);
    for (std::size_t k = 1; k < g.size(); ++k) CHECK(g[k] > g[k - 1]);
    CHECK(g.back() == 0.04);
    for (double t : sched) CHECK(std::find(g.begin(), g.end(), t) != g.end());
    st.steps_per_doubling_per_inv_h = 0.5;
    CHECK(st.steps_per_level(1.0 / 512.0) == 256);
}

TEST_CASE("1D half-line IBVP against erfc")
{
    const auto g = GridSpec::covering(make_point({0.0}), make_point({1.0}), 1.0 / 512.0);
    TimeStepping st;
    st.steps_per_doubling_per_inv_h = 0.5;
    const auto s = solve_ibvp(half_line(), Nonlinearity::identity(), g, {0.0025, 0.01}, st);
    CHECK(max_rel_error(s, 0.01, false) < 1e-3);
    // Half-node probe.
    const double x = 0.3 + 0.5 / 512.0;
    CHECK(std::abs(probe(s, make_point({x}), 0.01) - std::erfc(x / 0.2)) < 1e-3);
}

TEST_CASE("1D half-line Cauchy problem against F")
{
    const auto g = GridSpec::covering(make_point({-1.0}), make_point({1.5}), 1.0 / 512.0);
    TimeStepping st;
    st.steps_per_doubling_per_inv_h = 0.5;
    const auto s = solve_cauchy(half_line(), Nonlinearity::identity(), g, {0.01}, st);
    CHECK(max_rel_error(s, 0.01, true) < 1e-3);
}

TEST_CASE("Cauchy margin is checked")
{
    const auto g = GridSpec::covering(make_point({-0.1}), make_point({0.1}), 1.0 / 128.0);
    try {
        solve_cauchy(half_line(), Nonlinearity::identity(), g, {0.01});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::configuration);
    }
}

TEST_CASE("disk IBVP: range, positivity and the Bessel oracle")
{
    // The centre value is small at t = 0.05, so the backward Euler error
    // needs short steps; the spatial error is already below 1e-4 at h = 1/128.
    const auto g = GridSpec::covering(make_point({-1.0, -1.0}), make_point({1.0, 1.0}), 1.0 / 128.0);
    TimeStepping st;
    st.pre_levels = 1;
    st.steps_per_doubling = 512;
    const auto s = solve_ibvp(unit_disk(), Nonlinearity::identity(), g, {0.0125, 0.05}, st);
    for (const auto& snap : s.snapshots)
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            CHECK_MESSAGE(snap.values[i] >= 0.0, i);
            CHECK_MESSAGE(snap.values[i] <= 1.0, i);
            if (unit_disk().contains(g.position(i))) CHECK_MESSAGE(snap.values[i] > 0.0, i);
        }
    const double oracle = disk_center_oracle(0.05, 50);
    CHECK(std::abs(probe(s, make_point({0.0, 0.0}), 0.05) - oracle) / oracle < 1e-2);
    CHECK(s.diagnostics.max_range_violation <= 1e-12);
}

TEST_CASE("Cauchy disk keeps the grid's rotation symmetry")
{
    const auto g = GridSpec::covering(make_point({-1.5, -1.5}), make_point({1.5, 1.5}), 1.0 / 64.0);
    const auto s = solve_cauchy(unit_disk(), Nonlinearity::identity(), g, {0.01});
    const auto& u = s.at(0.01).values;
    const int n = g.nodes(0);
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double a = u[g.flat({i, j, 0})];
            const double b = u[g.flat({n - 1 - j, i, 0})];
            worst = std::max(worst, std::abs(a - b));
            CHECK(a >= 0.0);
            CHECK(a <= 1.0);
        }
    CHECK(worst <= 1e-12);
}

TEST_CASE("probing")
{
    const auto g = GridSpec::covering(make_point({0.0}), make_point({1.0}), 1.0 / 64.0);
    const auto s = solve_ibvp(half_line(), Nonlinearity::identity(), g, {0.01});
    const std::size_t i = 10;
    CHECK(probe(s, g.position(i), 0.01) == s.at(0.01).values[i]);
    CHECK_THROWS_AS(probe(s, make_point({1.5}), 0.01), Error);
    try {
        probe(s, make_point({0.5}), 0.02);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::schedule);
    }
}

TEST_CASE("schedule validation")
{
    const auto g = GridSpec::covering(make_point({0.0}), make_point({1.0}), 1.0 / 32.0);
    CHECK_THROWS_AS(solve_ibvp(half_line(), Nonlinearity::identity(), g, {}), Error);
    CHECK_THROWS_AS(solve_ibvp(half_line(), Nonlinearity::identity(), g, {-0.1, 0.1}), Error);
    CHECK_THROWS_AS(solve_ibvp(half_line(), Nonlinearity::identity(), g, {0.2, 0.1}), Error);
}

TEST_CASE("wavy nonlinearity converges and stays in range")
{
    const auto g = GridSpec::covering(make_point({-1.0, -1.0}), make_point({1.0, 1.0}), 1.0 / 64.0);
    const auto s = solve_ibvp(unit_disk(), Nonlinearity::wavy(), g, {0.001, 0.01});
    for (const auto& snap : s.snapshots)
        for (double v : snap.values) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    CHECK(s.diagnostics.newton_iterations >= s.diagnostics.steps);
}

TEST_CASE("ball integrals")
{
    const auto g = GridSpec::covering(make_point({-1.0, -1.0}), make_point({1.0, 1.0}), 1.0 / 128.0);
    const GridField one(g, 1.0), zero(g, 0.0);
    CHECK(ball_integral(one, make_point({0.1, -0.2}), 0.6) == doctest::Approx(pi * 0.36).epsilon(1e-3));
    CHECK(ball_integral(zero, make_point({0.1, -0.2}), 0.6) == 0.0);
    CHECK_THROWS_AS(ball_integral(one, make_point({0.8, 0.0}), 0.6), Error);

    // int_0^{2R} F(x / sqrt t) dx = sqrt(t) [xi F(xi) - exp(-xi^2/4)/sqrt(pi)].
    const double t = 0.01, R = 0.25;
    const auto g1 = GridSpec::covering(make_point({-0.5}), make_point({1.0}), 1.0 / 1024.0);
    GridField f(g1, 0.0);
    for (std::size_t i = 0; i < g1.node_count(); ++i) f[i] = F(g1.position(i)[0] / std::sqrt(t));
    auto G = [](double xi) { return xi * F(xi) - std::exp(-xi * xi / 4.0) / std::sqrt(pi); };
    const double exact = std::sqrt(t) * (G(2.0 * R / std::sqrt(t)) - G(0.0));
    CHECK(ball_integral(f, make_point({R}), R) == doctest::Approx(exact).epsilon(1e-3));
}

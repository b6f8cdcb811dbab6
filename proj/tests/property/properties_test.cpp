// Randomized and ladder-based invariants across the library. Every random
// draw comes from a fixed-seed generator so failures reproduce.
#include "isotherm/asymptotics.hpp"
#include "isotherm/comparison.hpp"
#include "isotherm/detectors.hpp"
#include "isotherm/error.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace isotherm;

namespace {

std::mt19937 rng(unsigned seed) { return std::mt19937(seed); }

double uniform(std::mt19937& g, double a, double b) { return std::uniform_real_distribution<double>(a, b)(g); }

DomainSpec disk(double r, double cx = 0.0, double cy = 0.0) { return DomainSpec::ball(make_point({cx, cy}), r); }
DomainSpec ellipse(double a, double b) { return DomainSpec::ellipsoid(make_point({0.0, 0.0}), make_point({a, b})); }

GridSpec box_grid(const DomainSpec& d, double h, double pad)
{
    auto [lo, hi] = d.boundary_box();
    lo.array() -= pad;
    hi.array() += pad;
    return GridSpec::covering(lo, hi, h);
}

SolutionSeries solve_on(const DomainSpec& omega, const Nonlinearity& n, const GridSpec& g, const std::vector<double>& sched)
{
    TimeStepping st;
    st.steps_per_doubling = 8;
    return solve_ibvp(omega, n, g, sched, st);
}

}  // namespace

TEST_SUITE("geometry")
{
    TEST_CASE("grid and sample invariants")
    {
        auto g = rng(1);
        for (int k = 0; k < 20; ++k) {
            const double h = uniform(g, 0.01, 0.2);
            const auto grid = GridSpec::covering(make_point({uniform(g, -1, 0), uniform(g, -1, 0)}),
                                                 make_point({uniform(g, 0.01, 1), uniform(g, 0.01, 1)}), h);
            CHECK(grid.h() > 0.0);
            CHECK(grid.extents[0] >= 2);
            CHECK(grid.extents[1] >= 2);
        }
        for (const auto& d : {disk(0.7), ellipse(2.0, 1.0), DomainSpec::ball(make_point({0.0, 0.0, 0.0}), 0.5)})
            for (const auto& s : sample_boundary(d, 1.0 / 32.0)) {
                CHECK(s.inward_normal.norm() == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(static_cast<int>(s.curvatures.size()) == d.dim() - 1);
            }
    }

    TEST_CASE("eikonal property inside the tubular neighbourhood")
    {
        const double h = 1.0 / 128.0;
        const DomainSpec domains[] = {disk(1.0), ellipse(2.0, 1.0), DomainSpec::annulus(make_point({0.0, 0.0}), 1.0, 2.0),
                                      DomainSpec::offset(ellipse(2.0, 1.0), 0.2)};
        for (const auto& d : domains) {
            const auto sdf = build_signed_distance(d, box_grid(d, h, 0.3));
            const double reach = tubular_radius(d.kind() == DomainKind::implicit ? ellipse(2.0, 1.0) : d) -
                                 (d.kind() == DomainKind::implicit ? 0.2 : 0.0);
            std::size_t checked = 0, bad = 0;
            for (std::size_t i = 0; i < sdf.field.values.size(); ++i) {
                if (sdf.grid().on_box_boundary(sdf.grid().unflatten(i))) continue;
                if (!(std::abs(sdf.field[i]) < reach)) continue;
                ++checked;
                const double gn = sdf.gradient_norm_at_node(i);
                if (gn < 1.0 - 10.0 * h || gn > 1.0 + 10.0 * h) ++bad;
            }
            CHECK(checked > 100);
            CHECK_MESSAGE(bad == 0, std::string(to_string(d.kind())));
        }
    }

    TEST_CASE("sign consistency on random domains")
    {
        auto g = rng(2);
        const double h = 1.0 / 64.0;
        for (int k = 0; k < 12; ++k) {
            DomainSpec d = disk(1.0);
            switch (k % 3) {
            case 0: d = disk(uniform(g, 0.2, 1.0), uniform(g, -0.5, 0.5), uniform(g, -0.5, 0.5)); break;
            case 1: d = DomainSpec::ellipsoid(make_point({uniform(g, -0.3, 0.3), 0.0}), make_point({uniform(g, 0.3, 1.2), uniform(g, 0.3, 1.2)})); break;
            default:
                d = DomainSpec::ball_union({make_point({uniform(g, -1, -0.2), 0.0}), make_point({uniform(g, 0.2, 1), 0.1})},
                                           {uniform(g, 0.2, 0.5), uniform(g, 0.2, 0.5)});
            }
            const auto sdf = build_signed_distance(d, box_grid(d, h, 0.2));
            std::size_t bad = 0;
            for (std::size_t i = 0; i < sdf.field.values.size(); ++i) {
                if (std::abs(sdf.field[i]) <= h) continue;
                if ((sdf.field[i] > 0.0) != d.contains(sdf.grid().position(i))) ++bad;
            }
            CHECK(bad == 0);
        }
    }

    TEST_CASE("curvature bound at single contact points")
    {
        auto g = rng(3);
        const double h = 1.0 / 256.0;
        const auto e = ellipse(2.0, 1.0);
        int tested = 0;
        for (int k = 0; k < 60; ++k) {
            const Point x0 = make_point({uniform(g, -1.8, 1.8), uniform(g, -0.9, 0.9)});
            if (!e.contains(x0)) continue;
            const auto tb = touching_ball(e, x0, Point::Zero(2), h);
            if (tb.contact_count != 1) continue;
            ++tested;
            const auto s = principal_curvatures(e, tb.contact);
            CHECK(s.curvatures[0] <= 1.0 / tb.radius + 10.0 * h);
        }
        CHECK(tested > 10);
    }

    TEST_CASE("parallel bodies of balls sit at distance R")
    {
        auto g = rng(4);
        const double h = 1.0 / 128.0;
        for (int k = 0; k < 8; ++k) {
            const double r = uniform(g, 0.2, 0.6), R = uniform(g, 0.1, 0.5);
            const Point c = make_point({uniform(g, -0.3, 0.3), uniform(g, -0.3, 0.3)});
            const auto body = parallel_body(DomainSpec::ball(c, r), R);
            for (const auto& s : sample_boundary(body, 4.0 * h)) CHECK(std::abs((s.point - c).norm() - r - R) <= h);
        }
    }

    TEST_CASE("reflection containment is monotone in lambda for convex sets")
    {
        auto g = rng(5);
        const auto e = ellipse(1.0, 0.5);
        const auto probe = GridSpec::covering(make_point({-1.2, -0.7}), make_point({1.2, 0.7}), 1.0 / 64.0);
        for (int k = 0; k < 6; ++k) {
            const double a = uniform(g, 0.0, pi);
            const Point dir = make_point({std::cos(a), std::sin(a)});
            bool seen = false;
            for (double lambda = -1.0; lambda <= 1.0; lambda += 1.0 / 32.0) {
                const bool c = reflection_containment(e, dir, lambda, probe);
                if (seen) CHECK_MESSAGE(c, "lambda " << lambda << " direction " << a);
                seen = seen || c;
            }
            CHECK(seen);
        }
    }
}

TEST_SUITE("diffusion_model")
{
    TEST_CASE("pressure is increasing with the log sandwich")
    {
        for (const auto& n : {Nonlinearity::identity(), Nonlinearity::wavy(), Nonlinearity::saturating()}) {
            double prev = -std::numeric_limits<double>::infinity();
            for (double e = -40.0; e <= 6.0; e += 0.5) {
                const double s = std::exp(e);
                const double p = pressure(n, s);
                CHECK(p > prev);
                prev = p;
                const double l = std::log(s);
                if (s <= 1.0) {
                    CHECK(p <= 0.0);
                    CHECK(p >= n.delta2 * l - 1e-9 * std::abs(l));
                    CHECK(p <= n.delta1 * l + 1e-9 * std::abs(l));
                } else {
                    CHECK(p >= 0.0);
                    CHECK(p >= n.delta1 * l - 1e-9 * l);
                    CHECK(p <= n.delta2 * l + 1e-9 * l);
                }
            }
        }
    }
}

TEST_SUITE("solver")
{
    TEST_CASE("comparison for nested domains and monotonicity in t")
    {
        const double h = 1.0 / 32.0;
        const auto grid = GridSpec::covering(make_point({-1.0, -1.0}), make_point({1.0, 1.0}), h);
        const std::vector<double> sched{0.005, 0.01, 0.02, 0.04};
        for (const auto& n : {Nonlinearity::identity(), Nonlinearity::wavy()}) {
            const auto small = solve_on(disk(0.8), n, grid, sched);
            const auto big = solve_on(disk(1.0), n, grid, sched);
            for (double t : sched) {
                const auto& u1 = small.at(t).values;
                const auto& u2 = big.at(t).values;
                for (std::size_t i = 0; i < grid.node_count(); ++i) {
                    if (!disk(0.8).contains(grid.position(i))) continue;
                    CHECK(u2[i] <= u1[i] + 5.0 * h);
                }
            }
            for (std::size_t k = 1; k < sched.size(); ++k) {
                const auto& a = big.at(sched[k - 1]).values;
                const auto& b = big.at(sched[k]).values;
                for (std::size_t i = 0; i < grid.node_count(); ++i) CHECK(a[i] <= b[i] + 1e-9);
            }
            for (const auto& snap : big.snapshots)
                for (double v : snap.values) {
                    CHECK(v >= 0.0);
                    CHECK(v <= 1.0);
                }
        }
    }

    TEST_CASE("halving h reduces the 1D oracle error")
    {
        const auto half = DomainSpec::halfspace(make_point({1.0}), 0.0);
        auto error = [&](double h) {
            const auto g = GridSpec::covering(make_point({0.0}), make_point({1.0}), h);
            TimeStepping st;
            st.steps_per_doubling_per_inv_h = 0.5;
            const auto s = solve_ibvp(half, Nonlinearity::identity(), g, {0.01}, st);
            double e = 0.0;
            for (std::size_t i = 0; i < g.node_count(); ++i) {
                const double x = g.position(i)[0];
                if (x < 0.1 - 1e-12 || x > 1.0) continue;
                e = std::max(e, std::abs(s.at(0.01).values[i] - std::erfc(x / 0.2)));
            }
            return e;
        };
        const double e1 = error(1.0 / 128.0), e2 = error(1.0 / 256.0);
        CHECK(e1 / e2 >= 1.8);
    }
}

TEST_SUITE("asymptotics")
{
    TEST_CASE("heat content estimator is scale free on the flat 1D Cauchy profile")
    {
        const double h = 1.0 / 4096.0, R = 0.25;
        const auto g = GridSpec::covering(make_point({-0.1}), make_point({0.6}), h);
        const std::vector<double> ladder{0.004, 0.001, 0.00025};
        SolutionSeries s{ProblemKind::cauchy, DomainSpec::halfspace(make_point({1.0}), 0.0), Nonlinearity::identity(), g, {}, {}};
        for (auto it = ladder.rbegin(); it != ladder.rend(); ++it) {
            std::vector<double> v(g.node_count());
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = profile_F(g.position(i)[0] / std::sqrt(*it));
            s.snapshots.push_back({*it, v});
        }
        const auto rep = heat_content_ladder(s, make_point({R}), R, ladder);
        REQUIRE(rep.values.size() == 3);
        // int_0^inf F = 1 / sqrt(pi); the tail beyond 2R is below 1e-20 here.
        for (double v : rep.values) CHECK(v == doctest::Approx(1.0 / std::sqrt(pi)).epsilon(1e-4));
    }

    TEST_CASE("curvature prediction increases with each curvature")
    {
        auto g = rng(6);
        const double c = heat_constant(3, ProblemKind::ibvp);
        for (int k = 0; k < 50; ++k) {
            const double R = uniform(g, 0.2, 2.0);
            std::vector<double> kap{uniform(g, -2.0, 0.9 / R), uniform(g, -2.0, 0.9 / R)};
            const double before = curvature_prediction(R, kap, c);
            const std::size_t j = static_cast<std::size_t>(k % 2);
            kap[j] += uniform(g, 0.01, 1.0 / R - kap[j]) * 0.9;
            CHECK(curvature_prediction(R, kap, c) > before);
        }
    }

    TEST_CASE("quadrature and closed-form constants agree")
    {
        for (int n : {2, 3})
            for (auto p : {ProblemKind::ibvp, ProblemKind::cauchy})
                CHECK(std::abs(heat_constant(n, p) - heat_constant_closed_form(n, p)) <= 1e-8);
    }

    TEST_CASE("reports are deterministic")
    {
        const auto d = disk(1.0);
        const auto grid = GridSpec::covering(make_point({-1.0, -1.0}), make_point({1.0, 1.0}), 1.0 / 32.0);
        const auto s = solve_on(d, Nonlinearity::identity(), grid, {0.0025, 0.01});
        const auto sdf = build_signed_distance(d, grid);
        const auto probes = distance_band_probes(d, 0.2, 0.5, 32);
        const auto a = varadhan_report(s, Nonlinearity::identity(), sdf, probes, {0.01, 0.0025});
        const auto b = varadhan_report(s, Nonlinearity::identity(), sdf, probes, {0.01, 0.0025});
        CHECK(a.to_json().dump() == b.to_json().dump());
        const auto c1 = heat_content_ladder(s, make_point({0.5, 0.0}), 0.5, {0.01, 0.0025});
        const auto c2 = heat_content_ladder(s, make_point({0.5, 0.0}), 0.5, {0.01, 0.0025});
        CHECK(c1.to_json().dump() == c2.to_json().dump());
    }
}

TEST_SUITE("comparison")
{
    TEST_CASE("shifted profiles are monotone in epsilon")
    {
        auto g = rng(7);
        for (int k = 0; k < 200; ++k) {
            double e1 = uniform(g, 0.001, 0.249), e2 = uniform(g, 0.001, 0.249);
            if (e1 > e2) std::swap(e1, e2);
            const double xi = uniform(g, -5.0, 10.0);
            CHECK(profile_F_pm(xi, e1, 1) <= profile_F_pm(xi, e2, 1));
            CHECK(profile_F_pm(xi, e1, -1) >= profile_F_pm(xi, e2, -1));
        }
    }

    TEST_CASE("t1 scales like epsilon squared")
    {
        const auto sdf = build_signed_distance(disk(1.0), GridSpec::covering(make_point({-1.2, -1.2}), make_point({1.2, 1.2}), 1.0 / 64.0));
        const double base = t1_epsilon(sdf, 0.01, 0.25);
        for (double e : {0.02, 0.05, 0.1, 0.2})
            CHECK(t1_epsilon(sdf, e, 0.25) == doctest::Approx(base * (e / 0.01) * (e / 0.01)).epsilon(1e-12));
    }

    TEST_CASE("envelope tightens as epsilon and t shrink")
    {
        const double h = 1.0 / 4096.0;
        const auto sdf = build_signed_distance(DomainSpec::halfspace(make_point({1.0}), 0.0),
                                               GridSpec::covering(make_point({-0.1}), make_point({0.3}), h));
        const double xi = 1.0;
        double prev = std::numeric_limits<double>::infinity();
        for (auto [eps, t] : {std::pair{0.2, 1e-2}, {0.1, 1e-3}, {0.05, 1e-4}, {0.02, 1e-5}}) {
            const auto cfg = BarrierConfig::make(eps, 1.0, 0.01, ProblemKind::cauchy, 0.25, 0.5);
            const auto [lo, hi] = envelope_w(sdf, cfg, t);
            const std::size_t i = static_cast<std::size_t>(std::lround((xi * std::sqrt(t) + 0.1) / h));
            const double gap = hi[i] - lo[i];
            CHECK(gap > 0.0);
            CHECK(gap < prev);
            prev = gap;
        }
        CHECK(prev < 0.05);
    }

    TEST_CASE("barrier constants are validated")
    {
        for (double e : {0.0, -0.1, 0.25, 0.3}) CHECK_THROWS_AS(BarrierConfig::make(e, 1.0, 1.0, ProblemKind::ibvp, 0.25, 0.5), Error);
        auto g = rng(8);
        for (int k = 0; k < 20; ++k) {
            const double rho0 = uniform(g, 0.05, 0.5), R = uniform(g, 0.01, 0.5);
            CHECK(BarrierConfig::make(0.1, 1.0, 1.0, ProblemKind::ibvp, rho0, R).rho1 == std::max(2.0 * R, rho0));
        }
    }
}

TEST_SUITE("detectors")
{
    TEST_CASE("balance law on radial solutions and its failure off centre")
    {
        const double h = 1.0 / 32.0;
        const auto grid = GridSpec::covering(make_point({-1.0, -1.0}), make_point({1.0, 1.0}), h);
        const std::vector<double> sched{0.01, 0.04};
        const auto radial = solve_on(disk(1.0), Nonlinearity::identity(), grid, sched);
        const auto shifted = solve_on(disk(0.9, 0.07, 0.03), Nonlinearity::identity(), grid, sched);
        double worst_off = 0.0;
        for (double t : sched)
            for (double r : {0.2, 0.5, 0.8}) {
                CHECK(moment_balance(radial, make_point({0.0, 0.0}), r, t).norm() <= 1e-10);
                if (r < 0.8) worst_off = std::max(worst_off, moment_balance(shifted, make_point({0.0, 0.0}), r, t).norm());
            }
        CHECK(worst_off > 1e-6);
    }

    TEST_CASE("constant distance holds on inner offsets")
    {
        const double h = 1.0 / 128.0, R = 0.3;
        for (const auto& d : {disk(1.0), ellipse(2.0, 1.0), DomainSpec::annulus(make_point({0.0, 0.0}), 1.0, 2.0)}) {
            const auto sdf = build_signed_distance(d, box_grid(d, h, 0.1));
            const auto c = constant_distance_test(sdf, sample_boundary(DomainSpec::offset(d, R), 2.0 * h));
            CHECK_MESSAGE(c.is_constant, std::string(to_string(d.kind())));
            CHECK(std::abs(c.radius - R) <= 3.0 * h);
        }
    }

    TEST_CASE("Monge-Ampere products are constant on balls of any radius")
    {
        auto g = rng(9);
        const double h = 1.0 / 128.0;
        for (int k = 0; k < 6; ++k) {
            const double rho = uniform(g, 0.5, 2.0), R = uniform(g, 0.1, 0.45) * rho;
            const auto d = disk(rho, uniform(g, -1, 1), uniform(g, -1, 1));
            const auto inner = DomainSpec::offset(d, R);
            CHECK(monge_ampere_test(d, sample_boundary(inner, 2.0 * h), R, 20.0 * h).is_constant);
        }
    }

    TEST_CASE("stationarity report invariants")
    {
        const double h = 1.0 / 32.0;
        const auto e = ellipse(1.0, 0.6);
        const auto s = solve_on(e, Nonlinearity::identity(), box_grid(e, h, 0.0), {0.01, 0.02});
        for (const auto& gamma : {sample_boundary(DomainSpec::offset(e, 0.2), 2.0 * h),
                                  sample_boundary(DomainSpec::ball(make_point({0.0, 0.0}), 0.3), 2.0 * h)}) {
            const auto r = stationary_surface_test(s, gamma, s.times());
            for (std::size_t k = 0; k < r.max_deviation.size(); ++k) {
                CHECK(r.max_deviation[k] >= 0.0);
                if (r.verdict) CHECK(r.max_deviation[k] <= 0.02 * r.level[k] + 1e-4);
            }
        }
    }

    TEST_CASE("a sphere verdict means every direction is symmetric about one centre")
    {
        auto g = rng(10);
        const double h = 1.0 / 128.0;
        for (int k = 0; k < 4; ++k) {
            const double r = uniform(g, 0.2, 0.5);
            const Point c = make_point({uniform(g, -0.3, 0.3), uniform(g, -0.3, 0.3)});
            const auto d = DomainSpec::ball(c, r);
            const auto v = moving_plane_scan(d, scan_directions(2, 6), box_grid(d, h, 4.0 * h));
            REQUIRE(v.classification == Classification::sphere);
            REQUIRE(v.center.has_value());
            CHECK((*v.center - c).norm() <= h);
            for (const auto& s : v.scans) {
                CHECK(s.symmetric);
                CHECK(std::abs(s.lambda_star - s.direction.dot(*v.center)) <= h);
            }
        }
    }
}

#include "isotherm/detectors.hpp"
#include "isotherm/error.hpp"

#include <doctest.h>

#include <cmath>

using namespace isotherm;

namespace {

DomainSpec disk(double r, double cx = 0.0, double cy = 0.0) { return DomainSpec::ball(make_point({cx, cy}), r); }
DomainSpec ellipse(double a, double b) { return DomainSpec::ellipsoid(make_point({0.0, 0.0}), make_point({a, b})); }

SolutionSeries coarse_solve(const DomainSpec& omega, const Point& lo, const Point& hi, double h)
{
    TimeStepping st;
    st.steps_per_doubling = 8;
    return solve_ibvp(omega, Nonlinearity::identity(), GridSpec::covering(lo, hi, h), {0.02, 0.04, 0.08}, st);
}

}  // namespace

TEST_CASE("sphere moments of a linear field")
{
    const ScalarField x1 = [](const Point& x) { return x[0]; };
    const double r = 0.7;
    const Point m2 = sphere_moment(x1, make_point({0.0, 0.0}), r, 2);
    CHECK(m2[0] == doctest::Approx(pi * r * r * r).epsilon(1e-12));
    CHECK(std::abs(m2[1]) < 1e-12);
    const Point m3 = sphere_moment(x1, make_point({0.0, 0.0, 0.0}), r, 3, 32);
    CHECK(m3[0] == doctest::Approx(4.0 * pi * std::pow(r, 4) / 3.0).epsilon(1e-10));
    CHECK(std::abs(m3[2]) < 1e-12);

    const ScalarField one = [](const Point&) { return 1.0; };
    CHECK(sphere_mean(one, make_point({0.3, 0.1}), r, 2) == doctest::Approx(2.0 * pi * r).epsilon(1e-12));
    CHECK(sphere_mean(one, make_point({0.0, 0.0, 0.0}), r, 3, 32) == doctest::Approx(4.0 * pi * r * r).epsilon(1e-12));
    CHECK_THROWS_AS(sphere_rule(4, 1.0), Error);
}

TEST_CASE("difference balance on a harmonic field")
{
    // Linear interpolation reproduces u = x + 2y, whose sphere mean is its centre value.
    const auto g = GridSpec::covering(make_point({-1.0, -1.0}), make_point({1.0, 1.0}), 1.0 / 32.0);
    SolutionSeries s{ProblemKind::cauchy, disk(0.2), Nonlinearity::identity(), g, {}, {}};
    std::vector<double> v(g.node_count());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = g.position(i)[0] + 2.0 * g.position(i)[1];
    s.snapshots.push_back({0.01, v});
    const Point p = make_point({0.3, 0.1}), q = make_point({-0.2, 0.2});
    const double r = 0.4;
    CHECK(difference_mean_balance(s, p, q, r, 0.01) == doctest::Approx(2.0 * pi * r * (0.5 - 0.2)).epsilon(1e-10));
    CHECK(mean_balance(s, p, r, 0.01) == doctest::Approx(2.0 * pi * r * 0.5).epsilon(1e-10));
    CHECK(moment_balance(s, p, r, 0.01)[1] == doctest::Approx(2.0 * pi * r * r * r).epsilon(1e-10));
    CHECK_THROWS_AS(mean_balance(s, make_point({0.9, 0.0}), r, 0.01), Error);
}

TEST_CASE("stationary surfaces on coarse solves")
{
    const double h = 1.0 / 64.0;
    const auto s = coarse_solve(disk(1.0), make_point({-1.0, -1.0}), make_point({1.0, 1.0}), h);
    const auto rep = stationary_surface_test(s, sample_boundary(disk(0.4), 2.0 * h), s.times());
    CHECK(rep.valid);
    CHECK(rep.verdict);
    CHECK(rep.level.size() == 3);

    const auto annulus = DomainSpec::annulus(make_point({0.0, 0.0}), 1.0, 2.0);
    const auto sa = coarse_solve(annulus, make_point({-2.0, -2.0}), make_point({2.0, 2.0}), h);
    CHECK(stationary_surface_test(sa, sample_boundary(disk(1.5), 2.0 * h), sa.times()).verdict);

    const auto se = coarse_solve(ellipse(2.0, 1.0), make_point({-2.0, -1.0}), make_point({2.0, 1.0}), h);
    const auto oval = sample_boundary(DomainSpec::offset(ellipse(2.0, 1.0), 0.3), 2.0 * h);
    CHECK_FALSE(stationary_surface_test(se, oval, se.times()).verdict);
    CHECK_THROWS_AS(stationary_surface_test(se, {}, se.times()), Error);
}

TEST_CASE("constant distance")
{
    const double h = 1.0 / 128.0;
    const auto sdf = build_signed_distance(disk(1.0), GridSpec::covering(make_point({-1.0, -1.0}), make_point({1.0, 1.0}), h));
    const auto c = constant_distance_test(sdf, sample_boundary(disk(0.4), 2.0 * h));
    CHECK(c.is_constant);
    CHECK(c.radius == doctest::Approx(0.6).epsilon(1e-3));
    CHECK_FALSE(constant_distance_test(sdf, sample_boundary(disk(0.4, 0.2, 0.0), 2.0 * h)).is_constant);
}

TEST_CASE("domain reconstruction")
{
    const double h = 1.0 / 64.0;
    const auto probe = GridSpec::covering(make_point({-1.3, -1.3}), make_point({1.3, 1.3}), h);
    const auto ok = reconstruct_domain(disk(0.4), 0.6, disk(1.0), probe);
    CHECK(ok.probed > 0);
    CHECK(ok.disagreeing == 0);
    CHECK(ok.disagreement == 0.0);
    CHECK(reconstruct_domain(disk(0.4), 0.5, disk(1.0), probe).disagreeing > 0);

    // Omega is the true parallel body of an ellipse: reconstruction holds
    // although D is not a disk. Membership oracle: distance to 4000 boundary
    // points of the closed ellipse.
    const auto e = ellipse(0.8, 0.4);
    const auto body = parallel_body(e, 0.3);
    CHECK(reconstruct_domain(e, 0.3, body, probe).disagreeing == 0);
    std::size_t mismatched = 0;
    for (std::size_t i = 0; i < probe.node_count(); i += 7) {
        const Point x = probe.position(i);
        double dist = e.contains(x) ? 0.0 : 1e300;
        for (int k = 0; k < 4000 && dist > 0.0; ++k) {
            const double th = 2.0 * pi * k / 4000;
            dist = std::min(dist, std::hypot(x[0] - 0.8 * std::cos(th), x[1] - 0.4 * std::sin(th)));
        }
        if (std::abs(dist - 0.3) < 2.0 * h) continue;
        if (body.contains(x) != (dist < 0.3)) ++mismatched;
    }
    CHECK(mismatched == 0);
}

TEST_CASE("curvature transfer")
{
    const double h = 1.0 / 128.0;
    const auto disk_rep = curvature_transfer_check(disk(1.0), sample_boundary(disk(0.4), 2.0 * h), 0.6, 10.0 * h);
    CHECK(disk_rep.passed);
    CHECK(disk_rep.samples > 0);

    const auto half = DomainSpec::halfspace(make_point({0.0, 1.0}), 0.0);
    SurfaceSample flat{make_point({0.3, 0.5}), make_point({0.0, -1.0}), {0.0}, 0, 1.0};
    const auto fr = curvature_transfer_check(half, {flat}, 0.5, 1e-6);
    CHECK(fr.passed);
    CHECK(fr.max_residual < 1e-6);

    SurfaceSample pole{make_point({0.0, 0.5}), make_point({0.0, -1.0}), {-2.0}, 0, 1.0};
    try {
        curvature_transfer_check(half, {pole}, 0.5, 1e-6);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::transfer_undefined);
    }
}

TEST_CASE("Monge-Ampere products")
{
    const double h = 1.0 / 128.0;
    const auto d = monge_ampere_test(disk(1.0), sample_boundary(disk(0.4), 2.0 * h), 0.6, 20.0 * h);
    CHECK(d.is_constant);
    CHECK(d.c == doctest::Approx(2.0 / 3.0).epsilon(1e-3));

    const auto ball = DomainSpec::ball(make_point({0.0, 0.0, 0.0}), 1.0);
    const auto inner = DomainSpec::ball(make_point({0.0, 0.0, 0.0}), 0.5);
    const auto b = monge_ampere_test(ball, sample_boundary(inner, 1.0 / 16.0), 0.5, 20.0 * h);
    CHECK(b.is_constant);
    CHECK(b.c == doctest::Approx(1.0).epsilon(1e-3));

    const auto e = monge_ampere_test(ellipse(2.0, 1.0), sample_boundary(DomainSpec::offset(ellipse(2.0, 1.0), 0.3), 2.0 * h),
                                     0.3, 20.0 * h);
    CHECK_FALSE(e.is_constant);
}

TEST_CASE("moving planes")
{
    const double h = 1.0 / 128.0;
    const auto d = disk(0.4, 0.1, -0.2);
    const auto probe = GridSpec::covering(make_point({-0.4, -0.7}), make_point({0.6, 0.3}), h);
    const auto v = moving_plane_scan(d, scan_directions(2, 8), probe);
    CHECK(v.classification == Classification::sphere);
    REQUIRE(v.center.has_value());
    CHECK((*v.center - make_point({0.1, -0.2})).norm() <= h);
    for (const auto& s : v.scans) CHECK(s.symmetric);

    const auto pe = GridSpec::covering(make_point({-1.1, -0.6}), make_point({1.1, 0.6}), h);
    const auto ve = moving_plane_scan(ellipse(1.0, 0.5), scan_directions(2, 8), pe);
    CHECK(ve.classification == Classification::asymmetric);
    CHECK(scan_directions(3, 10).size() == 10);
}

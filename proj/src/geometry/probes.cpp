#include "shape.hpp"

#include "isotherm/error.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>

namespace isotherm {

namespace {

std::vector<Point> direction_sweep(int dim, int count)
{
    std::vector<Point> dirs;
    if (dim == 1) {
        dirs = {make_point({1.0}), make_point({-1.0})};
    } else if (dim == 2) {
        for (int k = 0; k < count; ++k) {
            const double a = 2.0 * pi * k / count;
            dirs.push_back(make_point({std::cos(a), std::sin(a)}));
        }
    } else {
        const double golden = pi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < count; ++k) {
            const double z = 1.0 - 2.0 * (k + 0.5) / count;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            dirs.push_back(make_point({r * std::cos(golden * k), r * std::sin(golden * k), z}));
        }
    }
    return dirs;
}

/// Directions on the cone of half-angle alpha around axis (plus the axis).
std::vector<Point> cone_rays(const Point& axis, double alpha, int rings, int per_ring)
{
    std::vector<Point> rays{axis};
    const Eigen::MatrixXd t = detail::tangent_basis(axis);
    for (int r = 1; r <= rings; ++r) {
        const double a = alpha * r / rings;
        if (axis.size() == 2) {
            for (int s : {-1, 1}) rays.push_back(std::cos(a) * axis + s * std::sin(a) * Point(t.col(0)));
        } else {
            for (int k = 0; k < per_ring; ++k) {
                const double phi = 2.0 * pi * k / per_ring;
                const Point side = std::cos(phi) * Point(t.col(0)) + std::sin(phi) * Point(t.col(1));
                rays.push_back(std::cos(a) * axis + std::sin(a) * side);
            }
        }
    }
    return rays;
}

bool cone_inside(const DomainSpec& d, const Point& x, const Point& axis, double alpha, double rho)
{
    const auto rays = cone_rays(axis, alpha, 12, 24);
    // Radii: geometric toward the apex, then uniform up to the cap.
    std::vector<double> radii;
    for (double r = rho; r > rho * 1e-7; r *= 0.8) radii.push_back(r);
    for (int k = 1; k < 40; ++k) radii.push_back(rho * k / 40.0);
    for (const auto& ray : rays)
        for (double r : radii)
            if (!(d.signed_distance(x + r * ray) > 0.0)) return false;
    // Cap of the closed cone.
    const Eigen::MatrixXd t = detail::tangent_basis(axis);
    const double cap = rho * std::tan(alpha);
    for (int k = 1; k <= 16; ++k) {
        const double s = cap * k / 16.0;
        if (axis.size() == 2) {
            for (int sg : {-1, 1})
                if (!(d.signed_distance(x + rho * axis + sg * s * Point(t.col(0))) > 0.0)) return false;
        } else {
            for (int q = 0; q < 24; ++q) {
                const double phi = 2.0 * pi * q / 24;
                const Point side = std::cos(phi) * Point(t.col(0)) + std::sin(phi) * Point(t.col(1));
                if (!(d.signed_distance(x + rho * axis + s * side) > 0.0)) return false;
            }
        }
    }
    return true;
}

}  // namespace

TouchingBall touching_ball(const DomainSpec& domain, const Point& x0, const Point& direction, double resolution)
{
    if (!(domain.signed_distance(x0) > 0.0)) fail(ErrorKind::geometry, "touching_ball needs x0 inside the domain");
    const double h = resolution;
    const int dim = domain.dim();
    TouchingBall tb;
    std::vector<Point> pts;
    if (dim == 1 || !domain.boundary_bounded()) {
        const auto y = domain.closest_boundary_point(x0);
        if (!y) fail(ErrorKind::unsupported_kind, "no nearest-point search for this kind");
        tb.radius = (*y - x0).norm();
        tb.contact = *y;
        tb.contact_count = 1;
        tb.contacts = {*y};
        if (dim == 1 && domain.kind() != DomainKind::halfspace) {
            // Both ends of an interval may be nearest.
            const Point other = x0 - (*y - x0);
            if (std::abs(domain.signed_distance(other)) <= h * h) {
                tb.contacts.push_back(other);
                tb.contact_count = 2;
            }
        }
        return tb;
    }
    const double spacing = dim == 2 ? 0.25 * h : h;
    for (const auto& s : sample_boundary(domain, spacing)) pts.push_back(s.point);
    double dmin = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) dmin = std::min(dmin, (p - x0).norm());
    if (auto y = domain.closest_boundary_point(x0)) dmin = std::min(dmin, (*y - x0).norm());
    const double delta = h * h;
    std::vector<Point> near;
    for (const auto& p : pts)
        if ((p - x0).norm() <= dmin + delta) near.push_back(p);
    std::sort(near.begin(), near.end(), [&](const Point& a, const Point& b) {
        const double da = (a - x0).norm(), db = (b - x0).norm();
        if (da != db) return da < db;
        for (Eigen::Index k = 0; k < a.size(); ++k)
            if (a[k] != b[k]) return a[k] < b[k];
        return false;
    });
    std::vector<char> used(near.size(), 0);
    for (std::size_t i = 0; i < near.size(); ++i) {
        if (used[i]) continue;
        for (std::size_t j = i; j < near.size(); ++j)
            if (!used[j] && (near[j] - near[i]).norm() <= 3.0 * h) used[j] = 1;
        tb.contacts.push_back(near[i]);
    }
    tb.contact_count = static_cast<int>(tb.contacts.size());
    tb.radius = dmin;
    if (auto y = domain.closest_boundary_point(x0); y && tb.contact_count == 1) {
        tb.contact = *y;
        tb.radius = (*y - x0).norm();
        tb.contacts = {*y};
    } else {
        std::size_t best = 0;
        double score = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < tb.contacts.size(); ++k) {
            const double sc = direction.size() == dim && direction.norm() > 0.0 ? (tb.contacts[k] - x0).dot(direction) : 0.0;
            if (sc > score) {
                score = sc;
                best = k;
            }
        }
        tb.contact = tb.contacts.empty() ? x0 : tb.contacts[best];
    }
    return tb;
}

DomainSpec parallel_body(const DomainSpec& domain, double radius) { return DomainSpec::parallel_body(domain, radius); }

bool reflection_containment(const DomainSpec& domain, const Point& direction, double lambda, const GridSpec& probe)
{
    const Point l = direction.normalized();
    const double h = probe.h();
    const std::size_t n = probe.node_count();
    for (std::size_t i = 0; i < n; ++i) {
        const Point x = probe.position(i);
        const double s = x.dot(l) - lambda;
        if (s <= 0.0) continue;
        if (domain.signed_distance(x) <= h) continue;
        const Point xr = x - 2.0 * s * l;
        if (!(domain.signed_distance(xr) > 0.0)) return false;
    }
    return true;
}

ConeCheck cone_condition(const DomainSpec& domain, const Point& x, double theta, double rho)
{
    if (!(theta > 0.0 && theta < pi / 2.0)) fail(ErrorKind::configuration, "cone angle must lie in (0, pi/2)");
    if (!(rho > 0.0)) fail(ErrorKind::configuration, "cone height must be > 0");
    const double alpha = pi / 2.0 - theta;
    const int dim = domain.dim();
    ConeCheck out;
    std::vector<Point> candidates;
    const double step = 1e-4 * rho;
    Point g(dim);
    for (int a = 0; a < dim; ++a) {
        Point xp = x, xm = x;
        xp[a] += step;
        xm[a] -= step;
        g[a] = domain.signed_distance(xp) - domain.signed_distance(xm);
    }
    if (g.norm() > 0.0) candidates.push_back(g.normalized());
    const auto sweep = direction_sweep(dim, dim == 2 ? 720 : 2000);
    candidates.insert(candidates.end(), sweep.begin(), sweep.end());
    for (const auto& axis : candidates) {
        if (cone_inside(domain, x, axis, alpha, rho)) {
            out.holds = true;
            out.axis = axis;
            return out;
        }
    }
    out.axis = candidates.front();
    return out;
}

bool cone_condition_check(const DomainSpec& domain, const Point& x, double theta, double rho)
{
    return cone_condition(domain, x, theta, rho).holds;
}

SphereFit fit_sphere(const std::vector<Point>& points)
{
    if (points.empty()) fail(ErrorKind::geometry, "sphere fit needs points");
    const auto dim = points[0].size();
    if (points.size() < static_cast<std::size_t>(dim + 1)) fail(ErrorKind::geometry, "sphere fit needs at least dim + 1 points");
    Point mean = Point::Zero(dim);
    for (const auto& p : points) mean += p;
    mean /= static_cast<double>(points.size());
    Eigen::MatrixXd a(static_cast<Eigen::Index>(points.size()), dim + 1);
    Eigen::VectorXd b(static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Point q = points[i] - mean;
        const auto r = static_cast<Eigen::Index>(i);
        for (Eigen::Index k = 0; k < dim; ++k) a(r, k) = 2.0 * q[k];
        a(r, dim) = 1.0;
        b[r] = q.squaredNorm();
    }
    const Eigen::VectorXd sol = a.colPivHouseholderQr().solve(b);
    SphereFit fit;
    const Point c = sol.head(dim);
    fit.center = mean + c;
    fit.radius = std::sqrt(std::max(0.0, sol[dim] + c.squaredNorm()));
    for (const auto& p : points) fit.max_residual = std::max(fit.max_residual, std::abs((p - fit.center).norm() - fit.radius));
    return fit;
}

}  // namespace isotherm

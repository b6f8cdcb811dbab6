#include "shape.hpp"

#include "isotherm/error.hpp"

#include <cmath>
#include <limits>

namespace isotherm {

namespace {

Point level_gradient(const DomainSpec& domain, const Point& x, double step)
{
    Point g(x.size());
    for (Eigen::Index a = 0; a < x.size(); ++a) {
        Point xp = x, xm = x;
        xp[a] += step;
        xm[a] -= step;
        g[a] = (domain.signed_distance(xp) - domain.signed_distance(xm)) / (2.0 * step);
    }
    return g;
}

Eigen::MatrixXd level_hessian(const DomainSpec& domain, const Point& x, double step)
{
    const auto n = x.size();
    Eigen::MatrixXd h(n, n);
    const double f0 = domain.signed_distance(x);
    for (Eigen::Index a = 0; a < n; ++a) {
        Point xp = x, xm = x;
        xp[a] += step;
        xm[a] -= step;
        h(a, a) = (domain.signed_distance(xp) - 2.0 * f0 + domain.signed_distance(xm)) / (step * step);
        for (Eigen::Index b = a + 1; b < n; ++b) {
            Point pp = x, pm = x, mp = x, mm = x;
            pp[a] += step, pp[b] += step;
            pm[a] += step, pm[b] -= step;
            mp[a] -= step, mp[b] += step;
            mm[a] -= step, mm[b] -= step;
            const double v = (domain.signed_distance(pp) - domain.signed_distance(pm) - domain.signed_distance(mp) +
                              domain.signed_distance(mm)) /
                             (4.0 * step * step);
            h(a, b) = v;
            h(b, a) = v;
        }
    }
    return h;
}

}  // namespace

double tubular_radius(const DomainSpec& domain)
{
    if (!domain.smooth()) fail(ErrorKind::unsupported_kind, std::string("tubular_radius needs a smooth boundary, got ") + to_string(domain.kind()));
    const auto r = domain.shape().reach();
    if (!r) fail(ErrorKind::unsupported_kind, "no closed-form reach for this kind");
    return 0.5 * *r;
}

Point project_to_boundary(const DomainSpec& domain, const Point& x)
{
    if (auto p = domain.closest_boundary_point(x)) return *p;
    Point y = x;
    const auto [lo, hi] = domain.boundary_box();
    double scale = 1.0;
    if (domain.boundary_bounded()) scale = std::max(1e-3, (hi - lo).norm());
    const double step = 1e-6 * scale;
    for (int it = 0; it < 100; ++it) {
        const double f = domain.signed_distance(y);
        if (std::abs(f) <= 1e-13 * scale) break;
        const Point g = level_gradient(domain, y, step);
        const double g2 = g.squaredNorm();
        if (!(g2 > 0.0)) fail(ErrorKind::geometry, "projection stalled at a critical point of the level function");
        y -= f * g / g2;
    }
    return y;
}

SurfaceSample principal_curvatures(const DomainSpec& domain, const Point& xi, double tolerance, double fd_step)
{
    const double off = std::abs(domain.signed_distance(xi));
    if (off > tolerance)
        fail(ErrorKind::off_surface, "point is " + std::to_string(off) + " from the boundary (tolerance " + std::to_string(tolerance) + ")");
    if (auto s = domain.shape().curvature(xi)) return *s;
    const Point g = level_gradient(domain, xi, fd_step);
    const Eigen::MatrixXd h = level_hessian(domain, xi, fd_step);
    return detail::implicit_curvature(xi, g, h);
}

}  // namespace isotherm

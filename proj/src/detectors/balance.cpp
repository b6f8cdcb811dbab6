#include "isotherm/detectors.hpp"

#include "isotherm/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace isotherm {

namespace {

/// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights)
{
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        j(k, k - 1) = b;
        j(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    nodes.resize(static_cast<std::size_t>(n));
    weights.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        nodes[static_cast<std::size_t>(k)] = es.eigenvalues()[k];
        weights[static_cast<std::size_t>(k)] = 2.0 * std::pow(es.eigenvectors()(0, k), 2);
    }
    // Symmetrize so antipodal nodes cancel exactly.
    for (int k = 0; k < n / 2; ++k) {
        const auto a = static_cast<std::size_t>(k), b = static_cast<std::size_t>(n - 1 - k);
        const double x = 0.5 * (nodes[b] - nodes[a]);
        const double w = 0.5 * (weights[a] + weights[b]);
        nodes[a] = -x;
        nodes[b] = x;
        weights[a] = weights[b] = w;
    }
    if (n % 2 == 1) nodes[static_cast<std::size_t>(n / 2)] = 0.0;
}

void check_ball(const SolutionSeries& series, const Point& x0, double radius)
{
    const GridSpec& g = series.grid;
    if (x0.size() != g.dim) fail(ErrorKind::configuration, "point dimension differs from the grid");
    if (!(radius > 0.0)) fail(ErrorKind::precondition, "sphere radius must be > 0");
    Point lo = x0, hi = x0;
    lo.array() -= radius;
    hi.array() += radius;
    if (!g.contains(lo, 1e-12) || !g.contains(hi, 1e-12)) fail(ErrorKind::geometry, "sphere leaves the grid");
    if (series.problem == ProblemKind::ibvp && series.domain.signed_distance(x0) < radius - 1e-12)
        fail(ErrorKind::geometry, "sphere leaves the domain where the solution is defined");
}

}  // namespace

SphereRule sphere_rule(int dim, double radius, int nodes)
{
    if (!(radius > 0.0)) fail(ErrorKind::precondition, "sphere radius must be > 0");
    if (nodes < 4) fail(ErrorKind::precondition, "sphere rule needs at least 4 nodes");
    SphereRule rule;
    if (dim == 1) {
        rule.offsets = {make_point({-radius}), make_point({radius})};
        rule.weights = {1.0, 1.0};
    } else if (dim == 2) {
        for (int k = 0; k < nodes; ++k) {
            const double a = 2.0 * pi * k / nodes;
            rule.offsets.push_back(make_point({radius * std::cos(a), radius * std::sin(a)}));
            rule.weights.push_back(2.0 * pi * radius / nodes);
        }
    } else if (dim == 3) {
        const int polar = std::max(4, nodes / 8);
        const int azimuth = 2 * std::max(4, nodes / 8);
        std::vector<double> z, w;
        gauss_legendre(polar, z, w);
        for (int p = 0; p < polar; ++p) {
            const double c = z[static_cast<std::size_t>(p)];
            const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
            for (int k = 0; k < azimuth; ++k) {
                const double a = 2.0 * pi * k / azimuth;
                rule.offsets.push_back(make_point({radius * s * std::cos(a), radius * s * std::sin(a), radius * c}));
                rule.weights.push_back(radius * radius * w[static_cast<std::size_t>(p)] * 2.0 * pi / azimuth);
            }
        }
    } else {
        fail(ErrorKind::unsupported_kind, "sphere rules exist for N = 1, 2, 3");
    }
    return rule;
}

Point sphere_moment(const ScalarField& f, const Point& x0, double radius, int dim, int nodes)
{
    const SphereRule rule = sphere_rule(dim, radius, nodes);
    Point m = Point::Zero(dim);
    for (std::size_t k = 0; k < rule.offsets.size(); ++k)
        m += rule.weights[k] * f(x0 + rule.offsets[k]) * rule.offsets[k];
    return m;
}

double sphere_mean(const ScalarField& f, const Point& x0, double radius, int dim, int nodes)
{
    const SphereRule rule = sphere_rule(dim, radius, nodes);
    double s = 0.0;
    for (std::size_t k = 0; k < rule.offsets.size(); ++k) s += rule.weights[k] * f(x0 + rule.offsets[k]);
    return s;
}

Point moment_balance(const SolutionSeries& series, const Point& x0, double radius, double t, int nodes)
{
    check_ball(series, x0, radius);
    const GridField u = series.field(t);
    return sphere_moment([&](const Point& x) { return u.interpolate(x); }, x0, radius, series.grid.dim, nodes);
}

double mean_balance(const SolutionSeries& series, const Point& x0, double radius, double t, int nodes)
{
    check_ball(series, x0, radius);
    const GridField u = series.field(t);
    return sphere_mean([&](const Point& x) { return u.interpolate(x); }, x0, radius, series.grid.dim, nodes);
}

double difference_mean_balance(const SolutionSeries& series, const Point& p, const Point& q, double radius, double t,
                               int nodes)
{
    check_ball(series, p, radius);
    check_ball(series, q, radius);
    const GridField u = series.field(t);
    const SphereRule rule = sphere_rule(series.grid.dim, radius, nodes);
    double s = 0.0;
    for (std::size_t k = 0; k < rule.offsets.size(); ++k)
        s += rule.weights[k] * (u.interpolate(p + rule.offsets[k]) - u.interpolate(q + rule.offsets[k]));
    return s;
}

}  // namespace isotherm

#include "shape.hpp"

#include "isotherm/error.hpp"
#include "isotherm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>

namespace isotherm {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

/// Unsigned first-order fast marching from an initialized band.
void fast_march(const GridSpec& g, std::vector<double>& dist, std::vector<char>& known)
{
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    const std::size_t n = g.node_count();
    auto update = [&](std::size_t i) {
        const auto idx = g.unflatten(i);
        double a[3];
        double hs[3];
        int m = 0;
        for (int ax = 0; ax < g.dim; ++ax) {
            const auto u = static_cast<std::size_t>(ax);
            double best = inf;
            if (idx[u] > 0) {
                const std::size_t j = i - g.stride(ax);
                if (known[j]) best = std::min(best, dist[j]);
            }
            if (idx[u] < g.extents[u]) {
                const std::size_t j = i + g.stride(ax);
                if (known[j]) best = std::min(best, dist[j]);
            }
            if (best < inf) {
                a[m] = best;
                hs[m] = g.spacing[u];
                ++m;
            }
        }
        if (m == 0) return inf;
        // Sort neighbor values; solve sum ((d - a_k) / h_k)^2 = 1 over the
        // smallest k that keeps the root above the next neighbor value.
        for (int p = 1; p < m; ++p)
            for (int q = p; q > 0 && a[q] < a[q - 1]; --q) {
                std::swap(a[q], a[q - 1]);
                std::swap(hs[q], hs[q - 1]);
            }
        double d = a[0] + hs[0];
        for (int k = 2; k <= m; ++k) {
            if (d <= a[k - 1]) break;
            double A = 0.0, B = 0.0, C = -1.0;
            for (int q = 0; q < k; ++q) {
                const double w = 1.0 / (hs[q] * hs[q]);
                A += w;
                B -= 2.0 * a[q] * w;
                C += a[q] * a[q] * w;
            }
            const double disc = B * B - 4.0 * A * C;
            if (disc < 0.0) break;
            d = (-B + std::sqrt(disc)) / (2.0 * A);
        }
        return d;
    };
    for (std::size_t i = 0; i < n; ++i)
        if (known[i]) {
            const auto idx = g.unflatten(i);
            for (int ax = 0; ax < g.dim; ++ax) {
                const auto u = static_cast<std::size_t>(ax);
                for (int side : {-1, 1}) {
                    const int k = idx[u] + side;
                    if (k < 0 || k > g.extents[u]) continue;
                    const std::size_t j = side < 0 ? i - g.stride(ax) : i + g.stride(ax);
                    if (known[j]) continue;
                    const double d = update(j);
                    if (d < dist[j]) {
                        dist[j] = d;
                        heap.emplace(d, j);
                    }
                }
            }
        }
    while (!heap.empty()) {
        const auto [d, i] = heap.top();
        heap.pop();
        if (known[i] || d > dist[i]) continue;
        known[i] = 1;
        const auto idx = g.unflatten(i);
        for (int ax = 0; ax < g.dim; ++ax) {
            const auto u = static_cast<std::size_t>(ax);
            for (int side : {-1, 1}) {
                const int k = idx[u] + side;
                if (k < 0 || k > g.extents[u]) continue;
                const std::size_t j = side < 0 ? i - g.stride(ax) : i + g.stride(ax);
                if (known[j]) continue;
                const double dj = update(j);
                if (dj < dist[j]) {
                    dist[j] = dj;
                    heap.emplace(dj, j);
                }
            }
        }
    }
}

double nodal_derivative(const GridSpec& g, const std::vector<double>& v, const std::array<int, 3>& idx, int axis)
{
    const auto u = static_cast<std::size_t>(axis);
    const std::size_t i = g.flat(idx);
    const std::size_t s = g.stride(axis);
    const double h = g.spacing[u];
    if (idx[u] == 0) return (v[i + s] - v[i]) / h;
    if (idx[u] == g.extents[u]) return (v[i] - v[i - s]) / h;
    return (v[i + s] - v[i - s]) / (2.0 * h);
}

std::array<int, 3> clamp_interior(const GridSpec& g, std::array<int, 3> idx)
{
    for (int a = 0; a < g.dim; ++a) {
        const auto u = static_cast<std::size_t>(a);
        idx[u] = std::clamp(idx[u], 1, g.extents[u] - 1);
    }
    return idx;
}

Eigen::MatrixXd nodal_hessian(const GridSpec& g, const std::vector<double>& v, std::array<int, 3> idx)
{
    idx = clamp_interior(g, idx);
    const std::size_t i = g.flat(idx);
    Eigen::MatrixXd h(g.dim, g.dim);
    for (int a = 0; a < g.dim; ++a) {
        const double ha = g.spacing[static_cast<std::size_t>(a)];
        const std::size_t sa = g.stride(a);
        h(a, a) = (v[i + sa] - 2.0 * v[i] + v[i - sa]) / (ha * ha);
        for (int b = a + 1; b < g.dim; ++b) {
            const double hb = g.spacing[static_cast<std::size_t>(b)];
            const std::size_t sb = g.stride(b);
            const double val = (v[i + sa + sb] - v[i + sa - sb] - v[i - sa + sb] + v[i - sa - sb]) / (4.0 * ha * hb);
            h(a, b) = val;
            h(b, a) = val;
        }
    }
    return h;
}

/// Corner indices and multilinear weights of the cell containing x.
void cell_weights(const GridSpec& g, const Point& x, std::vector<std::array<int, 3>>& corners, std::vector<double>& w)
{
    if (!g.contains(x, 1e-12 * g.h())) fail(ErrorKind::geometry, "point outside the distance grid");
    std::array<int, 3> base{0, 0, 0};
    std::array<double, 3> frac{0.0, 0.0, 0.0};
    for (int a = 0; a < g.dim; ++a) {
        const auto u = static_cast<std::size_t>(a);
        const double s = (x[a] - g.origin[u]) / g.spacing[u];
        const int k = std::clamp(static_cast<int>(std::floor(s)), 0, g.extents[u] - 1);
        base[u] = k;
        frac[u] = std::clamp(s - k, 0.0, 1.0);
    }
    corners.clear();
    w.clear();
    for (int c = 0; c < (1 << g.dim); ++c) {
        std::array<int, 3> idx = base;
        double wt = 1.0;
        for (int a = 0; a < g.dim; ++a) {
            const auto u = static_cast<std::size_t>(a);
            if (c & (1 << a)) {
                idx[u] += 1;
                wt *= frac[u];
            } else {
                wt *= 1.0 - frac[u];
            }
        }
        corners.push_back(idx);
        w.push_back(wt);
    }
}

/// Newton steps x <- x - f grad f / |grad f|^2 on the level function;
/// nullopt unless it converges within two cells of the start.
std::optional<Point> project_to_level(const DomainSpec& domain, const Point& x, double h)
{
    const double step = 1e-4 * h;
    Point p = x;
    for (int it = 0; it < 30; ++it) {
        const double f = domain.signed_distance(p);
        if (std::abs(f) <= 1e-13) {
            if ((p - x).norm() > 2.0 * h * std::sqrt(static_cast<double>(p.size()))) return std::nullopt;
            return p;
        }
        Point g(p.size());
        for (int a = 0; a < p.size(); ++a) {
            Point q = p, r = p;
            q[a] += step;
            r[a] -= step;
            g[a] = (domain.signed_distance(q) - domain.signed_distance(r)) / (2.0 * step);
        }
        const double g2 = g.squaredNorm();
        if (!(g2 > 1e-12)) return std::nullopt;
        p -= f / g2 * g;
    }
    return std::nullopt;
}

}  // namespace

SignedDistanceField build_signed_distance(const DomainSpec& domain, const GridSpec& grid, double margin)
{
    grid.validate();
    if (grid.dim != domain.dim()) fail(ErrorKind::configuration, "grid and domain dimensions differ");
    if (domain.boundary_bounded()) {
        const auto [lo, hi] = domain.boundary_box();
        const double slack = 1e-9 * std::max(1.0, grid.h());
        Point a = lo, b = hi;
        a.array() -= margin;
        b.array() += margin;
        if (!grid.contains(a, slack) || !grid.contains(b, slack))
            fail(ErrorKind::coverage, "grid does not cover the boundary box plus margin");
    }
    SignedDistanceField sdf{GridField(grid, 0.0), domain};
    auto& v = sdf.field.values;
    const std::size_t n = grid.node_count();
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) v[i] = domain.signed_distance(grid.position(i));
    });
    if (domain.exact_distance()) return sdf;

    // Band: nodes with a sign change along some grid edge get the distance
    // to the linear-interpolated crossings; the rest by fast marching.
    std::vector<double> dist(n, inf);
    std::vector<char> known(n, 0);
    const std::vector<double> level = v;
    for (std::size_t i = 0; i < n; ++i) {
        if (level[i] == 0.0) {
            dist[i] = 0.0;
            known[i] = 1;
            continue;
        }
        const auto idx = grid.unflatten(i);
        double inv2 = 0.0;
        for (int ax = 0; ax < grid.dim; ++ax) {
            const auto u = static_cast<std::size_t>(ax);
            double best = inf;
            for (int side : {-1, 1}) {
                const int k = idx[u] + side;
                if (k < 0 || k > grid.extents[u]) continue;
                const std::size_t j = side < 0 ? i - grid.stride(ax) : i + grid.stride(ax);
                if ((level[i] > 0.0) == (level[j] > 0.0) && level[j] != 0.0) continue;
                const double theta = level[i] / (level[i] - level[j]);
                best = std::min(best, theta * grid.spacing[u]);
            }
            if (best < inf) inv2 += 1.0 / (best * best);
        }
        if (inv2 > 0.0) {
            dist[i] = 1.0 / std::sqrt(inv2);
            known[i] = 1;
        }
    }
    // Edge crossings overestimate the distance where the boundary runs
    // obliquely to one axis; project band nodes onto the zero level instead.
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            if (known[i] && dist[i] > 0.0) {
                const Point x = grid.position(i);
                if (const auto p = project_to_level(domain, x, grid.h())) dist[i] = (*p - x).norm();
            }
    });
    fast_march(grid, dist, known);
    for (std::size_t i = 0; i < n; ++i) v[i] = level[i] > 0.0 ? dist[i] : -dist[i];
    return sdf;
}

Point SignedDistanceField::gradient(const Point& x) const
{
    const GridSpec& g = grid();
    std::vector<std::array<int, 3>> corners;
    std::vector<double> w;
    cell_weights(g, x, corners, w);
    Point out = Point::Zero(g.dim);
    for (std::size_t c = 0; c < corners.size(); ++c) {
        if (w[c] == 0.0) continue;
        for (int a = 0; a < g.dim; ++a) out[a] += w[c] * nodal_derivative(g, field.values, corners[c], a);
    }
    return out;
}

Eigen::MatrixXd SignedDistanceField::hessian(const Point& x) const
{
    const GridSpec& g = grid();
    std::vector<std::array<int, 3>> corners;
    std::vector<double> w;
    cell_weights(g, x, corners, w);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(g.dim, g.dim);
    for (std::size_t c = 0; c < corners.size(); ++c)
        if (w[c] != 0.0) out += w[c] * nodal_hessian(g, field.values, corners[c]);
    return out;
}

double SignedDistanceField::gradient_norm_at_node(std::size_t flat_index) const
{
    const GridSpec& g = grid();
    const auto idx = g.unflatten(flat_index);
    double s = 0.0;
    for (int a = 0; a < g.dim; ++a) {
        const double d = nodal_derivative(g, field.values, idx, a);
        s += d * d;
    }
    return std::sqrt(s);
}

double SignedDistanceField::laplacian_at_node(std::size_t flat_index) const
{
    const GridSpec& g = grid();
    const auto idx = g.unflatten(flat_index);
    if (g.on_box_boundary(idx)) fail(ErrorKind::resolution, "Laplacian stencil leaves the grid");
    const auto& v = field.values;
    double lap = 0.0;
    for (int a = 0; a < g.dim; ++a) {
        const double h = g.spacing[static_cast<std::size_t>(a)];
        const std::size_t s = g.stride(a);
        lap += (v[flat_index + s] - 2.0 * v[flat_index] + v[flat_index - s]) / (h * h);
    }
    return lap;
}

}  // namespace isotherm

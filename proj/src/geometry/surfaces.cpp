#include "shape.hpp"

#include "isotherm/error.hpp"
#include "isotherm/parallel.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <unordered_map>

namespace isotherm {

namespace {

/// Segment (2D) or triangle (3D) of a level set with a component label.
struct Piece {
    Point v[3];
    int comp = 0;
};

class UnionFind {
public:
    int add()
    {
        parent_.push_back(static_cast<int>(parent_.size()));
        return parent_.back();
    }
    int find(int i)
    {
        while (parent_[static_cast<std::size_t>(i)] != i) {
            parent_[static_cast<std::size_t>(i)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(i)])];
            i = parent_[static_cast<std::size_t>(i)];
        }
        return i;
    }
    void unite(int a, int b)
    {
        a = find(a);
        b = find(b);
        if (a != b) parent_[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }

private:
    std::vector<int> parent_;
};

struct Crossings {
    std::unordered_map<std::uint64_t, int> ids;
    UnionFind uf;

    int id(std::uint64_t key)
    {
        auto it = ids.find(key);
        if (it != ids.end()) return it->second;
        const int v = uf.add();
        ids.emplace(key, v);
        return v;
    }
};

Point crossing(const Point& a, const Point& b, double fa, double fb)
{
    const double t = fa / (fa - fb);
    return a + t * (b - a);
}

std::vector<Piece> extract_mesh(const GridField& field, double level)
{
    const GridSpec& g = field.grid;
    const auto& v = field.values;
    std::vector<Piece> pieces;
    std::vector<std::array<int, 2>> piece_edges;
    Crossings cx;
    const auto n = static_cast<std::uint64_t>(g.node_count());
    auto edge_key = [&](std::size_t a, std::size_t b) {
        const auto lo = static_cast<std::uint64_t>(std::min(a, b));
        const auto hi = static_cast<std::uint64_t>(std::max(a, b));
        return lo * n + hi;
    };
    std::vector<int> piece_crossing;

    if (g.dim == 2) {
        for (int i = 0; i < g.extents[0]; ++i)
            for (int j = 0; j < g.extents[1]; ++j) {
                const std::array<std::array<int, 3>, 4> c{{{i, j, 0}, {i + 1, j, 0}, {i + 1, j + 1, 0}, {i, j + 1, 0}}};
                std::size_t fl[4];
                double f[4];
                bool in[4];
                int count = 0;
                for (int k = 0; k < 4; ++k) {
                    fl[k] = g.flat(c[static_cast<std::size_t>(k)]);
                    f[k] = v[fl[k]] - level;
                    in[k] = f[k] > 0.0;
                    count += in[k];
                }
                if (count == 0 || count == 4) continue;
                Point p[4];
                int id[4];
                bool has[4];
                for (int e = 0; e < 4; ++e) {
                    const int a = e, b = (e + 1) % 4;
                    has[e] = in[a] != in[b];
                    if (has[e]) {
                        p[e] = crossing(g.position(c[static_cast<std::size_t>(a)]), g.position(c[static_cast<std::size_t>(b)]), f[a], f[b]);
                        id[e] = cx.id(edge_key(fl[a], fl[b]));
                    }
                }
                auto emit = [&](int e0, int e1) {
                    Piece pc;
                    pc.v[0] = p[e0];
                    pc.v[1] = p[e1];
                    pieces.push_back(pc);
                    cx.uf.unite(id[e0], id[e1]);
                    piece_crossing.push_back(id[e0]);
                };
                std::vector<int> es;
                for (int e = 0; e < 4; ++e)
                    if (has[e]) es.push_back(e);
                if (es.size() == 2) {
                    emit(es[0], es[1]);
                } else {
                    const double center = 0.25 * (f[0] + f[1] + f[2] + f[3]);
                    if ((center > 0.0) == in[0]) {
                        emit(0, 1);
                        emit(2, 3);
                    } else {
                        emit(3, 0);
                        emit(1, 2);
                    }
                }
            }
    } else if (g.dim == 3) {
        static const int tets[6][4] = {{0, 1, 3, 7}, {0, 3, 2, 7}, {0, 2, 6, 7}, {0, 6, 4, 7}, {0, 4, 5, 7}, {0, 5, 1, 7}};
        for (int i = 0; i < g.extents[0]; ++i)
            for (int j = 0; j < g.extents[1]; ++j)
                for (int k = 0; k < g.extents[2]; ++k) {
                    std::size_t fl[8];
                    double f[8];
                    int count = 0;
                    std::array<int, 3> idx[8];
                    for (int c = 0; c < 8; ++c) {
                        idx[c] = {i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1)};
                        fl[c] = g.flat(idx[c]);
                        f[c] = v[fl[c]] - level;
                        count += f[c] > 0.0;
                    }
                    if (count == 0 || count == 8) continue;
                    for (const auto& t : tets) {
                        std::vector<int> ins, outs;
                        for (int q = 0; q < 4; ++q) (f[t[q]] > 0.0 ? ins : outs).push_back(t[q]);
                        if (ins.empty() || outs.empty()) continue;
                        auto cross = [&](int a, int b, int& cid) {
                            cid = cx.id(edge_key(fl[a], fl[b]));
                            return crossing(g.position(idx[a]), g.position(idx[b]), f[a], f[b]);
                        };
                        auto emit = [&](const Point& a, const Point& b, const Point& c, int ia, int ib, int ic) {
                            Piece pc;
                            pc.v[0] = a;
                            pc.v[1] = b;
                            pc.v[2] = c;
                            pieces.push_back(pc);
                            cx.uf.unite(ia, ib);
                            cx.uf.unite(ia, ic);
                            piece_crossing.push_back(ia);
                        };
                        int i0, i1, i2, i3;
                        if (ins.size() == 1 || outs.size() == 1) {
                            const int apex = ins.size() == 1 ? ins[0] : outs[0];
                            const auto& rest = ins.size() == 1 ? outs : ins;
                            const Point a = cross(apex, rest[0], i0);
                            const Point b = cross(apex, rest[1], i1);
                            const Point c = cross(apex, rest[2], i2);
                            emit(a, b, c, i0, i1, i2);
                        } else {
                            const Point a = cross(ins[0], outs[0], i0);
                            const Point b = cross(ins[0], outs[1], i1);
                            const Point c = cross(ins[1], outs[1], i2);
                            const Point d = cross(ins[1], outs[0], i3);
                            emit(a, b, c, i0, i1, i2);
                            emit(a, c, d, i0, i2, i3);
                        }
                    }
                }
    } else {
        fail(ErrorKind::unsupported_kind, "level-set extraction needs dim 2 or 3");
    }
    // Components numbered by first appearance so labels are deterministic.
    std::map<int, int> label;
    for (std::size_t p = 0; p < pieces.size(); ++p) {
        const int root = cx.uf.find(piece_crossing[p]);
        auto it = label.find(root);
        if (it == label.end()) it = label.emplace(root, static_cast<int>(label.size())).first;
        pieces[p].comp = it->second;
    }
    return pieces;
}

double piece_measure(const Piece& p, int dim)
{
    if (dim == 2) return (p.v[1] - p.v[0]).norm();
    const Eigen::Vector3d a(p.v[0][0], p.v[0][1], p.v[0][2]);
    const Eigen::Vector3d b(p.v[1][0], p.v[1][1], p.v[1][2]);
    const Eigen::Vector3d c(p.v[2][0], p.v[2][1], p.v[2][2]);
    return 0.5 * (b - a).cross(c - a).norm();
}

Point piece_center(const Piece& p, int dim)
{
    if (dim == 2) return 0.5 * (p.v[0] + p.v[1]);
    return (p.v[0] + p.v[1] + p.v[2]) / 3.0;
}

/// Measure of the part of a piece inside the ball: exact for segments,
/// by 4^depth sub-triangles for triangles.
double clipped_measure(const Point& a, const Point& b, const Point& c, int dim, const Point& x0, double r, int depth)
{
    if (dim == 2) {
        const Point d = b - a;
        const Point m = a - x0;
        const double A = d.squaredNorm();
        if (A == 0.0) return 0.0;
        const double B = 2.0 * m.dot(d);
        const double C = m.squaredNorm() - r * r;
        const double disc = B * B - 4.0 * A * C;
        if (disc <= 0.0) return 0.0;
        const double s = std::sqrt(disc);
        const double t0 = std::max(0.0, (-B - s) / (2.0 * A));
        const double t1 = std::min(1.0, (-B + s) / (2.0 * A));
        return t1 > t0 ? (t1 - t0) * std::sqrt(A) : 0.0;
    }
    const double ra = (a - x0).norm(), rb = (b - x0).norm(), rc = (c - x0).norm();
    Piece p;
    p.v[0] = a;
    p.v[1] = b;
    p.v[2] = c;
    const double area = piece_measure(p, 3);
    if (ra <= r && rb <= r && rc <= r) return area;
    const double diam = std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
    const double rmin = std::min({ra, rb, rc});
    if (rmin - diam > r) return 0.0;
    if (depth == 0) return ((a + b + c) / 3.0 - x0).norm() <= r ? area : 0.0;
    const Point ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
    return clipped_measure(a, ab, ca, 3, x0, r, depth - 1) + clipped_measure(ab, b, bc, 3, x0, r, depth - 1) +
           clipped_measure(ca, bc, c, 3, x0, r, depth - 1) + clipped_measure(ab, bc, ca, 3, x0, r, depth - 1);
}

GridField level_field(const DomainSpec& domain, const GridSpec& g)
{
    GridField f(g, 0.0);
    parallel_for(g.node_count(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) f.values[i] = domain.signed_distance(g.position(i));
    });
    return f;
}

}  // namespace

std::vector<SurfaceSample> extract_level_surface(const SignedDistanceField& sdf, double level)
{
    const int dim = sdf.grid().dim;
    const auto pieces = extract_mesh(sdf.field, level);
    std::vector<SurfaceSample> out(pieces.size());
    parallel_for(pieces.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const Point c = piece_center(pieces[i], dim);
            SurfaceSample s = detail::implicit_curvature(c, sdf.gradient(c), sdf.hessian(c));
            s.surface_id = pieces[i].comp;
            s.weight = piece_measure(pieces[i], dim);
            out[i] = s;
        }
    });
    return out;
}

std::vector<SurfaceSample> parallel_surface(const SignedDistanceField& sdf, double s)
{
    if (!(s > 0.0)) fail(ErrorKind::precondition, "parallel_surface needs s > 0");
    return extract_level_surface(sdf, s);
}

double level_band_measure(const SignedDistanceField& sdf, double s, const Point& x0, double radius)
{
    if (!(radius > 0.0)) fail(ErrorKind::geometry, "ball radius must be > 0");
    const double depth = sdf.domain.signed_distance(x0);
    if (depth < radius - 1e-9 * std::max(1.0, radius)) fail(ErrorKind::geometry, "ball B_R(x0) is not inside the domain");
    const int dim = sdf.grid().dim;
    const auto pieces = extract_mesh(sdf.field, s);
    double total = 0.0;
    for (const auto& p : pieces) total += clipped_measure(p.v[0], p.v[1], p.v[2], dim, x0, radius, 4);
    return total;
}

std::vector<SurfaceSample> sample_boundary(const DomainSpec& domain, double spacing)
{
    if (!(spacing > 0.0)) fail(ErrorKind::configuration, "sampling spacing must be > 0");
    if (!domain.boundary_bounded()) fail(ErrorKind::unsupported_kind, "cannot sample an unbounded boundary");
    if (auto s = domain.shape().samples(spacing)) return *s;
    const auto [lo, hi] = domain.boundary_box();
    Point a = lo, b = hi;
    a.array() -= 4.0 * spacing;
    b.array() += 4.0 * spacing;
    const GridField f = level_field(domain, GridSpec::covering(a, b, spacing));
    const auto pieces = extract_mesh(f, 0.0);
    std::vector<SurfaceSample> out(pieces.size());
    parallel_for(pieces.size(), [&](std::size_t bgn, std::size_t end) {
        for (std::size_t i = bgn; i < end; ++i) {
            const Point c = project_to_boundary(domain, piece_center(pieces[i], domain.dim()));
            SurfaceSample s = principal_curvatures(domain, c, spacing, spacing);
            s.surface_id = pieces[i].comp;
            s.weight = piece_measure(pieces[i], domain.dim());
            out[i] = s;
        }
    });
    return out;
}

std::vector<std::vector<SurfaceSample>> split_components(const std::vector<SurfaceSample>& samples)
{
    std::map<int, std::vector<SurfaceSample>> by;
    for (const auto& s : samples) by[s.surface_id].push_back(s);
    std::vector<std::vector<SurfaceSample>> out;
    for (auto& [id, v] : by) out.push_back(std::move(v));
    return out;
}

}  // namespace isotherm

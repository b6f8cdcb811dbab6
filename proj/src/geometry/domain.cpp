#include "shape.hpp"

#include "isotherm/error.hpp"

#include <Eigen/Geometry>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace isotherm {

const char* to_string(DomainKind kind) noexcept
{
    switch (kind) {
    case DomainKind::ball: return "ball";
    case DomainKind::annulus: return "annulus";
    case DomainKind::ellipsoid: return "ellipsoid";
    case DomainKind::ball_union: return "ball_union";
    case DomainKind::polygon: return "polygon";
    case DomainKind::halfspace: return "halfspace";
    case DomainKind::implicit: return "implicit";
    }
    return "unknown";
}

namespace detail {

Eigen::MatrixXd tangent_basis(const Point& n)
{
    const auto dim = n.size();
    Eigen::MatrixXd t(dim, std::max<Eigen::Index>(dim - 1, 0));
    if (dim == 2) {
        t(0, 0) = -n[1];
        t(1, 0) = n[0];
    } else if (dim == 3) {
        Eigen::Vector3d nn(n[0], n[1], n[2]);
        Eigen::Index k;
        nn.cwiseAbs().minCoeff(&k);
        Eigen::Vector3d a = Eigen::Vector3d::Unit(k);
        Eigen::Vector3d t1 = (a - a.dot(nn) * nn).normalized();
        Eigen::Vector3d t2 = nn.cross(t1);
        t.col(0) = t1;
        t.col(1) = t2;
    }
    return t;
}

SurfaceSample implicit_curvature(const Point& x, const Point& grad, const Eigen::MatrixXd& hess)
{
    const double gn = grad.norm();
    if (!(gn > 0.0)) fail(ErrorKind::geometry, "vanishing gradient at a boundary point");
    SurfaceSample s;
    s.point = x;
    s.inward_normal = grad / gn;
    if (x.size() > 1) {
        const Eigen::MatrixXd t = tangent_basis(s.inward_normal);
        const Eigen::MatrixXd k = t.transpose() * hess * t;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
        for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) s.curvatures.push_back(-eig.eigenvalues()[i] / gn);
        std::sort(s.curvatures.begin(), s.curvatures.end());
    }
    return s;
}

namespace {

nlohmann::json point_json(const Point& p) { return to_vector(p); }

Point point_from(const nlohmann::json& j, const char* what)
{
    if (!j.is_array() || j.empty() || j.size() > 3) fail(ErrorKind::schema, std::string(what) + " must be an array of 1 to 3 numbers");
    return make_point(j.get<std::vector<double>>());
}

double number_from(const nlohmann::json& params, const char* key)
{
    if (!params.contains(key) || !params.at(key).is_number())
        fail(ErrorKind::schema, std::string("domain.params.") + key + " must be a number");
    return params.at(key).get<double>();
}

std::pair<Point, Point> unbounded_box(int dim)
{
    const double inf = std::numeric_limits<double>::infinity();
    return {Point::Constant(dim, inf), Point::Constant(dim, -inf)};
}

std::vector<SurfaceSample> circle_samples(const Point& c, double r, double spacing, int id, bool inward_to_center)
{
    std::vector<SurfaceSample> out;
    const int n = std::max(8, static_cast<int>(std::ceil(2.0 * pi * r / spacing)));
    for (int k = 0; k < n; ++k) {
        const double a = 2.0 * pi * (k + 0.5) / n;
        SurfaceSample s;
        const Point u = make_point({std::cos(a), std::sin(a)});
        s.point = c + r * u;
        s.inward_normal = inward_to_center ? Point(-u) : u;
        s.curvatures = {inward_to_center ? 1.0 / r : -1.0 / r};
        s.surface_id = id;
        s.weight = 2.0 * pi * r / n;
        out.push_back(s);
    }
    return out;
}

std::vector<SurfaceSample> sphere_samples(const Point& c, double r, double spacing, int id, bool inward_to_center)
{
    std::vector<SurfaceSample> out;
    const int n = std::max(32, static_cast<int>(std::ceil(4.0 * pi * r * r / (spacing * spacing))));
    const double golden = pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < n; ++k) {
        const double z = 1.0 - 2.0 * (k + 0.5) / n;
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double a = golden * k;
        const Point u = make_point({rho * std::cos(a), rho * std::sin(a), z});
        SurfaceSample s;
        s.point = c + r * u;
        s.inward_normal = inward_to_center ? Point(-u) : u;
        const double k0 = inward_to_center ? 1.0 / r : -1.0 / r;
        s.curvatures = {k0, k0};
        s.surface_id = id;
        s.weight = 4.0 * pi * r * r / n;
        out.push_back(s);
    }
    return out;
}

std::vector<SurfaceSample> round_samples(const Point& c, double r, double spacing, int id, bool inward_to_center)
{
    if (c.size() == 2) return circle_samples(c, r, spacing, id, inward_to_center);
    if (c.size() == 3) return sphere_samples(c, r, spacing, id, inward_to_center);
    std::vector<SurfaceSample> out;
    for (int side : {-1, 1}) {
        SurfaceSample s;
        s.point = c + make_point({side * r});
        s.inward_normal = make_point({inward_to_center ? -1.0 * side : 1.0 * side});
        s.surface_id = id;
        s.weight = 1.0;
        out.push_back(s);
        if (out.size() == 2) out.back().surface_id = id + 1;
    }
    return out;
}

Point radial_unit(const Point& v)
{
    const double n = v.norm();
    if (n > 0.0) return v / n;
    return unit_axis(static_cast<int>(v.size()), 0);
}

class Ball final : public Shape {
public:
    Ball(Point c, double r) : c_(std::move(c)), r_(r)
    {
        if (!(r_ > 0.0)) fail(ErrorKind::configuration, "ball radius must be > 0");
        dim = static_cast<int>(c_.size());
        params = {{"center", point_json(c_)}, {"radius", r_}};
    }
    DomainKind kind() const override { return DomainKind::ball; }
    double level(const Point& x) const override { return r_ - (x - c_).norm(); }
    std::pair<Point, Point> box() const override
    {
        return {c_ - Point::Constant(dim, r_), c_ + Point::Constant(dim, r_)};
    }
    std::optional<Point> closest(const Point& x) const override { return Point(c_ + r_ * radial_unit(x - c_)); }
    std::optional<SurfaceSample> curvature(const Point& xi) const override
    {
        SurfaceSample s;
        s.point = xi;
        s.inward_normal = -radial_unit(xi - c_);
        s.curvatures.assign(static_cast<std::size_t>(dim - 1), 1.0 / r_);
        return s;
    }
    std::optional<double> reach() const override { return r_; }
    std::optional<std::vector<SurfaceSample>> samples(double spacing) const override
    {
        return round_samples(c_, r_, spacing, 0, true);
    }

private:
    Point c_;
    double r_;
};

class Annulus final : public Shape {
public:
    Annulus(Point c, double r1, double r2) : c_(std::move(c)), r1_(r1), r2_(r2)
    {
        if (!(r1_ > 0.0 && r2_ > r1_)) fail(ErrorKind::configuration, "annulus needs 0 < inner_radius < outer_radius");
        dim = static_cast<int>(c_.size());
        if (dim < 2) fail(ErrorKind::configuration, "annulus needs dim 2 or 3");
        params = {{"center", point_json(c_)}, {"inner_radius", r1_}, {"outer_radius", r2_}};
    }
    DomainKind kind() const override { return DomainKind::annulus; }
    double level(const Point& x) const override
    {
        const double r = (x - c_).norm();
        return std::min(r - r1_, r2_ - r);
    }
    std::pair<Point, Point> box() const override
    {
        return {c_ - Point::Constant(dim, r2_), c_ + Point::Constant(dim, r2_)};
    }
    std::optional<Point> closest(const Point& x) const override
    {
        const double r = (x - c_).norm();
        const Point u = radial_unit(x - c_);
        return Point(c_ + (std::abs(r - r1_) <= std::abs(r2_ - r) ? r1_ : r2_) * u);
    }
    std::optional<SurfaceSample> curvature(const Point& xi) const override
    {
        const double r = (xi - c_).norm();
        const Point u = radial_unit(xi - c_);
        SurfaceSample s;
        s.point = xi;
        const bool inner = std::abs(r - r1_) < std::abs(r - r2_);
        s.inward_normal = inner ? u : Point(-u);
        s.curvatures.assign(static_cast<std::size_t>(dim - 1), inner ? -1.0 / r1_ : 1.0 / r2_);
        s.surface_id = inner ? 0 : 1;
        return s;
    }
    std::optional<double> reach() const override { return std::min(0.5 * (r2_ - r1_), r1_); }
    std::optional<std::vector<SurfaceSample>> samples(double spacing) const override
    {
        auto out = round_samples(c_, r1_, spacing, 0, false);
        auto outer = round_samples(c_, r2_, spacing, 1, true);
        out.insert(out.end(), outer.begin(), outer.end());
        return out;
    }

private:
    Point c_;
    double r1_, r2_;
};

/// Closest point on the ellipsoid sum (x_i / e_i)^2 = 1 to y, with y >= 0 and
/// e sorted in decreasing order. Robust bisection on the Lagrange
/// multiplier, reducing dimension when components of y vanish.
std::vector<double> ellipsoid_closest_sorted(const std::vector<double>& e, const std::vector<double>& y)
{
    const std::size_t m = e.size();
    std::vector<double> x(m, 0.0);
    if (m == 1) {
        x[0] = e[0];
        return x;
    }
    if (y[m - 1] > 0.0) {
        std::vector<std::size_t> pos;
        for (std::size_t i = 0; i < m; ++i)
            if (y[i] > 0.0) pos.push_back(i);
        if (pos.size() < m) {
            std::vector<double> es, ys;
            for (auto i : pos) {
                es.push_back(e[i]);
                ys.push_back(y[i]);
            }
            const auto sub = ellipsoid_closest_sorted(es, ys);
            for (std::size_t k = 0; k < pos.size(); ++k) x[pos[k]] = sub[k];
            return x;
        }
        std::vector<double> z(m), r(m), n(m);
        double g = -1.0;
        for (std::size_t i = 0; i < m; ++i) {
            z[i] = y[i] / e[i];
            g += z[i] * z[i];
        }
        if (g == 0.0) return y;
        double nn = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            r[i] = (e[i] / e[m - 1]) * (e[i] / e[m - 1]);
            n[i] = r[i] * z[i];
            nn += n[i] * n[i];
        }
        double s0 = z[m - 1] - 1.0;
        double s1 = g < 0.0 ? 0.0 : std::sqrt(nn) - 1.0;
        double s = 0.0;
        for (int it = 0; it < 4096; ++it) {
            s = 0.5 * (s0 + s1);
            if (s == s0 || s == s1) break;
            double gs = -1.0;
            for (std::size_t i = 0; i < m; ++i) {
                const double q = n[i] / (s + r[i]);
                gs += q * q;
            }
            if (gs > 0.0)
                s0 = s;
            else if (gs < 0.0)
                s1 = s;
            else
                break;
        }
        for (std::size_t i = 0; i < m; ++i) x[i] = r[i] * y[i] / (s + r[i]);
        return x;
    }
    const double el = e[m - 1];
    double sum = 0.0;
    bool off_plane = true;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double denom = e[i] * e[i] - el * el;
        if (!(denom > 0.0)) {
            off_plane = false;
            break;
        }
        x[i] = e[i] * e[i] * y[i] / denom;
        sum += (x[i] / e[i]) * (x[i] / e[i]);
    }
    if (off_plane && sum < 1.0) {
        x[m - 1] = el * std::sqrt(1.0 - sum);
        return x;
    }
    std::vector<double> es(e.begin(), e.end() - 1), ys(y.begin(), y.end() - 1);
    const auto sub = ellipsoid_closest_sorted(es, ys);
    std::fill(x.begin(), x.end(), 0.0);
    std::copy(sub.begin(), sub.end(), x.begin());
    return x;
}

class Ellipsoid final : public Shape {
public:
    Ellipsoid(Point c, Point axes) : c_(std::move(c)), e_(std::move(axes))
    {
        dim = static_cast<int>(c_.size());
        if (e_.size() != c_.size() || dim < 2) fail(ErrorKind::configuration, "ellipsoid needs matching center and semi_axes (dim 2 or 3)");
        for (int a = 0; a < dim; ++a)
            if (!(e_[a] > 0.0)) fail(ErrorKind::configuration, "ellipsoid semi-axes must be > 0");
        params = {{"center", point_json(c_)}, {"semi_axes", point_json(e_)}};
        order_.resize(static_cast<std::size_t>(dim));
        std::iota(order_.begin(), order_.end(), 0);
        std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) { return e_[a] > e_[b]; });
    }
    DomainKind kind() const override { return DomainKind::ellipsoid; }
    double level(const Point& x) const override
    {
        const Point y = x - c_;
        const Point p = closest_local(y);
        const double d = (p - y).norm();
        double q = 0.0;
        for (int a = 0; a < dim; ++a) q += (y[a] / e_[a]) * (y[a] / e_[a]);
        return q < 1.0 ? d : -d;
    }
    std::pair<Point, Point> box() const override { return {c_ - e_, c_ + e_}; }
    std::optional<Point> closest(const Point& x) const override { return Point(c_ + closest_local(x - c_)); }
    std::optional<SurfaceSample> curvature(const Point& xi) const override
    {
        const Point y = xi - c_;
        Point g(dim);
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
        for (int a = 0; a < dim; ++a) {
            g[a] = -2.0 * y[a] / (e_[a] * e_[a]);
            h(a, a) = -2.0 / (e_[a] * e_[a]);
        }
        return implicit_curvature(xi, g, h);
    }
    std::optional<double> reach() const override
    {
        const double emax = e_.maxCoeff();
        const double emin = e_.minCoeff();
        return emin * emin / emax;
    }
    std::optional<std::vector<SurfaceSample>> samples(double spacing) const override
    {
        if (dim != 2) return std::nullopt;
        const int fine = 65536;
        std::vector<double> arc(fine + 1, 0.0);
        auto at = [&](double t) { return make_point({e_[0] * std::cos(t), e_[1] * std::sin(t)}); };
        for (int k = 1; k <= fine; ++k)
            arc[static_cast<std::size_t>(k)] =
                arc[static_cast<std::size_t>(k - 1)] + (at(2 * pi * k / fine) - at(2 * pi * (k - 1) / fine)).norm();
        const double length = arc.back();
        const int n = std::max(16, static_cast<int>(std::ceil(length / spacing)));
        std::vector<SurfaceSample> out;
        std::size_t j = 0;
        for (int k = 0; k < n; ++k) {
            const double target = length * (k + 0.5) / n;
            while (j + 1 < arc.size() && arc[j + 1] < target) ++j;
            const double f = (target - arc[j]) / (arc[j + 1] - arc[j]);
            const double t = 2 * pi * (static_cast<double>(j) + f) / fine;
            const Point p = c_ + at(t);
            SurfaceSample s = *curvature(p);
            s.weight = length / n;
            out.push_back(s);
        }
        return out;
    }

private:
    Point closest_local(const Point& y) const
    {
        std::vector<double> es, ys;
        for (int a : order_) {
            es.push_back(e_[a]);
            ys.push_back(std::abs(y[a]));
        }
        const auto xs = ellipsoid_closest_sorted(es, ys);
        Point p(dim);
        for (std::size_t k = 0; k < order_.size(); ++k) {
            const int a = order_[k];
            p[a] = std::copysign(xs[k], y[a] < 0.0 ? -1.0 : 1.0);
        }
        return p;
    }

    Point c_;
    Point e_;
    std::vector<int> order_;
};

class BallUnion final : public Shape {
public:
    BallUnion(std::vector<Point> centers, std::vector<double> radii) : c_(std::move(centers)), r_(std::move(radii))
    {
        if (c_.empty() || c_.size() != r_.size()) fail(ErrorKind::configuration, "ball_union needs matching centers and radii");
        dim = static_cast<int>(c_[0].size());
        nlohmann::json cs = nlohmann::json::array();
        for (std::size_t i = 0; i < c_.size(); ++i) {
            if (c_[i].size() != dim) fail(ErrorKind::configuration, "ball_union centers must share a dimension");
            if (!(r_[i] > 0.0)) fail(ErrorKind::configuration, "ball_union radii must be > 0");
            cs.push_back(point_json(c_[i]));
        }
        params = {{"centers", cs}, {"radii", r_}};
        component_.resize(c_.size());
        std::iota(component_.begin(), component_.end(), 0);
        gap_ = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < c_.size(); ++i)
            for (std::size_t j = i + 1; j < c_.size(); ++j) {
                const double g = (c_[i] - c_[j]).norm() - r_[i] - r_[j];
                gap_ = std::min(gap_, g);
                if (g <= 0.0) merge(i, j);
            }
        disjoint_ = gap_ > 0.0;
    }
    DomainKind kind() const override { return DomainKind::ball_union; }
    double level(const Point& x) const override
    {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < c_.size(); ++i) best = std::max(best, r_[i] - (x - c_[i]).norm());
        return best;
    }
    bool exact() const override { return disjoint_; }
    bool exact_outside() const override { return true; }
    bool smooth() const override { return disjoint_; }
    std::pair<Point, Point> box() const override
    {
        Point lo = c_[0] - Point::Constant(dim, r_[0]);
        Point hi = c_[0] + Point::Constant(dim, r_[0]);
        for (std::size_t i = 1; i < c_.size(); ++i) {
            lo = lo.cwiseMin(c_[i] - Point::Constant(dim, r_[i]));
            hi = hi.cwiseMax(c_[i] + Point::Constant(dim, r_[i]));
        }
        return {lo, hi};
    }
    std::optional<Point> closest(const Point& x) const override
    {
        if (!disjoint_ && level(x) > 0.0) return std::nullopt;
        const std::size_t i = nearest(x);
        return Point(c_[i] + r_[i] * radial_unit(x - c_[i]));
    }
    std::optional<SurfaceSample> curvature(const Point& xi) const override
    {
        const std::size_t i = nearest(xi);
        SurfaceSample s;
        s.point = xi;
        s.inward_normal = -radial_unit(xi - c_[i]);
        s.curvatures.assign(static_cast<std::size_t>(dim - 1), 1.0 / r_[i]);
        s.surface_id = static_cast<int>(find(i));
        return s;
    }
    std::optional<double> reach() const override
    {
        if (!disjoint_) return std::nullopt;
        return std::min(*std::min_element(r_.begin(), r_.end()), 0.5 * gap_);
    }
    std::optional<std::vector<SurfaceSample>> samples(double spacing) const override
    {
        std::vector<SurfaceSample> out;
        for (std::size_t i = 0; i < c_.size(); ++i) {
            for (auto& s : round_samples(c_[i], r_[i], spacing, static_cast<int>(find(i)), true)) {
                bool covered = false;
                for (std::size_t j = 0; j < c_.size(); ++j)
                    if (j != i && (s.point - c_[j]).norm() < r_[j] - 1e-12) covered = true;
                if (!covered) out.push_back(s);
            }
        }
        return out;
    }

private:
    std::size_t nearest(const Point& x) const
    {
        std::size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < c_.size(); ++i) {
            const double d = std::abs((x - c_[i]).norm() - r_[i]);
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        return best;
    }
    std::size_t find(std::size_t i) const
    {
        while (component_[i] != i) i = component_[i];
        return i;
    }
    void merge(std::size_t i, std::size_t j)
    {
        const std::size_t a = find(i), b = find(j);
        if (a != b) component_[std::max(a, b)] = std::min(a, b);
    }

    std::vector<Point> c_;
    std::vector<double> r_;
    std::vector<std::size_t> component_;
    double gap_ = 0.0;
    bool disjoint_ = true;
};

class Polygon final : public Shape {
public:
    explicit Polygon(std::vector<Point> v) : v_(std::move(v))
    {
        dim = 2;
        if (v_.size() < 3) fail(ErrorKind::configuration, "polygon needs at least 3 vertices");
        nlohmann::json vs = nlohmann::json::array();
        double area = 0.0;
        for (std::size_t i = 0; i < v_.size(); ++i) {
            if (v_[i].size() != 2) fail(ErrorKind::unsupported_kind, "polygon vertices must be 2D (polyhedra are not supported)");
            vs.push_back(point_json(v_[i]));
            const Point& a = v_[i];
            const Point& b = v_[(i + 1) % v_.size()];
            area += a[0] * b[1] - a[1] * b[0];
        }
        if (area == 0.0) fail(ErrorKind::configuration, "degenerate polygon");
        ccw_ = area > 0.0;
        params = {{"vertices", vs}};
    }
    DomainKind kind() const override { return DomainKind::polygon; }
    bool smooth() const override { return false; }
    double level(const Point& x) const override
    {
        double best = std::numeric_limits<double>::infinity();
        bool inside = false;
        const std::size_t n = v_.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const Point& a = v_[j];
            const Point& b = v_[i];
            best = std::min(best, (x - segment_closest(a, b, x)).norm());
            if ((b[1] > x[1]) != (a[1] > x[1]) && x[0] < (a[0] - b[0]) * (x[1] - b[1]) / (a[1] - b[1]) + b[0])
                inside = !inside;
        }
        return inside ? best : -best;
    }
    std::pair<Point, Point> box() const override
    {
        Point lo = v_[0], hi = v_[0];
        for (const auto& p : v_) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        return {lo, hi};
    }
    std::optional<Point> closest(const Point& x) const override
    {
        double best = std::numeric_limits<double>::infinity();
        Point bp = v_[0];
        for (std::size_t i = 0; i < v_.size(); ++i) {
            const Point p = segment_closest(v_[i], v_[(i + 1) % v_.size()], x);
            const double d = (x - p).norm();
            if (d < best) {
                best = d;
                bp = p;
            }
        }
        return bp;
    }
    std::optional<SurfaceSample> curvature(const Point& xi) const override
    {
        Point nsum = Point::Zero(2);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < v_.size(); ++i) {
            const Point& a = v_[i];
            const Point& b = v_[(i + 1) % v_.size()];
            const double d = (xi - segment_closest(a, b, xi)).norm();
            if (d < best - 1e-12) {
                best = d;
                nsum = inward(a, b);
            } else if (d <= best + 1e-12) {
                nsum += inward(a, b);
            }
        }
        SurfaceSample s;
        s.point = xi;
        s.inward_normal = nsum.normalized();
        s.curvatures = {0.0};
        return s;
    }
    std::optional<std::vector<SurfaceSample>> samples(double spacing) const override
    {
        std::vector<SurfaceSample> out;
        for (std::size_t i = 0; i < v_.size(); ++i) {
            const Point& a = v_[i];
            const Point& b = v_[(i + 1) % v_.size()];
            const double len = (b - a).norm();
            const int n = std::max(1, static_cast<int>(std::ceil(len / spacing)));
            for (int k = 0; k < n; ++k) {
                SurfaceSample s;
                s.point = a + (b - a) * ((k + 0.5) / n);
                s.inward_normal = inward(a, b);
                s.curvatures = {0.0};
                s.weight = len / n;
                out.push_back(s);
            }
        }
        return out;
    }

private:
    static Point segment_closest(const Point& a, const Point& b, const Point& x)
    {
        const Point ab = b - a;
        const double l2 = ab.squaredNorm();
        const double t = l2 > 0.0 ? std::clamp((x - a).dot(ab) / l2, 0.0, 1.0) : 0.0;
        return a + t * ab;
    }
    Point inward(const Point& a, const Point& b) const
    {
        const Point e = (b - a).normalized();
        return ccw_ ? make_point({-e[1], e[0]}) : make_point({e[1], -e[0]});
    }

    std::vector<Point> v_;
    bool ccw_ = true;
};

class Halfspace final : public Shape {
public:
    Halfspace(const Point& normal, double offset) : offset_(offset)
    {
        const double nn = normal.norm();
        if (!(nn > 0.0)) fail(ErrorKind::configuration, "halfspace normal must be nonzero");
        n_ = normal / nn;
        dim = static_cast<int>(n_.size());
        params = {{"normal", point_json(normal)}, {"offset", offset_}};
    }
    DomainKind kind() const override { return DomainKind::halfspace; }
    double level(const Point& x) const override { return x.dot(n_) - offset_; }
    bool bounded_boundary() const override { return dim == 1; }
    std::pair<Point, Point> box() const override
    {
        if (dim == 1) return {offset_ * n_, offset_ * n_};
        return unbounded_box(dim);
    }
    std::optional<Point> closest(const Point& x) const override { return Point(x - level(x) * n_); }
    std::optional<SurfaceSample> curvature(const Point& xi) const override
    {
        SurfaceSample s;
        s.point = xi;
        s.inward_normal = n_;
        s.curvatures.assign(static_cast<std::size_t>(dim - 1), 0.0);
        return s;
    }
    std::optional<double> reach() const override { return std::numeric_limits<double>::infinity(); }

private:
    Point n_;
    double offset_;
};

enum class Op { set_union, set_intersection, set_difference, complement, offset, parallel_body };

const char* op_name(Op op)
{
    switch (op) {
    case Op::set_union: return "union";
    case Op::set_intersection: return "intersection";
    case Op::set_difference: return "difference";
    case Op::complement: return "complement";
    case Op::offset: return "offset";
    case Op::parallel_body: return "parallel_body";
    }
    return "";
}

class Implicit final : public Shape {
public:
    Implicit(Op op, std::vector<DomainSpec> operands, double amount) : op_(op), ops_(std::move(operands)), amount_(amount)
    {
        if (ops_.empty()) fail(ErrorKind::configuration, "implicit domain needs operands");
        dim = ops_[0].dim();
        for (const auto& o : ops_)
            if (o.dim() != dim) fail(ErrorKind::configuration, "implicit operands must share a dimension");
        params = {{"op", op_name(op_)}};
        switch (op_) {
        case Op::set_union:
        case Op::set_intersection: {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& o : ops_) arr.push_back(o.to_json());
            params["operands"] = arr;
            break;
        }
        case Op::set_difference: {
            if (ops_.size() < 2) fail(ErrorKind::configuration, "difference needs a base and subtrahends");
            params["base"] = ops_[0].to_json();
            nlohmann::json arr = nlohmann::json::array();
            for (std::size_t i = 1; i < ops_.size(); ++i) arr.push_back(ops_[i].to_json());
            params["subtract"] = arr;
            break;
        }
        case Op::complement: params["base"] = ops_[0].to_json(); break;
        case Op::offset:
            if (!ops_[0].exact_distance()) fail(ErrorKind::unsupported_kind, "offset needs a base with exact signed distance");
            params["base"] = ops_[0].to_json();
            params["distance"] = amount_;
            break;
        case Op::parallel_body:
            if (!(amount_ > 0.0)) fail(ErrorKind::configuration, "parallel_body radius must be > 0");
            params["base"] = ops_[0].to_json();
            params["radius"] = amount_;
            break;
        }
    }
    DomainKind kind() const override { return DomainKind::implicit; }
    double level(const Point& x) const override
    {
        switch (op_) {
        case Op::set_union: {
            double v = -std::numeric_limits<double>::infinity();
            for (const auto& o : ops_) v = std::max(v, o.signed_distance(x));
            return v;
        }
        case Op::set_intersection: {
            double v = std::numeric_limits<double>::infinity();
            for (const auto& o : ops_) v = std::min(v, o.signed_distance(x));
            return v;
        }
        case Op::set_difference: {
            double v = ops_[0].signed_distance(x);
            for (std::size_t i = 1; i < ops_.size(); ++i) v = std::min(v, -ops_[i].signed_distance(x));
            return v;
        }
        case Op::complement: return -ops_[0].signed_distance(x);
        case Op::offset: return ops_[0].signed_distance(x) - amount_;
        case Op::parallel_body: return amount_ + std::min(0.0, ops_[0].signed_distance(x));
        }
        return 0.0;
    }
    bool exact() const override { return op_ == Op::complement && ops_[0].exact_distance(); }
    bool exact_outside() const override
    {
        if (op_ == Op::parallel_body) return ops_[0].shape().exact_outside();
        if (op_ == Op::set_union) {
            for (const auto& o : ops_)
                if (!o.shape().exact_outside()) return false;
            return true;
        }
        return exact();
    }
    bool bounded_boundary() const override
    {
        for (const auto& o : ops_)
            if (!o.boundary_bounded()) return false;
        return true;
    }
    bool smooth() const override
    {
        if (op_ == Op::offset || op_ == Op::complement || op_ == Op::parallel_body) return ops_[0].smooth();
        return false;
    }
    std::pair<Point, Point> box() const override
    {
        auto b = ops_[0].boundary_box();
        for (std::size_t i = 1; i < ops_.size(); ++i) {
            auto bi = ops_[i].boundary_box();
            b.first = b.first.cwiseMin(bi.first);
            b.second = b.second.cwiseMax(bi.second);
        }
        if (op_ == Op::offset || op_ == Op::parallel_body) {
            const double pad = std::abs(amount_);
            b.first.array() -= pad;
            b.second.array() += pad;
        }
        return b;
    }

private:
    Op op_;
    std::vector<DomainSpec> ops_;
    double amount_ = 0.0;
};

}  // namespace
}  // namespace detail

using detail::Shape;

DomainSpec DomainSpec::ball(const Point& center, double radius)
{
    return DomainSpec(std::make_shared<detail::Ball>(center, radius));
}

DomainSpec DomainSpec::annulus(const Point& center, double inner_radius, double outer_radius)
{
    return DomainSpec(std::make_shared<detail::Annulus>(center, inner_radius, outer_radius));
}

DomainSpec DomainSpec::ellipsoid(const Point& center, const Point& semi_axes)
{
    return DomainSpec(std::make_shared<detail::Ellipsoid>(center, semi_axes));
}

DomainSpec DomainSpec::ball_union(const std::vector<Point>& centers, const std::vector<double>& radii)
{
    return DomainSpec(std::make_shared<detail::BallUnion>(centers, radii));
}

DomainSpec DomainSpec::polygon(const std::vector<Point>& vertices)
{
    return DomainSpec(std::make_shared<detail::Polygon>(vertices));
}

DomainSpec DomainSpec::halfspace(const Point& normal, double offset)
{
    return DomainSpec(std::make_shared<detail::Halfspace>(normal, offset));
}

DomainSpec DomainSpec::set_union(const std::vector<DomainSpec>& operands)
{
    return DomainSpec(std::make_shared<detail::Implicit>(detail::Op::set_union, operands, 0.0));
}

DomainSpec DomainSpec::set_intersection(const std::vector<DomainSpec>& operands)
{
    return DomainSpec(std::make_shared<detail::Implicit>(detail::Op::set_intersection, operands, 0.0));
}

DomainSpec DomainSpec::set_difference(const DomainSpec& base, const std::vector<DomainSpec>& subtrahends)
{
    std::vector<DomainSpec> ops{base};
    ops.insert(ops.end(), subtrahends.begin(), subtrahends.end());
    return DomainSpec(std::make_shared<detail::Implicit>(detail::Op::set_difference, ops, 0.0));
}

DomainSpec DomainSpec::complement(const DomainSpec& base)
{
    return DomainSpec(std::make_shared<detail::Implicit>(detail::Op::complement, std::vector<DomainSpec>{base}, 0.0));
}

DomainSpec DomainSpec::offset(const DomainSpec& base, double distance)
{
    return DomainSpec(std::make_shared<detail::Implicit>(detail::Op::offset, std::vector<DomainSpec>{base}, distance));
}

DomainSpec DomainSpec::parallel_body(const DomainSpec& base, double radius)
{
    return DomainSpec(
        std::make_shared<detail::Implicit>(detail::Op::parallel_body, std::vector<DomainSpec>{base}, radius));
}

DomainSpec DomainSpec::from_json(const nlohmann::json& j)
{
    if (!j.is_object()) fail(ErrorKind::schema, "domain must be an object");
    if (!j.contains("kind") || !j.at("kind").is_string()) fail(ErrorKind::schema, "domain.kind must be a string");
    const std::string kind = j.at("kind").get<std::string>();
    const nlohmann::json params = j.value("params", nlohmann::json::object());
    DomainSpec d = [&]() -> DomainSpec {
        if (kind == "ball" || kind == "disk" || kind == "sphere")
            return ball(detail::point_from(params.at("center"), "domain.params.center"), detail::number_from(params, "radius"));
        if (kind == "annulus")
            return annulus(detail::point_from(params.at("center"), "domain.params.center"),
                           detail::number_from(params, "inner_radius"), detail::number_from(params, "outer_radius"));
        if (kind == "ellipse" || kind == "ellipsoid")
            return ellipsoid(detail::point_from(params.at("center"), "domain.params.center"),
                             detail::point_from(params.at("semi_axes"), "domain.params.semi_axes"));
        if (kind == "ball_union" || kind == "union_of_balls") {
            std::vector<Point> cs;
            for (const auto& c : params.at("centers")) cs.push_back(detail::point_from(c, "domain.params.centers[k]"));
            return ball_union(cs, params.at("radii").get<std::vector<double>>());
        }
        if (kind == "polygon") {
            std::vector<Point> vs;
            for (const auto& v : params.at("vertices")) vs.push_back(detail::point_from(v, "domain.params.vertices[k]"));
            return polygon(vs);
        }
        if (kind == "halfspace")
            return halfspace(detail::point_from(params.at("normal"), "domain.params.normal"), params.value("offset", 0.0));
        if (kind == "implicit") {
            if (!params.contains("op") || !params.at("op").is_string()) fail(ErrorKind::schema, "domain.params.op must be a string");
            const std::string op = params.at("op").get<std::string>();
            auto list = [&](const char* key) {
                std::vector<DomainSpec> out;
                if (!params.contains(key) || !params.at(key).is_array())
                    fail(ErrorKind::schema, std::string("domain.params.") + key + " must be an array");
                for (const auto& o : params.at(key)) out.push_back(from_json(o));
                return out;
            };
            auto base = [&]() {
                if (!params.contains("base")) fail(ErrorKind::schema, "domain.params.base is required");
                return from_json(params.at("base"));
            };
            if (op == "union") return set_union(list("operands"));
            if (op == "intersection") return set_intersection(list("operands"));
            if (op == "difference") return set_difference(base(), list("subtract"));
            if (op == "complement") return complement(base());
            if (op == "offset") return offset(base(), detail::number_from(params, "distance"));
            if (op == "parallel_body") return parallel_body(base(), detail::number_from(params, "radius"));
            fail(ErrorKind::unsupported_kind, "unknown implicit op '" + op + "'");
        }
        fail(ErrorKind::unsupported_kind, "unknown domain kind '" + kind + "'");
    }();
    if (j.contains("dim") && j.at("dim").get<int>() != d.dim())
        fail(ErrorKind::schema, "domain.dim does not match the parameters");
    return d;
}

nlohmann::json DomainSpec::to_json() const
{
    std::string name = isotherm::to_string(kind());
    if (kind() == DomainKind::ellipsoid && dim() == 2) name = "ellipse";
    return {{"kind", name}, {"params", shape_->params}, {"dim", shape_->dim}};
}

DomainKind DomainSpec::kind() const { return shape_->kind(); }
int DomainSpec::dim() const { return shape_->dim; }
const nlohmann::json& DomainSpec::params() const { return shape_->params; }

double DomainSpec::signed_distance(const Point& x) const
{
    if (x.size() != shape_->dim) fail(ErrorKind::geometry, "point dimension does not match the domain");
    return shape_->level(x);
}

bool DomainSpec::exact_distance() const { return shape_->exact(); }
bool DomainSpec::boundary_bounded() const { return shape_->bounded_boundary(); }
bool DomainSpec::smooth() const { return shape_->smooth(); }
std::pair<Point, Point> DomainSpec::boundary_box() const { return shape_->box(); }

std::optional<Point> DomainSpec::closest_boundary_point(const Point& x) const { return shape_->closest(x); }

}  // namespace isotherm

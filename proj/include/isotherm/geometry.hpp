#pragma once

#include "isotherm/grid.hpp"
#include "isotherm/types.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace isotherm {

enum class DomainKind { ball, annulus, ellipsoid, ball_union, polygon, halfspace, implicit };

const char* to_string(DomainKind kind) noexcept;

namespace detail {
class Shape;
}

/// An open set Omega in R^N (N = 1, 2, 3) with a signed distance that is
/// positive inside. Primitive kinds evaluate the exact signed distance;
/// implicit kinds (set operations, offsets, parallel bodies) evaluate a
/// 1-Lipschitz level function with the same zero set and sign, and rely on
/// build_signed_distance for true distances away from the boundary.
///
/// Copies share the immutable shape, so passing by value is cheap.
class DomainSpec {
public:
    static DomainSpec ball(const Point& center, double radius);
    static DomainSpec annulus(const Point& center, double inner_radius, double outer_radius);
    /// Axis-aligned ellipse (N = 2) or ellipsoid (N = 3).
    static DomainSpec ellipsoid(const Point& center, const Point& semi_axes);
    static DomainSpec ball_union(const std::vector<Point>& centers, const std::vector<double>& radii);
    /// Simple polygon (N = 2), vertices in either orientation.
    static DomainSpec polygon(const std::vector<Point>& vertices);
    /// {x : x . normal > offset}. Unbounded boundary; validation harness only.
    static DomainSpec halfspace(const Point& normal, double offset);

    static DomainSpec set_union(const std::vector<DomainSpec>& operands);
    static DomainSpec set_intersection(const std::vector<DomainSpec>& operands);
    /// base minus the closure of every subtrahend.
    static DomainSpec set_difference(const DomainSpec& base, const std::vector<DomainSpec>& subtrahends);
    static DomainSpec complement(const DomainSpec& base);
    /// Inner parallel set {x : d*(x) > distance} of base.
    static DomainSpec offset(const DomainSpec& base, double distance);
    /// Open R-neighborhood {y : dist(y, closure(base)) < R}.
    static DomainSpec parallel_body(const DomainSpec& base, double radius);

    static DomainSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    DomainKind kind() const;
    int dim() const;
    const nlohmann::json& params() const;

    /// Signed distance (primitives) or signed level function (implicit).
    double signed_distance(const Point& x) const;
    bool contains(const Point& x) const { return signed_distance(x) > 0.0; }
    /// True when signed_distance is the exact signed distance everywhere.
    bool exact_distance() const;
    bool boundary_bounded() const;
    bool smooth() const;
    /// Bounding box of the boundary (finite part for halfspaces is empty).
    std::pair<Point, Point> boundary_box() const;
    /// Exact nearest boundary point, available for primitive kinds.
    std::optional<Point> closest_boundary_point(const Point& x) const;

    const detail::Shape& shape() const { return *shape_; }

private:
    explicit DomainSpec(std::shared_ptr<const detail::Shape> shape) : shape_(std::move(shape)) {}
    std::shared_ptr<const detail::Shape> shape_;
};

/// Nodal signed distance d* on a grid: positive inside, negative outside.
struct SignedDistanceField {
    GridField field;
    DomainSpec domain;

    const GridSpec& grid() const { return field.grid; }
    double value(const Point& x) const { return field.interpolate(x); }
    /// Multilinear interpolation of nodal centered-difference gradients.
    Point gradient(const Point& x) const;
    /// Multilinear interpolation of nodal centered-difference Hessians.
    Eigen::MatrixXd hessian(const Point& x) const;
    double gradient_norm_at_node(std::size_t flat_index) const;
    double laplacian_at_node(std::size_t flat_index) const;
};

/// Boundary or level-surface point. Curvatures are taken with respect to
/// inward_normal and are positive when the surface bends toward it (a circle
/// of radius r bounding a disk has +1/r). weight is the surface measure the
/// sample stands for (0 when unknown).
struct SurfaceSample {
    Point point;
    Point inward_normal;
    std::vector<double> curvatures;
    int surface_id = 0;
    double weight = 0.0;
};

struct TouchingBall {
    double radius = 0.0;
    Point contact;
    int contact_count = 0;
    std::vector<Point> contacts;
};

struct ConeCheck {
    bool holds = false;
    Point axis;
};

struct SphereFit {
    Point center;
    double radius = 0.0;
    double max_residual = 0.0;
};

SignedDistanceField build_signed_distance(const DomainSpec& domain, const GridSpec& grid, double margin = 0.0);

/// Conservative two-sided reach estimate: half of the true reach.
double tubular_radius(const DomainSpec& domain);

/// Nearest point on the boundary; exact for primitives, Newton projection
/// on the level function otherwise.
Point project_to_boundary(const DomainSpec& domain, const Point& x);

/// Principal curvatures at a boundary point, sorted ascending. fd_step is the
/// centered-difference spacing used for implicit kinds.
SurfaceSample principal_curvatures(const DomainSpec& domain, const Point& xi, double tolerance = 1e-6,
                                   double fd_step = 1e-3);

/// Boundary samples, spacing apart (arc length in 2D, ~area^(1/2) in 3D),
/// labelled by connected component. Implicit kinds are sampled from a
/// signed distance grid with cell size `spacing`.
std::vector<SurfaceSample> sample_boundary(const DomainSpec& domain, double spacing);

/// Samples of {d* = level} from the grid (marching squares / tetrahedra);
/// weights sum to the extracted surface measure. Normals follow grad d*.
std::vector<SurfaceSample> extract_level_surface(const SignedDistanceField& sdf, double level);

/// Interior parallel surface Gamma_s = {d* = s}, s > 0.
std::vector<SurfaceSample> parallel_surface(const SignedDistanceField& sdf, double s);

/// H^{N-1}(Gamma_s intersected with B_R(x0)).
double level_band_measure(const SignedDistanceField& sdf, double s, const Point& x0, double radius);

/// Largest ball centered at x0 inside the domain and its contact set.
/// resolution is the clustering scale h (contacts closer than 3h merge).
TouchingBall touching_ball(const DomainSpec& domain, const Point& x0, const Point& direction,
                           double resolution = 1.0 / 256.0);

DomainSpec parallel_body(const DomainSpec& domain, double radius);

/// Discrete test of D'_lambda subset of D on the probe nodes; nodes within
/// one probe spacing of the boundary are skipped.
bool reflection_containment(const DomainSpec& domain, const Point& direction, double lambda, const GridSpec& probe);

/// Interior cone condition at a boundary point. theta is the complement of
/// the cone half-angle, rho its height. The axis is tried along the inward
/// normal estimate first, then over a direction sweep.
ConeCheck cone_condition(const DomainSpec& domain, const Point& x, double theta, double rho);
bool cone_condition_check(const DomainSpec& domain, const Point& x, double theta, double rho);

/// Algebraic least-squares circle/sphere fit with geometric max residual.
SphereFit fit_sphere(const std::vector<Point>& points);

/// Groups samples by their surface_id.
std::vector<std::vector<SurfaceSample>> split_components(const std::vector<SurfaceSample>& samples);

}  // namespace isotherm

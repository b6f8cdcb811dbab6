#pragma once

#include "isotherm/geometry.hpp"

#include <optional>

namespace isotherm::detail {

class Shape {
public:
    virtual ~Shape() = default;

    virtual DomainKind kind() const = 0;
    virtual double level(const Point& x) const = 0;
    virtual std::pair<Point, Point> box() const = 0;

    /// level is the exact signed distance everywhere / on the exterior.
    virtual bool exact() const { return true; }
    virtual bool exact_outside() const { return exact(); }
    virtual bool bounded_boundary() const { return true; }
    virtual bool smooth() const { return true; }

    virtual std::optional<Point> closest(const Point&) const { return std::nullopt; }
    /// Closed-form normal and curvatures at a boundary point.
    virtual std::optional<SurfaceSample> curvature(const Point&) const { return std::nullopt; }
    /// Two-sided reach of the boundary, when known in closed form.
    virtual std::optional<double> reach() const { return std::nullopt; }
    /// Closed-form boundary sampling, spacing apart.
    virtual std::optional<std::vector<SurfaceSample>> samples(double) const { return std::nullopt; }

    int dim = 2;
    nlohmann::json params = nlohmann::json::object();
};

/// Principal curvatures of {g = 0} for g positive inside, from its gradient
/// and Hessian at the point; ascending.
SurfaceSample implicit_curvature(const Point& x, const Point& grad, const Eigen::MatrixXd& hess);

/// Orthonormal basis of the plane orthogonal to n (columns).
Eigen::MatrixXd tangent_basis(const Point& n);

}  // namespace isotherm::detail

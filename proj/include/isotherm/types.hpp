#pragma once

#include <Eigen/Core>

#include <initializer_list>
#include <vector>

namespace isotherm {

/// Position or vector in R^N, N <= 3, stored without heap allocation.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;

inline Point make_point(std::initializer_list<double> coords)
{
    Point p(static_cast<Eigen::Index>(coords.size()));
    Eigen::Index i = 0;
    for (double c : coords) p[i++] = c;
    return p;
}

inline Point make_point(const std::vector<double>& coords)
{
    Point p(static_cast<Eigen::Index>(coords.size()));
    for (std::size_t i = 0; i < coords.size(); ++i) p[static_cast<Eigen::Index>(i)] = coords[i];
    return p;
}

inline std::vector<double> to_vector(const Point& p)
{
    return std::vector<double>(p.data(), p.data() + p.size());
}

inline Point unit_axis(int dim, int axis)
{
    Point p = Point::Zero(dim);
    p[axis] = 1.0;
    return p;
}

constexpr double pi = 3.14159265358979323846;

}  // namespace isotherm

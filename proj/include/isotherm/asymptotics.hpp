#pragma once

#include "isotherm/diffusion_model.hpp"
#include "isotherm/geometry.hpp"
#include "isotherm/solver.hpp"

#include <json.hpp>

#include <limits>
#include <string>
#include <vector>

namespace isotherm {

/// Estimator values along a decreasing ladder, with a two-rung
/// extrapolation L + a * p^order (order 1/2 by default).
struct AsymptoticReport {
    std::string estimator;
    std::string parameter = "t";
    std::vector<double> ladder;
    std::vector<double> values;
    /// Relative error of each rung against the prediction (or the rung's own
    /// normalized error for Varadhan reports).
    std::vector<double> relative_errors;
    double limit = std::numeric_limits<double>::quiet_NaN();
    double prediction = std::numeric_limits<double>::quiet_NaN();
    double relative_error = std::numeric_limits<double>::quiet_NaN();
    double extrapolation_order = 0.5;
    bool monotone_decreasing = false;
    bool monotone_increasing = false;
    std::vector<std::string> warnings;
    nlohmann::json extra = nlohmann::json::object();

    nlohmann::json to_json() const;
    /// Columns t, estimator, prediction, rel_error.
    std::string to_csv() const;
};

/// Richardson limit from the last two rungs of a decreasing ladder assuming
/// value(p) = L + a * p^order.
double richardson_limit(const std::vector<double>& ladder, const std::vector<double>& values, double order = 0.5);

/// Volume of the unit ball in R^n.
double unit_ball_volume(int n);

/// -4 t Phi(u(x, t)).
double varadhan_profile(const SolutionSeries& series, const Nonlinearity& n, const Point& x, double t);

/// Per rung: sup over K of |-4 t Phi(u) - d^2| (values) and sup of that
/// error divided by d^2 (relative_errors). limit extrapolates the sup error.
AsymptoticReport varadhan_report(const SolutionSeries& series, const Nonlinearity& n, const SignedDistanceField& sdf,
                                 const std::vector<Point>& probes, const std::vector<double>& ladder);

/// Deterministic probe set {d_min <= d <= d_max} of `count` Halton points.
std::vector<Point> distance_band_probes(const DomainSpec& domain, double d_min, double d_max, int count);

/// Heat case constant by adaptive quadrature.
double heat_constant(int dim, ProblemKind problem);
/// Same constant from its Gamma-function closed form.
double heat_constant_closed_form(int dim, ProblemKind problem);

/// c * prod(1/R - kappa_j)^(-1/2); +infinity when a factor is <= tolerance.
double curvature_prediction(double radius, const std::vector<double>& curvatures, double c, double tolerance = 1e-9);

/// t^{-(N+1)/4} * int_{B_R(x0)} u over the ladder, no prediction.
AsymptoticReport heat_content_ladder(const SolutionSeries& series, const Point& x0, double radius,
                                     const std::vector<double>& ladder);

/// Ladder plus prediction at the contact point of B_R(x0). The constant is
/// the heat-case one; non-identity runs report the empirical limit only.
AsymptoticReport heat_content_limit(const SolutionSeries& series, const Point& x0, double radius,
                                    const std::vector<double>& ladder, double resolution = 0.0);

}  // namespace isotherm

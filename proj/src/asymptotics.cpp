#include "isotherm/asymptotics.hpp"

#include "isotherm/comparison.hpp"
#include "isotherm/error.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace isotherm {

namespace {

void check_ladder(const std::vector<double>& ladder)
{
    if (ladder.size() < 2) fail(ErrorKind::configuration, "ladder needs at least two rungs");
    for (std::size_t k = 0; k < ladder.size(); ++k) {
        if (!(ladder[k] > 0.0)) fail(ErrorKind::configuration, "ladder[" + std::to_string(k) + "] must be > 0");
        if (k > 0 && !(ladder[k] < ladder[k - 1]))
            fail(ErrorKind::configuration, "ladder must be strictly decreasing");
    }
}

void set_monotonicity(AsymptoticReport& r)
{
    r.monotone_decreasing = r.values.size() >= 2;
    r.monotone_increasing = r.values.size() >= 2;
    for (std::size_t k = 1; k < r.values.size(); ++k) {
        if (!(r.values[k] < r.values[k - 1])) r.monotone_decreasing = false;
        if (!(r.values[k] > r.values[k - 1])) r.monotone_increasing = false;
    }
}

nlohmann::json number_or_null(double v)
{
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double radical_inverse(int base, int index)
{
    double f = 1.0, r = 0.0;
    for (int i = index; i > 0; i /= base) {
        f /= base;
        r += f * (i % base);
    }
    return r;
}

}  // namespace

nlohmann::json AsymptoticReport::to_json() const
{
    nlohmann::json rel = nlohmann::json::array();
    for (double v : relative_errors) rel.push_back(number_or_null(v));
    return {{"estimator", estimator},
            {"parameter", parameter},
            {"ladder", ladder},
            {"values", values},
            {"relative_errors", rel},
            {"limit", number_or_null(limit)},
            {"prediction", number_or_null(prediction)},
            {"relative_error", number_or_null(relative_error)},
            {"extrapolation", {{"model", "L + a*p^order over the last two rungs"}, {"order", extrapolation_order}}},
            {"monotone_decreasing", monotone_decreasing},
            {"monotone_increasing", monotone_increasing},
            {"warnings", warnings},
            {"extra", extra}};
}

std::string AsymptoticReport::to_csv() const
{
    std::ostringstream os;
    os.precision(12);
    os << parameter << ",estimator,prediction,rel_error\n";
    for (std::size_t k = 0; k < ladder.size(); ++k) {
        os << ladder[k] << ',' << values[k] << ',';
        if (std::isnan(prediction)) os << "nan"; else os << prediction;
        os << ',';
        if (k < relative_errors.size() && !std::isnan(relative_errors[k])) os << relative_errors[k]; else os << "nan";
        os << '\n';
    }
    return os.str();
}

double richardson_limit(const std::vector<double>& ladder, const std::vector<double>& values, double order)
{
    if (ladder.size() != values.size() || ladder.size() < 2)
        fail(ErrorKind::configuration, "extrapolation needs at least two rungs with values");
    const std::size_t n = ladder.size();
    const double p1 = std::pow(ladder[n - 2], order), p2 = std::pow(ladder[n - 1], order);
    if (p1 == p2) fail(ErrorKind::configuration, "extrapolation rungs coincide");
    const double a = (values[n - 2] - values[n - 1]) / (p1 - p2);
    return values[n - 1] - a * p2;
}

double unit_ball_volume(int n)
{
    if (n < 0) fail(ErrorKind::precondition, "dimension must be >= 0");
    return std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double varadhan_profile(const SolutionSeries& series, const Nonlinearity& n, const Point& x, double t)
{
    const double u = probe(series, x, t);
    if (!(u > 0.0)) {
        std::ostringstream os;
        os << "u = " << u << " at t = " << t << "; point too deep for this t";
        fail(ErrorKind::undefined_profile, os.str());
    }
    return -4.0 * t * pressure(n, std::min(u, 1.0));
}

AsymptoticReport varadhan_report(const SolutionSeries& series, const Nonlinearity& n, const SignedDistanceField& sdf,
                                 const std::vector<Point>& probes, const std::vector<double>& ladder)
{
    check_ladder(ladder);
    if (probes.empty()) fail(ErrorKind::configuration, "probe set is empty");
    const bool exact = sdf.domain.exact_distance();
    std::vector<double> dist;
    for (const auto& x : probes) {
        const double d = exact ? sdf.domain.signed_distance(x) : sdf.value(x);
        if (!(d > 0.0)) fail(ErrorKind::precondition, "probe points must lie inside the domain");
        dist.push_back(d);
    }
    AsymptoticReport r;
    r.estimator = "sup |-4t Phi(u) - d^2|";
    r.extra["nonlinearity"] = n.to_json();
    r.extra["probes"] = probes.size();
    r.extra["d_min"] = *std::min_element(dist.begin(), dist.end());
    r.extra["d_max"] = *std::max_element(dist.begin(), dist.end());
    for (double t : ladder) {
        double sup = 0.0, sup_rel = 0.0;
        bool ok = true;
        for (std::size_t i = 0; i < probes.size() && ok; ++i) {
            try {
                const double e = std::abs(varadhan_profile(series, n, probes[i], t) - dist[i] * dist[i]);
                sup = std::max(sup, e);
                sup_rel = std::max(sup_rel, e / (dist[i] * dist[i]));
            } catch (const Error& err) {
                if (err.kind() != ErrorKind::undefined_profile) throw;
                r.warnings.push_back("rung t = " + std::to_string(t) + " dropped: " + err.what());
                ok = false;
            }
        }
        if (!ok) continue;
        r.ladder.push_back(t);
        r.values.push_back(sup);
        r.relative_errors.push_back(sup_rel);
    }
    set_monotonicity(r);
    if (r.ladder.size() >= 2) r.limit = richardson_limit(r.ladder, r.values);
    r.prediction = 0.0;
    if (!r.relative_errors.empty()) r.relative_error = r.relative_errors.back();
    return r;
}

std::vector<Point> distance_band_probes(const DomainSpec& domain, double d_min, double d_max, int count)
{
    if (!(d_min > 0.0) || !(d_max >= d_min)) fail(ErrorKind::precondition, "need 0 < d_min <= d_max");
    if (count < 1) fail(ErrorKind::precondition, "probe count must be >= 1");
    if (!domain.boundary_bounded()) fail(ErrorKind::unsupported_kind, "probe box needs a bounded boundary");
    auto [lo, hi] = domain.boundary_box();
    const int dim = domain.dim();
    const int bases[3] = {2, 3, 5};
    std::vector<Point> out;
    const int limit = 1000000;
    for (int i = 1; i <= limit && static_cast<int>(out.size()) < count; ++i) {
        Point x(dim);
        for (int a = 0; a < dim; ++a) x[a] = lo[a] + (hi[a] - lo[a]) * radical_inverse(bases[a], i);
        const double d = domain.signed_distance(x);
        if (d >= d_min && d <= d_max) out.push_back(x);
    }
    if (static_cast<int>(out.size()) < count) fail(ErrorKind::geometry, "distance band too thin to place the probes");
    return out;
}

double heat_constant(int dim, ProblemKind problem)
{
    if (dim != 2 && dim != 3) fail(ErrorKind::unsupported_kind, "heat constant is available for N = 2 and 3");
    const double a = 0.5 * (dim - 1);
    boost::math::quadrature::tanh_sinh<double> q;
    // F(40) < 1e-300, so the tail beyond 40 is below double precision.
    const double integral = q.integrate([a](double xi) { return 2.0 * profile_F(xi) * std::pow(xi, a); }, 0.0, 40.0, 1e-15);
    const double c = std::pow(2.0, a) * unit_ball_volume(dim - 1) * integral;
    return problem == ProblemKind::cauchy ? 0.5 * c : c;
}

double heat_constant_closed_form(int dim, ProblemKind problem)
{
    if (dim != 2 && dim != 3) fail(ErrorKind::unsupported_kind, "heat constant is available for N = 2 and 3");
    const double n = dim;
    const double c = std::pow(2.0, 0.5 * (n - 1)) * unit_ball_volume(dim - 1) * (2.0 / (0.5 * (n + 1))) *
                     (0.5 / std::sqrt(pi)) * std::pow(2.0, 0.5 * (n + 1)) * boost::math::tgamma(0.25 * (n + 3));
    return problem == ProblemKind::cauchy ? 0.5 * c : c;
}

double curvature_prediction(double radius, const std::vector<double>& curvatures, double c, double tolerance)
{
    if (!(radius > 0.0)) fail(ErrorKind::precondition, "R must be > 0");
    double product = 1.0;
    bool degenerate = false;
    for (double k : curvatures) {
        const double f = 1.0 / radius - k;
        if (f < -tolerance) {
            std::ostringstream os;
            os << "curvature " << k << " exceeds 1/R = " << 1.0 / radius;
            fail(ErrorKind::inconsistency, os.str());
        }
        if (f <= tolerance) degenerate = true;
        product *= f;
    }
    if (degenerate) return std::numeric_limits<double>::infinity();
    return c / std::sqrt(product);
}

AsymptoticReport heat_content_ladder(const SolutionSeries& series, const Point& x0, double radius,
                                     const std::vector<double>& ladder)
{
    check_ladder(ladder);
    AsymptoticReport r;
    const int dim = series.grid.dim;
    const double exponent = 0.25 * (dim + 1);
    r.estimator = "t^-(N+1)/4 int_B u";
    r.ladder = ladder;
    for (double t : ladder) r.values.push_back(std::pow(t, -exponent) * heat_content(series, x0, radius, t));
    set_monotonicity(r);
    r.limit = richardson_limit(r.ladder, r.values);
    r.relative_errors.assign(ladder.size(), std::numeric_limits<double>::quiet_NaN());
    r.extra["x0"] = to_vector(x0);
    r.extra["R"] = radius;
    return r;
}

AsymptoticReport heat_content_limit(const SolutionSeries& series, const Point& x0, double radius,
                                    const std::vector<double>& ladder, double resolution)
{
    const double res = resolution > 0.0 ? resolution : series.grid.h();
    const TouchingBall tb = touching_ball(series.domain, x0, Point::Zero(x0.size()), res);
    if (tb.contact_count != 1) {
        std::ostringstream os;
        os << "B_R(x0) touches the boundary at " << tb.contact_count << " separated points; a single contact is required";
        fail(ErrorKind::theorem_inapplicable, os.str());
    }
    if (radius > tb.radius + res) fail(ErrorKind::precondition, "B_R(x0) is not contained in the domain");
    AsymptoticReport r = heat_content_ladder(series, x0, radius, ladder);
    const SurfaceSample at = principal_curvatures(series.domain, tb.contact, 1e-6);
    r.extra["contact"] = to_vector(tb.contact);
    r.extra["curvatures"] = at.curvatures;
    r.extra["touching_radius"] = tb.radius;
    if (radius < tb.radius - res) {
        r.prediction = 0.0;
        r.warnings.push_back("ball does not touch the boundary; the limit is 0");
    } else if (series.nonlinearity.is_identity() && (series.grid.dim == 2 || series.grid.dim == 3)) {
        const double c = heat_constant(series.grid.dim, series.problem);
        r.extra["c"] = c;
        r.prediction = curvature_prediction(radius, at.curvatures, c, 1e-6);
    } else {
        r.warnings.push_back("no closed-form constant for this nonlinearity; empirical limit only");
    }
    if (std::isfinite(r.prediction) && r.prediction > 0.0) {
        for (std::size_t k = 0; k < r.values.size(); ++k)
            r.relative_errors[k] = std::abs(r.values[k] - r.prediction) / r.prediction;
        r.relative_error = std::abs(r.limit - r.prediction) / r.prediction;
    }
    r.warnings.push_back("extrapolation assumes an O(t^1/2) leading correction");
    return r;
}

}  // namespace isotherm

#include "isotherm/detectors.hpp"

#include "isotherm/error.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace isotherm {

const char* to_string(Classification c) noexcept
{
    switch (c) {
    case Classification::sphere: return "sphere";
    case Classification::two_concentric_spheres: return "two_concentric_spheres";
    case Classification::asymmetric: return "asymmetric";
    case Classification::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

nlohmann::json SymmetryVerdict::to_json() const
{
    nlohmann::json sc = nlohmann::json::array();
    for (const auto& s : scans)
        sc.push_back({{"direction", to_vector(s.direction)},
                      {"lambda_star", s.lambda_star},
                      {"symmetric", s.symmetric},
                      {"disagreement", s.disagreement},
                      {"containment_monotone", s.containment_monotone}});
    nlohmann::json fits = nlohmann::json::array();
    for (const auto& f : component_fits)
        fits.push_back({{"center", to_vector(f.center)}, {"radius", f.radius}, {"max_residual", f.max_residual}});
    return {{"classification", to_string(classification)},
            {"failing_stage", failing_stage.empty() ? nlohmann::json(nullptr) : nlohmann::json(failing_stage)},
            {"center", center ? nlohmann::json(to_vector(*center)) : nlohmann::json(nullptr)},
            {"center_residual", center_residual},
            {"scans", sc},
            {"component_fits", fits},
            {"stages", stages}};
}

std::vector<Point> scan_directions(int dim, int count)
{
    if (count < 1) fail(ErrorKind::precondition, "direction count must be >= 1");
    std::vector<Point> out;
    if (dim == 1) return {make_point({1.0})};
    if (dim == 2) {
        for (int k = 0; k < count; ++k) {
            const double a = pi * k / count;
            out.push_back(make_point({std::cos(a), std::sin(a)}));
        }
        return out;
    }
    if (dim != 3) fail(ErrorKind::unsupported_kind, "directions exist for N = 1, 2, 3");
    // Fibonacci points on the upper hemisphere.
    const double golden = pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
        const double z = 1.0 - (k + 0.5) / count;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        out.push_back(make_point({r * std::cos(golden * k), r * std::sin(golden * k), z}));
    }
    return out;
}

namespace {

struct PlaneScan {
    double lambda_star = 0.0;
    bool monotone = true;
};

/// Descends from above the set in steps h/2 until containment fails, then
/// bisects the bracket; keeps scanning to the bottom to check monotonicity.
PlaneScan critical_plane(const DomainSpec& d, const Point& l, const GridSpec& probe, double top, double bottom)
{
    const double h = probe.h();
    const double step = 0.5 * h;
    PlaneScan out;
    double hold = top;
    if (!reflection_containment(d, l, hold, probe))
        fail(ErrorKind::resolution, "reflection containment fails above the set; probe too coarse");
    double lambda = top - step;
    bool failed = false;
    double fail_at = 0.0;
    for (; lambda >= bottom; lambda -= step) {
        const bool ok = reflection_containment(d, l, lambda, probe);
        if (!failed) {
            if (ok) {
                hold = lambda;
            } else {
                failed = true;
                fail_at = lambda;
            }
        } else if (ok) {
            out.monotone = false;
        }
    }
    if (!failed) fail(ErrorKind::resolution, "critical plane not bracketed on the lambda ladder");
    double lo = fail_at, hi = hold;
    for (int it = 0; it < 40 && hi - lo > 1e-6 * h; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (reflection_containment(d, l, mid, probe))
            hi = mid;
        else
            lo = mid;
    }
    out.lambda_star = hi;
    return out;
}

/// Fraction of probe nodes (outside a 2h collar) whose membership differs
/// from that of their mirror image in the plane x . l = lambda.
double mirror_disagreement(const DomainSpec& d, const Point& l, double lambda, const GridSpec& probe)
{
    const double collar = 2.0 * probe.h();
    std::size_t probed = 0, bad = 0;
    for (std::size_t i = 0; i < probe.node_count(); ++i) {
        const Point x = probe.position(i);
        const double sx = d.signed_distance(x);
        const Point xr = x - 2.0 * (x.dot(l) - lambda) * l;
        const double sr = d.signed_distance(xr);
        if (std::abs(sx) <= collar || std::abs(sr) <= collar) continue;
        ++probed;
        if ((sx > 0.0) != (sr > 0.0)) ++bad;
    }
    return probed > 0 ? static_cast<double>(bad) / static_cast<double>(probed) : 0.0;
}

bool contains_far_field(const DomainSpec& d, const GridSpec& probe)
{
    const Point lo = probe.lower(), hi = probe.upper();
    const int dim = probe.dim;
    for (int c = 0; c < (1 << dim); ++c) {
        Point x(dim);
        for (int a = 0; a < dim; ++a) x[a] = (c >> a) & 1 ? hi[a] : lo[a];
        if (!d.contains(x)) return false;
    }
    return true;
}

}  // namespace

SymmetryVerdict moving_plane_scan(const DomainSpec& d_in, const std::vector<Point>& directions, const GridSpec& probe)
{
    if (directions.empty()) fail(ErrorKind::precondition, "no scan directions");
    if (!d_in.boundary_bounded()) fail(ErrorKind::unsupported_kind, "moving planes need a bounded boundary");
    SymmetryVerdict v;
    const double h = probe.h();
    const int dim = d_in.dim();
    // Exterior sets are scanned through their bounded complement.
    const bool exterior = contains_far_field(d_in, probe);
    const DomainSpec d = exterior ? DomainSpec::complement(d_in) : d_in;
    v.stages["scanned_set"] = exterior ? "complement" : "set";

    const auto comps = split_components(sample_boundary(d, dim == 2 ? 0.25 * h : h));
    v.stages["boundary_components"] = comps.size();
    if (comps.size() > 1) {
        for (const auto& c : comps) {
            std::vector<Point> pts;
            for (const auto& s : c) pts.push_back(s.point);
            v.component_fits.push_back(fit_sphere(pts));
        }
        bool spheres = true, concentric = true;
        for (const auto& f : v.component_fits) {
            if (f.max_residual > 3.0 * h) spheres = false;
            if ((f.center - v.component_fits.front().center).norm() > 3.0 * h) concentric = false;
        }
        if (spheres && concentric && comps.size() == 2) {
            v.classification = Classification::two_concentric_spheres;
            v.center = v.component_fits.front().center;
        } else {
            v.classification = Classification::asymmetric;
            v.failing_stage = "moving_planes";
        }
        return v;
    }

    const auto [blo, bhi] = d.boundary_box();
    Eigen::MatrixXd a(static_cast<Eigen::Index>(2 * directions.size()), dim);
    Eigen::VectorXd b(a.rows());
    bool all_symmetric = true;
    for (std::size_t k = 0; k < directions.size(); ++k) {
        const Point l = directions[k].normalized();
        double top = 0.0, bottom = 0.0;
        for (int c = 0; c < (1 << dim); ++c) {
            Point x(dim);
            for (int ax = 0; ax < dim; ++ax) x[ax] = (c >> ax) & 1 ? bhi[ax] : blo[ax];
            top = c == 0 ? x.dot(l) : std::max(top, x.dot(l));
            bottom = c == 0 ? x.dot(l) : std::min(bottom, x.dot(l));
        }
        top += h;
        bottom -= h;
        const PlaneScan up = critical_plane(d, l, probe, top, bottom);
        const PlaneScan down = critical_plane(d, -l, probe, -bottom, -top);
        // Grid bias in lambda* cancels between the two sweeps.
        const double lambda = 0.5 * (up.lambda_star - down.lambda_star);
        DirectionScan s;
        s.direction = l;
        s.lambda_star = lambda;
        s.containment_monotone = up.monotone && down.monotone;
        s.disagreement = mirror_disagreement(d, l, lambda, probe);
        s.symmetric = s.disagreement == 0.0;
        if (!s.symmetric) all_symmetric = false;
        v.scans.push_back(s);
        const auto r = static_cast<Eigen::Index>(2 * k);
        for (int ax = 0; ax < dim; ++ax) {
            a(r, ax) = l[ax];
            a(r + 1, ax) = l[ax];
        }
        b[r] = up.lambda_star;
        b[r + 1] = -down.lambda_star;
    }
    if (static_cast<int>(directions.size()) >= dim) {
        const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
        Point center(dim);
        for (int ax = 0; ax < dim; ++ax) center[ax] = c[ax];
        double res = 0.0;
        for (std::size_t k = 0; k < directions.size(); ++k)
            res = std::max(res, std::abs(v.scans[k].direction.dot(center) - v.scans[k].lambda_star));
        v.center = center;
        v.center_residual = res;
    }
    if (all_symmetric && v.center && v.center_residual <= 3.0 * h)
        v.classification = Classification::sphere;
    else {
        v.classification = Classification::asymmetric;
        v.failing_stage = "moving_planes";
    }
    return v;
}

std::vector<SurfaceSample> nearest_component(const DomainSpec& omega, const std::vector<SurfaceSample>& boundary_d)
{
    if (boundary_d.empty()) fail(ErrorKind::precondition, "boundary sample set is empty");
    const auto comps = split_components(boundary_d);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < comps.size(); ++c) {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& s : comps[c]) m = std::min(m, std::abs(omega.signed_distance(s.point)));
        if (m < best_d - 1e-9) {
            best_d = m;
            best = c;
        }
    }
    return comps[best];
}

SymmetryVerdict classify_boundary(const DomainSpec& omega, const DomainSpec& d, const std::vector<SurfaceSample>& gamma,
                                  const SolutionSeries& series, const ClassifyOptions& options)
{
    if (gamma.empty()) fail(ErrorKind::precondition, "surface sample set is empty");
    const double h = series.grid.h();
    const int dim = omega.dim();
    nlohmann::json stages = nlohmann::json::object();
    auto stop = [&](Classification c, const std::string& stage) {
        SymmetryVerdict v;
        v.classification = c;
        v.failing_stage = stage;
        v.stages = stages;
        return v;
    };

    const std::vector<double> times = options.times.empty() ? series.times() : options.times;
    const StationaryLevelReport st = stationary_surface_test(series, gamma, times, options.rel_tol, options.abs_tol);
    stages["stationarity"] = st.to_json();
    if (!st.valid || !st.verdict) return stop(Classification::inconclusive, "stationarity");

    const SignedDistanceField sdf = build_signed_distance(omega, series.grid);
    const ConstantDistance cd = constant_distance_test(sdf, gamma);
    stages["constant_distance"] = {{"is_constant", cd.is_constant}, {"R", cd.radius}, {"max_deviation", cd.max_deviation}};
    if (!cd.is_constant) return stop(Classification::inconclusive, "constant_distance");
    const double radius = cd.radius;

    {
        const std::size_t stride = std::max<std::size_t>(1, gamma.size() / static_cast<std::size_t>(std::max(1, options.cone_points)));
        std::size_t tested = 0, failed = 0;
        for (std::size_t s = 0; s < gamma.size(); s += stride) {
            ++tested;
            if (!cone_condition_check(d, gamma[s].point, options.cone_theta, options.cone_height)) ++failed;
        }
        stages["cone_condition"] = {{"tested", tested}, {"failed", failed}, {"theta", options.cone_theta},
                                    {"height", options.cone_height}};
        if (failed > 0) return stop(Classification::inconclusive, "cone_condition");
    }

    auto [lo, hi] = omega.boundary_box();
    lo.array() -= 4.0 * h;
    hi.array() += 4.0 * h;
    const GridSpec probe = GridSpec::covering(lo, hi, h);
    const ReconstructionReport rec = reconstruct_domain(d, radius, omega, probe);
    stages["reconstruction"] = rec.to_json();
    if (rec.disagreeing > 0) return stop(Classification::inconclusive, "reconstruction");

    try {
        const TransferReport tr = curvature_transfer_check(omega, gamma, radius, 10.0 * h, 1e-3);
        stages["curvature_transfer"] = tr.to_json();
        stages["curvature_transfer"].erase("transferred");
        if (!tr.passed) return stop(Classification::inconclusive, "curvature_transfer");
    } catch (const Error& e) {
        stages["curvature_transfer"] = {{"error", e.what()}};
        return stop(Classification::inconclusive, "curvature_transfer");
    }

    try {
        const MongeAmpereReport ma = monge_ampere_test(omega, gamma, radius, 20.0 * h, 1e-3);
        stages["monge_ampere"] = {{"c", ma.c}, {"spread", ma.spread}, {"tolerance", ma.tolerance},
                                  {"is_constant", ma.is_constant}, {"samples", ma.values.size()}};
        if (!ma.is_constant) return stop(Classification::asymmetric, "monge_ampere");
    } catch (const Error& e) {
        stages["monge_ampere"] = {{"error", e.what()}};
        return stop(Classification::inconclusive, "monge_ampere");
    }

    auto [dlo, dhi] = d.boundary_box();
    dlo.array() -= 4.0 * h;
    dhi.array() += 4.0 * h;
    SymmetryVerdict v;
    try {
        v = moving_plane_scan(d, scan_directions(dim, options.directions), GridSpec::covering(dlo, dhi, h));
    } catch (const Error& e) {
        stages["moving_planes"] = {{"error", e.what()}};
        return stop(Classification::inconclusive, "moving_planes");
    }
    stages["moving_planes"] = v.stages;
    stages["recovered_R"] = radius;
    v.stages = stages;
    return v;
}

}  // namespace isotherm

#include "isotherm/detectors.hpp"

#include "isotherm/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace isotherm {

nlohmann::json StationaryLevelReport::to_json() const
{
    nlohmann::json j = {{"surface_id", surface_id},
                        {"times", times},
                        {"level", level},
                        {"max_deviation", max_deviation},
                        {"samples", samples},
                        {"dropped", dropped},
                        {"valid", valid},
                        {"verdict", verdict},
                        {"warnings", warnings}};
    j["recovered_radius"] = recovered_radius ? nlohmann::json(*recovered_radius) : nlohmann::json(nullptr);
    return j;
}

StationaryLevelReport stationary_surface_test(const SolutionSeries& series, const std::vector<SurfaceSample>& gamma,
                                              const std::vector<double>& times, double rel_tol, double abs_tol)
{
    if (gamma.empty()) fail(ErrorKind::precondition, "surface sample set is empty");
    if (times.empty()) fail(ErrorKind::schedule, "stationarity needs at least one time");
    StationaryLevelReport rep;
    rep.surface_id = gamma.front().surface_id;
    rep.samples = gamma.size();
    rep.times = times;
    std::vector<GridField> fields;
    for (double t : times) fields.push_back(series.field(t));

    // A sample is kept only if it can be probed at every time.
    std::vector<std::vector<double>> values(times.size());
    for (std::size_t s = 0; s < gamma.size(); ++s) {
        std::vector<double> row;
        try {
            if (!(series.domain.signed_distance(gamma[s].point) > 0.0))
                fail(ErrorKind::geometry, "sample outside the domain");
            for (const auto& f : fields) row.push_back(f.interpolate(gamma[s].point));
        } catch (const Error& e) {
            ++rep.dropped;
            if (rep.warnings.size() < 5) rep.warnings.push_back("sample " + std::to_string(s) + " dropped: " + e.what());
            continue;
        }
        for (std::size_t k = 0; k < times.size(); ++k) values[k].push_back(row[k]);
    }
    rep.valid = rep.dropped * 10 <= rep.samples && rep.dropped < rep.samples;
    if (!rep.valid) {
        rep.warnings.push_back("more than 10% of the samples were dropped");
        rep.verdict = false;
        return rep;
    }
    rep.verdict = true;
    for (std::size_t k = 0; k < times.size(); ++k) {
        double a = 0.0;
        for (double v : values[k]) a += v;
        a /= static_cast<double>(values[k].size());
        double dev = 0.0;
        for (double v : values[k]) dev = std::max(dev, std::abs(v - a));
        rep.level.push_back(a);
        rep.max_deviation.push_back(dev);
        if (dev > rel_tol * a + abs_tol) rep.verdict = false;
    }
    if (rep.verdict && series.domain.exact_distance()) {
        double mean = 0.0, spread = 0.0;
        for (const auto& s : gamma) mean += series.domain.signed_distance(s.point);
        mean /= static_cast<double>(gamma.size());
        for (const auto& s : gamma) spread = std::max(spread, std::abs(series.domain.signed_distance(s.point) - mean));
        if (spread <= 3.0 * series.grid.h()) rep.recovered_radius = mean;
    }
    return rep;
}

ConstantDistance constant_distance_test(const SignedDistanceField& sdf, const std::vector<SurfaceSample>& gamma,
                                        double tolerance)
{
    if (gamma.empty()) fail(ErrorKind::precondition, "surface sample set is empty");
    const double tol = tolerance >= 0.0 ? tolerance : 3.0 * sdf.grid().h();
    ConstantDistance out;
    std::vector<double> d;
    for (const auto& s : gamma) d.push_back(sdf.value(s.point));
    for (double v : d) out.radius += v;
    out.radius /= static_cast<double>(d.size());
    for (double v : d) out.max_deviation = std::max(out.max_deviation, std::abs(v - out.radius));
    out.is_constant = out.max_deviation <= tol;
    return out;
}

nlohmann::json ReconstructionReport::to_json() const
{
    return {{"probed", probed}, {"skipped", skipped}, {"disagreeing", disagreeing}, {"disagreement", disagreement}};
}

ReconstructionReport reconstruct_domain(const DomainSpec& d, double radius, const DomainSpec& omega,
                                        const GridSpec& probe)
{
    if (d.dim() != omega.dim() || probe.dim != d.dim()) fail(ErrorKind::configuration, "dimensions differ");
    const DomainSpec body = parallel_body(d, radius);
    const double collar = 2.0 * probe.h();
    ReconstructionReport rep;
    for (std::size_t i = 0; i < probe.node_count(); ++i) {
        const Point x = probe.position(i);
        const double s = omega.signed_distance(x);
        if (std::abs(s) <= collar) {
            ++rep.skipped;
            continue;
        }
        ++rep.probed;
        if ((s > 0.0) != body.contains(x)) ++rep.disagreeing;
    }
    rep.disagreement = rep.probed > 0 ? static_cast<double>(rep.disagreeing) / static_cast<double>(rep.probed) : 0.0;
    return rep;
}

namespace {

nlohmann::json samples_json(const std::vector<SurfaceSample>& s)
{
    nlohmann::json a = nlohmann::json::array();
    for (const auto& p : s) a.push_back({{"point", to_vector(p.point)}, {"curvatures", p.curvatures}});
    return a;
}

/// xi = x + R nu with nu pointing away from D, plus the curvature of Gamma
/// with respect to nu.
struct Transferred {
    Point xi;
    std::vector<double> kappa_hat;
};

Transferred transfer(const SurfaceSample& s, double radius)
{
    Transferred t;
    const Point nu = -s.inward_normal.normalized();
    t.xi = s.point + radius * nu;
    for (double k : s.curvatures) t.kappa_hat.push_back(-k);
    return t;
}

}  // namespace

nlohmann::json TransferReport::to_json() const
{
    return {{"samples", samples},
            {"max_residual", max_residual},
            {"tolerance", tolerance},
            {"passed", passed},
            {"transferred", samples_json(transferred)}};
}

TransferReport curvature_transfer_check(const DomainSpec& omega, const std::vector<SurfaceSample>& gamma, double radius,
                                        double tolerance, double fd_step)
{
    if (!(radius > 0.0)) fail(ErrorKind::precondition, "R must be > 0");
    TransferReport rep;
    rep.tolerance = tolerance;
    for (std::size_t s = 0; s < gamma.size(); ++s) {
        const Transferred tr = transfer(gamma[s], radius);
        for (double k : tr.kappa_hat)
            if (!(k < 1.0 / radius)) {
                std::ostringstream os;
                os << "sample " << s << ": curvature " << k << " is not below 1/R = " << 1.0 / radius;
                fail(ErrorKind::transfer_undefined, os.str());
            }
        const Point xi = project_to_boundary(omega, tr.xi);
        SurfaceSample at = principal_curvatures(omega, xi, 1e-6, fd_step);
        std::vector<double> expected;
        for (double k : tr.kappa_hat) expected.push_back(-k / (1.0 - radius * k));
        std::sort(expected.begin(), expected.end());
        std::vector<double> measured = at.curvatures;
        std::sort(measured.begin(), measured.end());
        if (measured.size() != expected.size()) fail(ErrorKind::configuration, "curvature counts differ");
        double res = 0.0;
        for (std::size_t j = 0; j < expected.size(); ++j) res = std::max(res, std::abs(measured[j] - expected[j]));
        rep.max_residual = std::max(rep.max_residual, res);
        rep.transferred.push_back(at);
        ++rep.samples;
    }
    rep.passed = rep.samples > 0 && rep.max_residual <= tolerance;
    return rep;
}

nlohmann::json MongeAmpereReport::to_json() const
{
    return {{"values", values}, {"spread", spread}, {"tolerance", tolerance}, {"is_constant", is_constant}, {"c", c}};
}

MongeAmpereReport monge_ampere_test(const DomainSpec& omega, const std::vector<SurfaceSample>& gamma, double radius,
                                    double tolerance, double fd_step)
{
    if (!(radius > 0.0)) fail(ErrorKind::precondition, "R must be > 0");
    if (gamma.empty()) fail(ErrorKind::precondition, "surface sample set is empty");
    MongeAmpereReport rep;
    rep.tolerance = tolerance;
    for (std::size_t s = 0; s < gamma.size(); ++s) {
        const Point xi = project_to_boundary(omega, transfer(gamma[s], radius).xi);
        const SurfaceSample at = principal_curvatures(omega, xi, 1e-6, fd_step);
        double product = 1.0;
        for (double k : at.curvatures) {
            if (!(k < 1.0 / radius)) {
                std::ostringstream os;
                os << "sample " << s << " at (" << xi.transpose() << "): curvature " << k << " is not below 1/R";
                fail(ErrorKind::precondition, os.str());
            }
            product *= 1.0 / radius - k;
        }
        rep.values.push_back(product);
    }
    for (double v : rep.values) rep.c += v;
    rep.c /= static_cast<double>(rep.values.size());
    for (double v : rep.values) rep.spread = std::max(rep.spread, std::abs(v - rep.c) / std::abs(rep.c));
    rep.is_constant = rep.spread <= tolerance;
    return rep;
}

}  // namespace isotherm

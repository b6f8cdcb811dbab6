#include "isotherm/comparison.hpp"

#include "isotherm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace isotherm {

namespace {

constexpr double inv_two_sqrt_pi = 0.28209479177387814347;

void check_sign(int sign)
{
    if (sign != 1 && sign != -1) fail(ErrorKind::precondition, "sign must be +1 or -1");
}

bool band_interior(const SignedDistanceField& sdf, std::size_t i, double rho0)
{
    const GridSpec& g = sdf.grid();
    if (g.on_box_boundary(g.unflatten(i))) return false;
    if (std::abs(sdf.field[i]) > rho0) return false;
    for (int a = 0; a < g.dim; ++a)
        if (std::abs(sdf.field[i - g.stride(a)]) > rho0 || std::abs(sdf.field[i + g.stride(a)]) > rho0) return false;
    return true;
}

double discrete_laplacian(const GridField& f, std::size_t i)
{
    const GridSpec& g = f.grid;
    double s = 0.0;
    for (int a = 0; a < g.dim; ++a) {
        const double h = g.spacing[static_cast<std::size_t>(a)];
        s += (f[i - g.stride(a)] - 2.0 * f[i] + f[i + g.stride(a)]) / (h * h);
    }
    return s;
}

}  // namespace

double profile_F(double xi) { return 0.5 * std::erfc(0.5 * xi); }

double profile_F_prime(double xi) { return -inv_two_sqrt_pi * std::exp(-0.25 * xi * xi); }

double profile_F_pm(double xi, double epsilon, int sign)
{
    check_sign(sign);
    return profile_F(xi - 2.0 * sign * epsilon);
}

double profile_F_pm_prime(double xi, double epsilon, int sign)
{
    check_sign(sign);
    return profile_F_prime(xi - 2.0 * sign * epsilon);
}

BarrierConfig BarrierConfig::make(double epsilon, double E1, double E2, ProblemKind problem, double rho0, double radius)
{
    BarrierConfig c{epsilon, E1, E2, problem, rho0, std::max(2.0 * radius, rho0)};
    c.validate();
    return c;
}

void BarrierConfig::validate() const
{
    if (!(epsilon > 0.0 && epsilon < 0.25)) fail(ErrorKind::precondition, "epsilon must lie in (0, 1/4)");
    if (!(E1 > 0.0) || !(E2 > 0.0)) fail(ErrorKind::precondition, "E1 and E2 must be > 0");
    if (!(rho0 > 0.0)) fail(ErrorKind::precondition, "rho0 must be > 0");
    if (!(rho1 >= rho0)) fail(ErrorKind::precondition, "rho1 must be >= rho0");
}

nlohmann::json BarrierConfig::to_json() const
{
    return {{"epsilon", epsilon}, {"E1", E1},   {"E2", E2},
            {"problem", to_string(problem)}, {"rho0", rho0}, {"rho1", rho1}};
}

double band_laplacian_max(const SignedDistanceField& sdf, double rho0)
{
    if (!(rho0 > 0.0)) fail(ErrorKind::precondition, "rho0 must be > 0");
    double m = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < sdf.field.values.size(); ++i) {
        if (!band_interior(sdf, i, rho0)) continue;
        m = std::max(m, std::abs(discrete_laplacian(sdf.field, i)));
        ++count;
    }
    if (count == 0) fail(ErrorKind::resolution, "band |d*| <= rho0 holds no node with a full Laplacian stencil");
    return m;
}

double t1_epsilon(const SignedDistanceField& sdf, double epsilon, double rho0, double t_cap)
{
    if (!(epsilon > 0.0 && epsilon < 0.25)) fail(ErrorKind::precondition, "epsilon must lie in (0, 1/4)");
    const double m = band_laplacian_max(sdf, rho0);
    if (m <= 1e-12) return t_cap;
    const double t = std::pow(epsilon / (2.0 * m), 2);
    return std::min(t, t_cap);
}

GridField barrier_field(const SignedDistanceField& sdf, double epsilon, double t, int sign)
{
    check_sign(sign);
    if (!(t > 0.0)) fail(ErrorKind::precondition, "t must be > 0");
    GridField v(sdf.grid(), 0.0);
    const double s = 1.0 / std::sqrt(t);
    for (std::size_t i = 0; i < v.values.size(); ++i) v[i] = profile_F_pm(sdf.field[i] * s, epsilon, sign);
    return v;
}

nlohmann::json SubsuperReport::to_json() const
{
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rungs)
        rs.push_back({{"t", r.t},
                      {"sign", r.sign},
                      {"min_residual", r.min_residual},
                      {"min_analytic", r.min_analytic},
                      {"nodes", r.nodes},
                      {"below_slack", r.below_slack}});
    return {{"epsilon", epsilon}, {"rho0", rho0}, {"t1", t1}, {"slack", slack}, {"rungs", rs}, {"passed", passed}};
}

SubsuperReport check_subsuper(const SignedDistanceField& sdf, double epsilon, double rho0,
                              const std::vector<double>& t_ladder, double slack)
{
    SubsuperReport rep;
    rep.epsilon = epsilon;
    rep.rho0 = rho0;
    rep.t1 = t1_epsilon(sdf, epsilon, rho0);
    rep.slack = slack >= 0.0 ? slack : 10.0 * sdf.grid().h();
    std::vector<std::size_t> band;
    for (std::size_t i = 0; i < sdf.field.values.size(); ++i)
        if (band_interior(sdf, i, rho0)) band.push_back(i);
    rep.passed = true;
    for (double t : t_ladder) {
        if (!(t > 0.0)) fail(ErrorKind::precondition, "t must be > 0");
        if (t > rep.t1 * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "t = " << t << " exceeds t1 = " << rep.t1;
            fail(ErrorKind::precondition, os.str());
        }
        const double dt = 1e-4 * t;
        for (int sign : {1, -1}) {
            const GridField v = barrier_field(sdf, epsilon, t, sign);
            SubsuperRung rung;
            rung.t = t;
            rung.sign = sign;
            rung.nodes = band.size();
            rung.min_residual = std::numeric_limits<double>::infinity();
            rung.min_analytic = std::numeric_limits<double>::infinity();
            const double sp = 1.0 / std::sqrt(t + dt), sm = 1.0 / std::sqrt(t - dt), s0 = 1.0 / std::sqrt(t);
            for (std::size_t i : band) {
                const double d = sdf.field[i];
                const double vt =
                    (profile_F_pm(d * sp, epsilon, sign) - profile_F_pm(d * sm, epsilon, sign)) / (2.0 * dt);
                const double r = sign * (vt - discrete_laplacian(v, i));
                const double lap_d = discrete_laplacian(sdf.field, i);
                const double a = -sign / t * (sign * epsilon + std::sqrt(t) * lap_d) *
                                 profile_F_pm_prime(d * s0, epsilon, sign);
                rung.min_residual = std::min(rung.min_residual, r);
                rung.min_analytic = std::min(rung.min_analytic, a);
                if (!(r > -rep.slack)) ++rung.below_slack;
            }
            if (rung.below_slack > 0) rep.passed = false;
            rep.rungs.push_back(rung);
        }
    }
    return rep;
}

std::pair<GridField, GridField> envelope_w(const SignedDistanceField& sdf, const BarrierConfig& cfg, double t)
{
    cfg.validate();
    GridField lo = barrier_field(sdf, cfg.epsilon, t, -1);
    GridField hi = barrier_field(sdf, cfg.epsilon, t, 1);
    const double corr = 2.0 * cfg.E1 * std::exp(-cfg.E2 / t);
    const double a_lo = cfg.problem == ProblemKind::ibvp ? 2.0 : 1.0 - cfg.epsilon;
    const double a_hi = cfg.problem == ProblemKind::ibvp ? 2.0 : 1.0 + cfg.epsilon;
    for (std::size_t i = 0; i < lo.values.size(); ++i) {
        lo[i] = a_lo * lo[i] - corr;
        hi[i] = a_hi * hi[i] + corr;
    }
    return {std::move(lo), std::move(hi)};
}

nlohmann::json EnvelopeReport::to_json() const
{
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rungs)
        rs.push_back({{"t", r.t},
                      {"nodes", r.nodes},
                      {"lower_violations", r.lower_violations},
                      {"upper_violations", r.upper_violations},
                      {"worst_lower", r.worst_lower},
                      {"worst_upper", r.worst_upper}});
    return {{"config", config.to_json()}, {"tolerance", tolerance}, {"rungs", rs}, {"passed", passed}};
}

EnvelopeRung check_envelope_field(const GridField& u, const SignedDistanceField& sdf, const BarrierConfig& cfg, double t,
                                  double tolerance)
{
    if (!(u.grid == sdf.grid())) fail(ErrorKind::configuration, "solution and distance grids differ");
    const auto [lo, hi] = envelope_w(sdf, cfg, t);
    EnvelopeRung r;
    r.t = t;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        const double d = sdf.field[i];
        if (d < 0.0 || d > cfg.rho1) continue;
        ++r.nodes;
        const double below = lo[i] - u[i];
        const double above = u[i] - hi[i];
        r.worst_lower = std::max(r.worst_lower, below);
        r.worst_upper = std::max(r.worst_upper, above);
        if (below > tolerance) ++r.lower_violations;
        if (above > tolerance) ++r.upper_violations;
    }
    return r;
}

EnvelopeReport check_envelope(const SolutionSeries& series, const SignedDistanceField& sdf, const BarrierConfig& cfg,
                              const std::vector<double>& times, double tolerance)
{
    if (!(series.grid == sdf.grid())) fail(ErrorKind::configuration, "solution and distance grids differ");
    cfg.validate();
    EnvelopeReport rep;
    rep.config = cfg;
    rep.tolerance = tolerance >= 0.0 ? tolerance : 10.0 * series.grid.h();
    rep.passed = true;
    for (double t : times) {
        rep.rungs.push_back(check_envelope_field(series.field(t), sdf, cfg, t, rep.tolerance));
        if (rep.rungs.back().lower_violations + rep.rungs.back().upper_violations > 0) rep.passed = false;
    }
    return rep;
}

nlohmann::json BarrierFit::to_json() const
{
    return {{"config", config.to_json()},
            {"t0", t0},
            {"t0_found", t0_found},
            {"t1", t1},
            {"t_eps", t_eps},
            {"verified_times", verified_times},
            {"varadhan_deviation", varadhan_deviation},
            {"warnings", warnings}};
}

BarrierFit fit_barrier_constants(const SolutionSeries& series, const SignedDistanceField& sdf, double epsilon,
                                 double rho0, double radius, const std::vector<double>& times, double slack)
{
    if (!(series.grid == sdf.grid())) fail(ErrorKind::configuration, "solution and distance grids differ");
    if (times.empty()) fail(ErrorKind::configuration, "barrier fit needs at least one time");
    std::vector<double> ts = times;
    std::sort(ts.begin(), ts.end());
    BarrierFit fit;
    const double rho1 = std::max(2.0 * radius, rho0);
    const double e2 = (rho0 * rho0 - 0.5 * rho0 * rho0 * slack) / 4.0;
    fit.t1 = t1_epsilon(sdf, epsilon, rho0, ts.back());
    // Inner set: closure of Omega_rho1 minus the band.
    std::vector<std::size_t> inner;
    for (std::size_t i = 0; i < sdf.field.values.size(); ++i)
        if (sdf.field[i] >= rho0 && sdf.field[i] <= rho1) inner.push_back(i);
    if (inner.empty()) fail(ErrorKind::resolution, "no node with rho0 <= d* <= rho1");

    const double t0_cap = std::pow(rho0 / 4.0, 2);
    bool ok = true;
    for (double t : ts) {
        const Snapshot& snap = series.at(t);
        double dev = 0.0;
        for (std::size_t i : inner) {
            const double u = snap.values[i];
            const double d = sdf.field[i];
            // Underflowed values satisfy the bound the deviation is used for.
            if (!(u >= std::numeric_limits<double>::min())) continue;
            dev = std::max(dev, std::abs(4.0 * t * std::log(u) + d * d));
        }
        fit.varadhan_deviation.push_back(dev);
        if (ok && dev < 0.5 * rho0 * rho0 && t <= t0_cap)
            fit.t0 = t;
        else
            ok = false;
    }
    fit.t0_found = fit.t0 > 0.0;
    fit.t_eps = fit.t0_found ? std::min(fit.t1, fit.t0) : fit.t1;
    if (!fit.t0_found) {
        const double best = *std::min_element(fit.varadhan_deviation.begin(), fit.varadhan_deviation.end());
        std::ostringstream os;
        os << "Varadhan deviation on the inner set stays above rho0^2/2 = " << 0.5 * rho0 * rho0
           << " at every scheduled time (smallest " << best << "); E1 fitted on all times up to t1";
        fit.warnings.push_back(os.str());
    }
    double e1 = 0.0;
    for (double t : ts) {
        if (t > fit.t_eps * (1.0 + 1e-12)) continue;
        fit.verified_times.push_back(t);
        const Snapshot& snap = series.at(t);
        const double s = 1.0 / std::sqrt(t);
        for (std::size_t i : inner) {
            const double d = sdf.field[i];
            const double m = std::max({snap.values[i], profile_F_pm(d * s, epsilon, 1), profile_F_pm(d * s, epsilon, -1)});
            e1 = std::max(e1, m * std::exp(e2 / t));
        }
    }
    fit.config = BarrierConfig{epsilon, std::max(2.0 * e1, std::numeric_limits<double>::min()), e2, series.problem, rho0, rho1};
    fit.config.validate();
    return fit;
}

}  // namespace isotherm

#pragma once

#include "isotherm/geometry.hpp"
#include "isotherm/solver.hpp"

#include <json.hpp>

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace isotherm {

/// F(xi) = erfc(xi / 2) / 2, the self-similar half-space profile.
double profile_F(double xi);
double profile_F_prime(double xi);
/// F_+(xi) = F(xi - 2 eps), F_-(xi) = F(xi + 2 eps); sign is +1 or -1.
double profile_F_pm(double xi, double epsilon, int sign);
double profile_F_pm_prime(double xi, double epsilon, int sign);

struct BarrierConfig {
    double epsilon = 0.1;
    double E1 = 1.0;
    double E2 = 1.0;
    ProblemKind problem = ProblemKind::ibvp;
    double rho0 = 0.25;
    double rho1 = 0.5;

    /// rho1 = max(2R, rho0).
    static BarrierConfig make(double epsilon, double E1, double E2, ProblemKind problem, double rho0, double radius);
    void validate() const;
    nlohmann::json to_json() const;
};

/// max |Laplacian d*| over nodes with |d*| <= rho0 whose stencil stays in
/// the band.
double band_laplacian_max(const SignedDistanceField& sdf, double rho0);

/// (eps / (2M))^2; capped at t_cap when M = 0.
double t1_epsilon(const SignedDistanceField& sdf, double epsilon, double rho0,
                  double t_cap = std::numeric_limits<double>::infinity());

/// v_sign = F_sign(d* / sqrt(t)) at every node.
GridField barrier_field(const SignedDistanceField& sdf, double epsilon, double t, int sign);

struct SubsuperRung {
    double t = 0.0;
    int sign = 1;
    /// min over band nodes of sign * {(v)_t - Laplacian v}, discrete.
    double min_residual = 0.0;
    /// min over band nodes of the analytic residual.
    double min_analytic = 0.0;
    std::size_t nodes = 0;
    std::size_t below_slack = 0;
};

struct SubsuperReport {
    double epsilon = 0.0;
    double rho0 = 0.0;
    double t1 = 0.0;
    double slack = 0.0;
    std::vector<SubsuperRung> rungs;
    bool passed = false;

    nlohmann::json to_json() const;
};

/// Discrete residual signs of v_+ (supersolution) and v_- (subsolution) on
/// the band |d*| <= rho0; pass iff every residual > -slack (10 h default).
SubsuperReport check_subsuper(const SignedDistanceField& sdf, double epsilon, double rho0,
                              const std::vector<double>& t_ladder, double slack = -1.0);

/// (w_-, w_+).
std::pair<GridField, GridField> envelope_w(const SignedDistanceField& sdf, const BarrierConfig& cfg, double t);

struct EnvelopeRung {
    double t = 0.0;
    std::size_t nodes = 0;
    std::size_t lower_violations = 0;
    std::size_t upper_violations = 0;
    double worst_lower = 0.0;
    double worst_upper = 0.0;
};

struct EnvelopeReport {
    BarrierConfig config;
    double tolerance = 0.0;
    std::vector<EnvelopeRung> rungs;
    bool passed = false;

    nlohmann::json to_json() const;
};

/// w_- - tol <= u <= w_+ + tol on nodes of Omega with d < rho1 at each t.
EnvelopeReport check_envelope(const SolutionSeries& series, const SignedDistanceField& sdf, const BarrierConfig& cfg,
                              const std::vector<double>& times, double tolerance = -1.0);
/// Same check against an arbitrary field (sanity inversions).
EnvelopeRung check_envelope_field(const GridField& u, const SignedDistanceField& sdf, const BarrierConfig& cfg,
                                  double t, double tolerance);

struct BarrierFit {
    BarrierConfig config;
    double t0 = 0.0;
    double t1 = 0.0;
    double t_eps = 0.0;
    std::vector<double> verified_times;
    std::vector<double> varadhan_deviation;
    /// False when no scheduled time meets the Varadhan rule for t0; E1 is
    /// then fitted on every time up to t1.
    bool t0_found = false;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

/// E2 = (rho0^2 - rho0^2 * slack / 2) / 4; t0 the largest scheduled time
/// (with all earlier ones) whose Varadhan deviation on {rho0 <= d <= rho1}
/// is below rho0^2 / 2, capped at (rho0/4)^2; E1 twice the largest
/// max(u, v_+, v_-) e^{E2/t} on that set over the verified times.
BarrierFit fit_barrier_constants(const SolutionSeries& series, const SignedDistanceField& sdf, double epsilon,
                                 double rho0, double radius, const std::vector<double>& times, double slack = 1.0);

}  // namespace isotherm

#pragma once

#include "isotherm/geometry.hpp"
#include "isotherm/solver.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace isotherm {

using ScalarField = std::function<double(const Point&)>;

/// Quadrature on the sphere |x - x0| = r: trapezoidal in angle (2D, `nodes`
/// points), Gauss-Legendre in cos(polar) times trapezoidal in azimuth (3D).
struct SphereRule {
    std::vector<Point> offsets;  // x - x0
    std::vector<double> weights;
};
SphereRule sphere_rule(int dim, double radius, int nodes = 256);

/// int_{dB_r(x0)} (x - x0) f(x) dS.
Point sphere_moment(const ScalarField& f, const Point& x0, double radius, int dim, int nodes = 256);
/// int_{dB_r(x0)} f dS.
double sphere_mean(const ScalarField& f, const Point& x0, double radius, int dim, int nodes = 256);

Point moment_balance(const SolutionSeries& series, const Point& x0, double radius, double t, int nodes = 256);
double mean_balance(const SolutionSeries& series, const Point& x0, double radius, double t, int nodes = 256);
/// int_{dB_r(0)} u(x + p, t) - u(x + q, t) dS.
double difference_mean_balance(const SolutionSeries& series, const Point& p, const Point& q, double radius, double t,
                               int nodes = 256);

struct StationaryLevelReport {
    int surface_id = 0;
    std::vector<double> times;
    std::vector<double> level;
    std::vector<double> max_deviation;
    std::size_t samples = 0;
    std::size_t dropped = 0;
    bool valid = true;
    bool verdict = false;
    std::optional<double> recovered_radius;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

StationaryLevelReport stationary_surface_test(const SolutionSeries& series, const std::vector<SurfaceSample>& gamma,
                                              const std::vector<double>& times, double rel_tol = 0.02,
                                              double abs_tol = 1e-4);

struct ConstantDistance {
    bool is_constant = false;
    double radius = 0.0;
    double max_deviation = 0.0;
};

/// R = mean d over Gamma; constant iff max |d - R| <= tolerance (3h of the
/// sdf grid by default).
ConstantDistance constant_distance_test(const SignedDistanceField& sdf, const std::vector<SurfaceSample>& gamma,
                                        double tolerance = -1.0);

struct ReconstructionReport {
    std::size_t probed = 0;
    std::size_t skipped = 0;
    std::size_t disagreeing = 0;
    double disagreement = 0.0;

    nlohmann::json to_json() const;
};

/// Membership of parallel_body(D, R) against Omega on the probe nodes,
/// skipping a 2h collar around the boundary of Omega.
ReconstructionReport reconstruct_domain(const DomainSpec& d, double radius, const DomainSpec& omega,
                                        const GridSpec& probe);

struct TransferReport {
    std::size_t samples = 0;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::vector<SurfaceSample> transferred;

    nlohmann::json to_json() const;
};

/// Gamma samples carry normals and curvatures toward D. Each sample maps to
/// xi = x + R nu with nu the normal away from D, and the curvatures of Omega
/// at xi are compared with -kappa_hat / (1 - R kappa_hat), kappa_hat taken
/// with respect to nu.
TransferReport curvature_transfer_check(const DomainSpec& omega, const std::vector<SurfaceSample>& gamma, double radius,
                                        double tolerance, double fd_step = 1e-3);

struct MongeAmpereReport {
    std::vector<double> values;
    double spread = 0.0;
    double tolerance = 0.0;
    bool is_constant = false;
    double c = 0.0;

    nlohmann::json to_json() const;
};

/// prod_j (1/R - kappa_j) per sample; constant iff max relative spread
/// around the mean is <= tolerance (20h).
MongeAmpereReport monge_ampere_test(const DomainSpec& omega, const std::vector<SurfaceSample>& gamma, double radius,
                                    double tolerance, double fd_step = 1e-3);

enum class Classification { sphere, two_concentric_spheres, asymmetric, inconclusive };
const char* to_string(Classification c) noexcept;

struct DirectionScan {
    Point direction;
    double lambda_star = 0.0;
    bool symmetric = false;
    double disagreement = 0.0;
    bool containment_monotone = true;
};

struct SymmetryVerdict {
    std::vector<DirectionScan> scans;
    std::optional<Point> center;
    double center_residual = 0.0;
    Classification classification = Classification::inconclusive;
    std::string failing_stage;
    std::vector<SphereFit> component_fits;
    nlohmann::json stages = nlohmann::json::object();

    nlohmann::json to_json() const;
};

/// Evenly spread unit directions (half circle in 2D, hemisphere in 3D).
std::vector<Point> scan_directions(int dim, int count);

/// Critical lambda per direction on a lambda ladder of step h/2 refined by
/// bisection; a common center is fitted from lambda*_k = l_k . c. Sets with
/// several boundary components are classified by per-component sphere fits.
SymmetryVerdict moving_plane_scan(const DomainSpec& d, const std::vector<Point>& directions, const GridSpec& probe);

struct ClassifyOptions {
    std::vector<double> times;
    double rel_tol = 0.02;
    double abs_tol = 1e-4;
    int directions = 8;
    double cone_theta = pi / 4.0;
    double cone_height = 0.05;
    int cone_points = 16;
};

/// Stationarity, constant distance, cone condition, reconstruction,
/// curvature transfer, Monge-Ampere and moving planes, in that order. The
/// first stage that fails is named; a non-constant Monge-Ampere product or
/// an asymmetric scan gives asymmetric, any other failure inconclusive.
SymmetryVerdict classify_boundary(const DomainSpec& omega, const DomainSpec& d,
                                  const std::vector<SurfaceSample>& gamma, const SolutionSeries& series,
                                  const ClassifyOptions& options);

/// The boundary component of D nearest to the boundary of Omega.
std::vector<SurfaceSample> nearest_component(const DomainSpec& omega, const std::vector<SurfaceSample>& boundary_d);

}  // namespace isotherm

#pragma once

#include "isotherm/diffusion_model.hpp"
#include "isotherm/geometry.hpp"
#include "isotherm/grid.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace isotherm {

enum class ProblemKind { ibvp, cauchy };

const char* to_string(ProblemKind kind) noexcept;
ProblemKind problem_from_string(const std::string& tag);

/// Backward Euler time grid. The first scheduled time is reached after
/// pre_levels dyadic levels [2^k t_f, 2^(k+1) t_f], t_f = t_first / 2^pre_levels,
/// preceded by [0, t_f]; each interval is cut into m equal steps, so each
/// level uses one step size. m is steps_per_doubling, or ceil(value / h) when
/// steps_per_doubling_per_inv_h > 0 (ties dt to h for joint refinement).
struct TimeStepping {
    int pre_levels = 4;
    int steps_per_doubling = 32;
    double steps_per_doubling_per_inv_h = 0.0;
    double newton_tolerance = 1e-10;
    int newton_max_iterations = 50;

    int steps_per_level(double h) const;
    void validate() const;
    nlohmann::json to_json() const;
    static TimeStepping from_json(const nlohmann::json& j);
};

/// Step end times (strictly increasing, ending at the last scheduled time)
/// with every scheduled time among them.
std::vector<double> time_grid(const std::vector<double>& schedule, const TimeStepping& stepping, double h);

struct Snapshot {
    double t = 0.0;
    std::vector<double> values;
};

struct SolveDiagnostics {
    int steps = 0;
    int factorizations = 0;
    int newton_iterations = 0;
    int jacobian_fallbacks = 0;
    std::size_t unknowns = 0;
    double max_range_violation = 0.0;
    std::size_t clamped_nodes = 0;
    double seconds = 0.0;
    std::string factorization;
    std::vector<std::string> warnings;

    nlohmann::json to_json(bool with_timing) const;
};

/// u(., t) on the grid at the scheduled times. For the IBVP, nodes outside
/// Omega hold the boundary value 1.
struct SolutionSeries {
    ProblemKind problem = ProblemKind::ibvp;
    DomainSpec domain;
    Nonlinearity nonlinearity;
    GridSpec grid;
    std::vector<Snapshot> snapshots;
    SolveDiagnostics diagnostics;

    std::vector<double> times() const;
    /// Snapshot whose time equals t to relative 1e-9; schedule error otherwise.
    const Snapshot& at(double t) const;
    GridField field(double t) const;
};

SolutionSeries solve_ibvp(const DomainSpec& domain, const Nonlinearity& n, const GridSpec& grid,
                          const std::vector<double>& schedule, const TimeStepping& stepping = {});

/// Requires the grid to extend 4 sqrt(delta2 t_max) beyond the boundary box.
SolutionSeries solve_cauchy(const DomainSpec& domain, const Nonlinearity& n, const GridSpec& grid,
                            const std::vector<double>& schedule, const TimeStepping& stepping = {});

SolutionSeries solve(ProblemKind problem, const DomainSpec& domain, const Nonlinearity& n, const GridSpec& grid,
                     const std::vector<double>& schedule, const TimeStepping& stepping = {});

/// Multilinear interpolation of the snapshot at t (no time interpolation).
double probe(const SolutionSeries& series, const Point& x, double t);

/// Integral of u(., t) over B_R(x0) with dual-cell weights; cells cut by the
/// sphere are weighted by 4^N-point sub-cell coverage.
double heat_content(const SolutionSeries& series, const Point& x0, double radius, double t);
double ball_integral(const GridField& field, const Point& x0, double radius);

}  // namespace isotherm

#include "isotherm/solver.hpp"

#include "isotherm/error.hpp"
#include "isotherm/parallel.hpp"
#include "linear_system.hpp"

#include <Eigen/SparseCore>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace isotherm {

namespace {

using Matrix = Eigen::SparseMatrix<double>;

constexpr double theta_floor = 1e-2;
constexpr double clamp_slack = 1e-12;

/// Discrete operator -Delta on the free nodes: (L w)_i plus the constant
/// boundary part b (already multiplied through phi of the fixed values).
struct Assembly {
    std::vector<std::size_t> free_nodes;
    Matrix laplacian;
    Eigen::VectorXd boundary;
};

Assembly assemble(const GridSpec& g, const std::vector<double>& level, const std::vector<double>& u0,
                  ProblemKind problem, const Nonlinearity& n)
{
    const std::size_t count = g.node_count();
    std::vector<long> unknown(count, -1);
    Assembly as;
    for (std::size_t i = 0; i < count; ++i) {
        const auto idx = g.unflatten(i);
        if (g.on_box_boundary(idx)) continue;
        if (problem == ProblemKind::ibvp && !(level[i] > 0.0)) continue;
        unknown[i] = static_cast<long>(as.free_nodes.size());
        as.free_nodes.push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(as.free_nodes.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(as.free_nodes.size() * static_cast<std::size_t>(2 * g.dim + 1));
    as.boundary = Eigen::VectorXd::Zero(m);
    const double phi_one = n.phi(1.0);
    for (Eigen::Index r = 0; r < m; ++r) {
        const std::size_t i = as.free_nodes[static_cast<std::size_t>(r)];
        double diag = 0.0;
        for (int ax = 0; ax < g.dim; ++ax) {
            const double h = g.spacing[static_cast<std::size_t>(ax)];
            const double inv = 1.0 / (h * h);
            for (int side : {-1, 1}) {
                const std::size_t j = side < 0 ? i - g.stride(ax) : i + g.stride(ax);
                if (unknown[j] >= 0) {
                    diag += inv;
                    trip.emplace_back(r, unknown[j], -inv);
                } else if (problem == ProblemKind::ibvp && !(level[j] > 0.0)) {
                    // Cut link: Dirichlet value 1 at the interpolated crossing.
                    const double theta = std::max(theta_floor, level[i] / (level[i] - level[j]));
                    const double c = inv / theta;
                    diag += c;
                    as.boundary[r] += c * phi_one;
                } else {
                    diag += inv;
                    as.boundary[r] += inv * n.phi(u0[j]);
                }
            }
        }
        trip.emplace_back(r, r, diag);
    }
    as.laplacian.resize(m, m);
    as.laplacian.setFromTriplets(trip.begin(), trip.end());
    as.laplacian.makeCompressed();
    return as;
}

Matrix shifted(const Matrix& l, double dt, const Eigen::VectorXd& diag)
{
    Matrix a = dt * l;
    for (Eigen::Index k = 0; k < a.outerSize(); ++k)
        for (Matrix::InnerIterator it(a, k); it; ++it)
            if (it.row() == it.col()) it.valueRef() += diag[it.row()];
    return a;
}

/// Fraction of the dual cell of node i lying outside Omega, 4^N samples.
double exterior_fraction(const DomainSpec& domain, const GridSpec& g, std::size_t i)
{
    const Point x = g.position(i);
    const int dim = g.dim;
    int total = 0, outside = 0;
    const int per = 4;
    int combos = 1;
    for (int a = 0; a < dim; ++a) combos *= per;
    for (int c = 0; c < combos; ++c) {
        Point y = x;
        int code = c;
        for (int a = 0; a < dim; ++a) {
            const int k = code % per;
            code /= per;
            y[a] += ((k + 0.5) / per - 0.5) * g.spacing[static_cast<std::size_t>(a)];
        }
        ++total;
        if (!(domain.signed_distance(y) > 0.0)) ++outside;
    }
    return static_cast<double>(outside) / total;
}

void check_schedule(const std::vector<double>& schedule)
{
    if (schedule.empty()) fail(ErrorKind::schedule, "schedule must not be empty");
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        if (!(schedule[k] > 0.0) || !std::isfinite(schedule[k]))
            fail(ErrorKind::schedule, "schedule[" + std::to_string(k) + "] must be > 0");
        if (k > 0 && !(schedule[k] > schedule[k - 1]))
            fail(ErrorKind::schedule, "schedule[" + std::to_string(k) + "] must exceed schedule[" + std::to_string(k - 1) + "]");
    }
}

SolutionSeries solve_impl(ProblemKind problem, const DomainSpec& domain, const Nonlinearity& n, const GridSpec& grid,
                          const std::vector<double>& schedule, const TimeStepping& stepping)
{
    const auto clock0 = std::chrono::steady_clock::now();
    grid.validate();
    stepping.validate();
    check_schedule(schedule);
    if (grid.dim != domain.dim()) fail(ErrorKind::configuration, "grid and domain dimensions differ");
    const double t_max = schedule.back();
    if (domain.boundary_bounded()) {
        auto [lo, hi] = domain.boundary_box();
        if (problem == ProblemKind::cauchy) {
            const double margin = 4.0 * std::sqrt(n.delta2 * t_max);
            lo.array() -= margin;
            hi.array() += margin;
            if (!grid.contains(lo) || !grid.contains(hi))
                fail(ErrorKind::configuration, "grid must extend 4 sqrt(delta2 t_max) = " + std::to_string(margin) +
                                                   " beyond the boundary on all sides");
        } else if (!grid.contains(lo, 1e-12) || !grid.contains(hi, 1e-12)) {
            fail(ErrorKind::coverage, "grid does not cover the closure of the domain boundary");
        }
    }

    SolutionSeries series{problem, domain, n, grid, {}, {}};

    const std::size_t count = grid.node_count();
    std::vector<double> level(count);
    std::vector<double> u(count);
    parallel_for(count, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            level[i] = domain.signed_distance(grid.position(i));
            if (problem == ProblemKind::ibvp)
                u[i] = level[i] > 0.0 ? 0.0 : 1.0;
            else
                u[i] = exterior_fraction(domain, grid, i);
        }
    });

    const Assembly as = assemble(grid, level, u, problem, n);
    const auto m = static_cast<Eigen::Index>(as.free_nodes.size());
    auto& diag = series.diagnostics;
    diag.unknowns = as.free_nodes.size();
    Eigen::VectorXd w(m);
    for (Eigen::Index r = 0; r < m; ++r) w[r] = u[as.free_nodes[static_cast<std::size_t>(r)]];

    const std::vector<double> times = time_grid(schedule, stepping, grid.h());
    detail::SpdSolver chord;
    detail::SpdSolver exact;
    diag.factorization = chord.method();
    double dt_chord = -1.0;
    Eigen::VectorXd chord_scale(m);  // phi' frozen at the last refactorization
    Eigen::VectorXd phi_w(m), dphi(m);
    std::size_t next_snapshot = 0;
    double t_prev = 0.0;
    double dt_level = -1.0;
    double dt_prev = -1.0;
    Eigen::VectorXd w_prev;

    auto eval_phi = [&](const Eigen::VectorXd& x) {
        for (Eigen::Index r = 0; r < m; ++r) phi_w[r] = n.phi(x[r]);
    };

    for (double t : times) {
        double dt = t - t_prev;
        if (dt_level > 0.0 && std::abs(dt - dt_level) <= 1e-9 * dt_level)
            dt = dt_level;
        else
            dt_level = dt;
        const Eigen::VectorXd w_old = w;
        // Linear extrapolation from the previous step as the Newton start.
        if (dt_prev > 0.0 && !n.is_identity()) {
            w += (dt / dt_prev) * (w - w_prev);
            for (Eigen::Index r = 0; r < m; ++r) w[r] = std::clamp(w[r], 0.0, 1.0);
        }
        if (dt != dt_chord) {
            // Chord matrix diag(1/phi'(w)) + dt L, refactored per step size.
            for (Eigen::Index r = 0; r < m; ++r) chord_scale[r] = n.phi_prime(w[r]);
            chord.factor(shifted(as.laplacian, dt, chord_scale.cwiseInverse()));
            ++diag.factorizations;
            dt_chord = dt;
        }
        eval_phi(w);
        Eigen::VectorXd f = w - w_old + dt * (as.laplacian * phi_w - as.boundary);
        double fnorm = f.lpNorm<Eigen::Infinity>();
        bool use_exact = false;
        int it = 0;
        std::vector<double> history{fnorm};
        while (fnorm > stepping.newton_tolerance) {
            if (it >= stepping.newton_max_iterations) {
                std::ostringstream os;
                os << "Newton did not converge at t = " << t << " (dt = " << dt << ") after " << it
                   << " iterations; residual history:";
                for (double r : history) os << ' ' << r;
                fail(ErrorKind::solver, os.str());
            }
            Eigen::VectorXd delta;
            if (use_exact) {
                for (Eigen::Index r = 0; r < m; ++r) dphi[r] = n.phi_prime(w[r]);
                exact.factor(shifted(as.laplacian, dt, dphi.cwiseInverse()));
                ++diag.factorizations;
                delta = -exact.solve(f).cwiseQuotient(dphi);
            } else {
                delta = -chord.solve(f).cwiseQuotient(chord_scale);
            }
            w += delta;
            ++it;
            eval_phi(w);
            f = w - w_old + dt * (as.laplacian * phi_w - as.boundary);
            const double next = f.lpNorm<Eigen::Infinity>();
            history.push_back(next);
            if (next > 0.5 * fnorm && !use_exact) {
                use_exact = true;
                ++diag.jacobian_fallbacks;
            }
            fnorm = next;
            if (delta.lpNorm<Eigen::Infinity>() <= 1e-3 * stepping.newton_tolerance) break;
        }
        diag.newton_iterations += it;
        ++diag.steps;
        for (Eigen::Index r = 0; r < m; ++r) {
            double& x = w[r];
            const double over = x < 0.0 ? -x : (x > 1.0 ? x - 1.0 : 0.0);
            if (over == 0.0) continue;
            if (over <= clamp_slack) {
                x = std::clamp(x, 0.0, 1.0);
                ++diag.clamped_nodes;
            } else {
                diag.max_range_violation = std::max(diag.max_range_violation, over);
            }
        }
        w_prev = w_old;
        dt_prev = dt;
        t_prev = t;
        if (next_snapshot < schedule.size() && t == schedule[next_snapshot]) {
            for (Eigen::Index r = 0; r < m; ++r) u[as.free_nodes[static_cast<std::size_t>(r)]] = w[r];
            series.snapshots.push_back({t, u});
            ++next_snapshot;
        }
    }
    if (diag.max_range_violation > 0.0) {
        std::ostringstream os;
        os << "range violation up to " << diag.max_range_violation << " beyond [0, 1]";
        diag.warnings.push_back(os.str());
    }
    diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock0).count();
    return series;
}

}  // namespace

const char* to_string(ProblemKind kind) noexcept { return kind == ProblemKind::ibvp ? "ibvp" : "cauchy"; }

ProblemKind problem_from_string(const std::string& tag)
{
    if (tag == "ibvp") return ProblemKind::ibvp;
    if (tag == "cauchy") return ProblemKind::cauchy;
    fail(ErrorKind::schema, "problem must be 'ibvp' or 'cauchy', got '" + tag + "'");
}

int TimeStepping::steps_per_level(double h) const
{
    if (steps_per_doubling_per_inv_h > 0.0)
        return std::max(1, static_cast<int>(std::ceil(steps_per_doubling_per_inv_h / h - 1e-9)));
    return steps_per_doubling;
}

void TimeStepping::validate() const
{
    if (pre_levels < 0 || pre_levels > 40) fail(ErrorKind::configuration, "time_stepping.pre_levels must lie in [0, 40]");
    if (steps_per_doubling < 1 && !(steps_per_doubling_per_inv_h > 0.0))
        fail(ErrorKind::configuration, "time_stepping.steps_per_doubling must be >= 1");
    if (!(newton_tolerance > 0.0)) fail(ErrorKind::configuration, "time_stepping.newton_tolerance must be > 0");
    if (newton_max_iterations < 1) fail(ErrorKind::configuration, "time_stepping.newton_max_iterations must be >= 1");
}

nlohmann::json TimeStepping::to_json() const
{
    nlohmann::json j = {{"pre_levels", pre_levels},
                        {"steps_per_doubling", steps_per_doubling},
                        {"newton_tolerance", newton_tolerance},
                        {"newton_max_iterations", newton_max_iterations}};
    if (steps_per_doubling_per_inv_h > 0.0) j["steps_per_doubling_per_inv_h"] = steps_per_doubling_per_inv_h;
    return j;
}

TimeStepping TimeStepping::from_json(const nlohmann::json& j)
{
    if (!j.is_object()) fail(ErrorKind::schema, "time_stepping must be an object");
    TimeStepping s;
    s.pre_levels = j.value("pre_levels", s.pre_levels);
    s.steps_per_doubling = j.value("steps_per_doubling", s.steps_per_doubling);
    s.steps_per_doubling_per_inv_h = j.value("steps_per_doubling_per_inv_h", 0.0);
    s.newton_tolerance = j.value("newton_tolerance", s.newton_tolerance);
    s.newton_max_iterations = j.value("newton_max_iterations", s.newton_max_iterations);
    s.validate();
    return s;
}

std::vector<double> time_grid(const std::vector<double>& schedule, const TimeStepping& stepping, double h)
{
    check_schedule(schedule);
    stepping.validate();
    const int m = stepping.steps_per_level(h);
    const double t_first = std::ldexp(schedule.front(), -stepping.pre_levels);
    const double t_max = schedule.back();
    std::vector<double> out;
    for (int i = 1; i <= m; ++i) out.push_back(t_first * i / m);
    for (int k = 0; out.back() < t_max; ++k) {
        const double base = std::ldexp(t_first, k);
        for (int i = 1; i <= m; ++i) {
            const double t = base + base * i / m;
            out.push_back(std::min(t, t_max));
            if (t >= t_max) break;
        }
    }
    for (double s : schedule) {
        auto it = std::lower_bound(out.begin(), out.end(), s * (1.0 - 1e-12));
        if (it != out.end() && std::abs(*it - s) <= 1e-12 * s)
            *it = s;
        else
            out.insert(it, s);
    }
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

SolutionSeries solve_ibvp(const DomainSpec& domain, const Nonlinearity& n, const GridSpec& grid,
                          const std::vector<double>& schedule, const TimeStepping& stepping)
{
    return solve_impl(ProblemKind::ibvp, domain, n, grid, schedule, stepping);
}

SolutionSeries solve_cauchy(const DomainSpec& domain, const Nonlinearity& n, const GridSpec& grid,
                            const std::vector<double>& schedule, const TimeStepping& stepping)
{
    return solve_impl(ProblemKind::cauchy, domain, n, grid, schedule, stepping);
}

SolutionSeries solve(ProblemKind problem, const DomainSpec& domain, const Nonlinearity& n, const GridSpec& grid,
                     const std::vector<double>& schedule, const TimeStepping& stepping)
{
    return solve_impl(problem, domain, n, grid, schedule, stepping);
}

}  // namespace isotherm

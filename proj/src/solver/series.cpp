#include "isotherm/error.hpp"
#include "isotherm/parallel.hpp"
#include "isotherm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace isotherm {

nlohmann::json SolveDiagnostics::to_json(bool with_timing) const
{
    nlohmann::json j = {{"steps", steps},
                        {"factorizations", factorizations},
                        {"newton_iterations", newton_iterations},
                        {"jacobian_fallbacks", jacobian_fallbacks},
                        {"unknowns", unknowns},
                        {"max_range_violation", max_range_violation},
                        {"clamped_nodes", clamped_nodes},
                        {"factorization", factorization},
                        {"warnings", warnings}};
    if (with_timing) j["seconds"] = seconds;
    return j;
}

std::vector<double> SolutionSeries::times() const
{
    std::vector<double> out;
    for (const auto& s : snapshots) out.push_back(s.t);
    return out;
}

const Snapshot& SolutionSeries::at(double t) const
{
    for (const auto& s : snapshots)
        if (std::abs(s.t - t) <= 1e-9 * std::max(std::abs(t), std::abs(s.t))) return s;
    std::ostringstream os;
    os << "t = " << t << " is not a scheduled time; available:";
    for (const auto& s : snapshots) os << ' ' << s.t;
    fail(ErrorKind::schedule, os.str());
}

GridField SolutionSeries::field(double t) const
{
    GridField f;
    f.grid = grid;
    f.values = at(t).values;
    return f;
}

double probe(const SolutionSeries& series, const Point& x, double t)
{
    return series.field(t).interpolate(x);
}

double heat_content(const SolutionSeries& series, const Point& x0, double radius, double t)
{
    return ball_integral(series.field(t), x0, radius);
}

double ball_integral(const GridField& field, const Point& x0, double radius)
{
    const GridSpec& g = field.grid;
    if (x0.size() != g.dim) fail(ErrorKind::configuration, "ball center dimension differs from the grid");
    if (!(radius > 0.0)) fail(ErrorKind::precondition, "ball radius must be > 0");
    Point lo = x0, hi = x0;
    lo.array() -= radius;
    hi.array() += radius;
    if (!g.contains(lo, 1e-12) || !g.contains(hi, 1e-12))
        fail(ErrorKind::coverage, "ball of integration leaves the grid");

    const int dim = g.dim;
    std::array<int, 3> first{0, 0, 0}, last{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
        const auto s = static_cast<std::size_t>(a);
        first[s] = std::max(0, static_cast<int>(std::floor((lo[a] - g.origin[s]) / g.spacing[s])) - 1);
        last[s] = std::min(g.extents[s], static_cast<int>(std::ceil((hi[a] - g.origin[s]) / g.spacing[s])) + 1);
    }
    constexpr int per = 4;
    int combos = 1;
    for (int a = 0; a < dim; ++a) combos *= per;

    // Rows along axis 0 are independent; each contributes one partial sum.
    const int rows = last[0] - first[0] + 1;
    std::vector<double> partial(static_cast<std::size_t>(rows), 0.0);
    parallel_for(static_cast<std::size_t>(rows), [&](std::size_t b, std::size_t e) {
        for (std::size_t r = b; r < e; ++r) {
            double sum = 0.0;
            std::array<int, 3> idx{first[0] + static_cast<int>(r), first[1], first[2]};
            for (idx[1] = first[1]; idx[1] <= (dim > 1 ? last[1] : 0); ++idx[1]) {
                for (idx[2] = first[2]; idx[2] <= (dim > 2 ? last[2] : 0); ++idx[2]) {
                    const Point x = g.position(idx);
                    // Dual cell clipped to the box.
                    Point clo = x, chi = x;
                    double near2 = 0.0, far2 = 0.0;
                    for (int a = 0; a < dim; ++a) {
                        const auto s = static_cast<std::size_t>(a);
                        const double half = 0.5 * g.spacing[s];
                        clo[a] = idx[s] == 0 ? x[a] : x[a] - half;
                        chi[a] = idx[s] == g.extents[s] ? x[a] : x[a] + half;
                        const double c = x0[a];
                        const double dn = c < clo[a] ? clo[a] - c : (c > chi[a] ? c - chi[a] : 0.0);
                        const double df = std::max(std::abs(c - clo[a]), std::abs(c - chi[a]));
                        near2 += dn * dn;
                        far2 += df * df;
                    }
                    if (near2 >= radius * radius) continue;
                    double volume = 1.0;
                    for (int a = 0; a < dim; ++a) volume *= chi[a] - clo[a];
                    if (far2 <= radius * radius) {
                        sum += volume * field.values[g.flat(idx)];
                        continue;
                    }
                    double cut = 0.0;
                    for (int c = 0; c < combos; ++c) {
                        Point y = clo;
                        int code = c;
                        for (int a = 0; a < dim; ++a) {
                            const int k = code % per;
                            code /= per;
                            y[a] += (k + 0.5) / per * (chi[a] - clo[a]);
                        }
                        if ((y - x0).squaredNorm() < radius * radius) cut += field.interpolate(y);
                    }
                    sum += volume * cut / combos;
                }
            }
            partial[r] = sum;
        }
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

}  // namespace isotherm

#include "isotherm/harness.hpp"

#include "isotherm/asymptotics.hpp"
#include "isotherm/comparison.hpp"
#include "isotherm/detectors.hpp"
#include "isotherm/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace isotherm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double tol(const Scenario& s, const char* key) { return s.tolerances.at(key).get<double>(); }

std::vector<double> numbers(const nlohmann::json& p, const char* key, std::vector<double> fallback = {})
{
    if (!p.contains(key)) return fallback;
    return p.at(key).get<std::vector<double>>();
}

Point point_param(const nlohmann::json& p, const char* key, int dim)
{
    if (!p.contains(key)) fail(ErrorKind::schema, std::string("params.") + key + " is required");
    const Point x = make_point(p.at(key).get<std::vector<double>>());
    if (x.size() != dim) fail(ErrorKind::schema, std::string("params.") + key + " has the wrong dimension");
    return x;
}

std::string number(double v)
{
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

struct Context {
    Context(const Scenario& s, const SolutionSeries& u) : scenario(s), series(u) {}

    const Scenario& scenario;
    const SolutionSeries& series;
    const SignedDistanceField& sdf() const
    {
        if (!sdf_) sdf_ = std::make_unique<SignedDistanceField>(build_signed_distance(scenario.domain, scenario.grid));
        return *sdf_;
    }

private:
    mutable std::unique_ptr<SignedDistanceField> sdf_;
};

void run_oracle(const Context& c, const nlohmann::json& p, ExperimentResult& r)
{
    if (!c.scenario.nonlinearity.is_identity())
        fail(ErrorKind::precondition, "the erfc oracle holds for the heat equation only");
    const double x_min = p.value("x_min", 0.1), x_max = p.value("x_max", 1.0);
    const auto times = numbers(p, "times");
    const GridSpec& g = c.series.grid;
    std::ostringstream csv;
    csv << "t,max_abs_error,max_exact,max_rel_error\n";
    nlohmann::json rows = nlohmann::json::array();
    double worst = 0.0;
    for (double t : times) {
        const GridField u = c.series.field(t);
        double err = 0.0, scale = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            const Point x = g.position(i);
            if (x[0] < x_min - 1e-12 || x[0] > x_max + 1e-12) continue;
            const double xi = c.scenario.domain.signed_distance(x) / std::sqrt(t);
            const double exact = c.series.problem == ProblemKind::ibvp ? 2.0 * profile_F(xi) : profile_F(xi);
            err = std::max(err, std::abs(u[i] - exact));
            scale = std::max(scale, std::abs(exact));
            ++count;
        }
        if (count == 0) fail(ErrorKind::precondition, "no grid node lies in [x_min, x_max]");
        const double rel = err / scale;
        worst = std::max(worst, rel);
        rows.push_back({{"t", t}, {"max_abs_error", err}, {"max_exact", scale}, {"max_rel_error", rel}, {"nodes", count}});
        csv << number(t) << ',' << number(err) << ',' << number(scale) << ',' << number(rel) << '\n';
    }
    r.report = {{"x_min", x_min}, {"x_max", x_max}, {"rungs", rows}, {"max_rel_error", worst},
                {"tolerance", tol(c.scenario, "oracle_rel")}};
    r.metrics["max_rel_error"] = worst;
    r.csv = csv.str();
    r.passed = worst <= tol(c.scenario, "oracle_rel");
}

void run_varadhan(const Context& c, const nlohmann::json& p, ExperimentResult& r)
{
    const auto probes = distance_band_probes(c.scenario.domain, p.value("d_min", 0.3), p.value("d_max", 0.7),
                                             p.value("count", 64));
    const AsymptoticReport rep =
        varadhan_report(c.series, c.scenario.nonlinearity, c.sdf(), probes, numbers(p, "ladder"));
    const bool require_relative = p.value("require_relative", true);
    r.report = rep.to_json();
    r.report["require_relative"] = require_relative;
    r.report["tolerance"] = tol(c.scenario, "varadhan_rel");
    r.metrics["final_sup_error"] = rep.values.empty() ? NAN : rep.values.back();
    r.metrics["final_relative_error"] = rep.relative_error;
    r.csv = rep.to_csv();
    r.passed = rep.values.size() == numbers(p, "ladder").size() && rep.monotone_decreasing &&
               (!require_relative || rep.relative_error < tol(c.scenario, "varadhan_rel"));
}

void run_heat_content(const Context& c, const nlohmann::json& p, ExperimentResult& r)
{
    const int dim = c.series.grid.dim;
    const Point x0 = point_param(p, "x0", dim);
    const double radius = p.at("R").get<double>();
    const auto ladder = numbers(p, "ladder");
    const std::string mode = p.value("mode", std::string("limit"));
    AsymptoticReport rep;
    if (mode == "limit") {
        rep = heat_content_limit(c.series, x0, radius, ladder, p.value("resolution", c.series.grid.h()));
        r.passed = std::isfinite(rep.relative_error) && rep.relative_error <= tol(c.scenario, "heat_content_rel");
        r.metrics["relative_error"] = rep.relative_error;
    } else if (mode == "divergence") {
        rep = heat_content_ladder(c.series, x0, radius, ladder);
        r.passed = rep.monotone_increasing;
    } else {
        fail(ErrorKind::schema, "params.mode must be limit or divergence");
    }
    r.report = rep.to_json();
    r.report["mode"] = mode;
    r.report["tolerance"] = tol(c.scenario, "heat_content_rel");
    r.csv = rep.to_csv();
}

void run_barriers(const Context& c, const nlohmann::json& p, ExperimentResult& r)
{
    const double h = c.series.grid.h();
    const double eps = p.at("epsilon").get<double>(), rho0 = p.at("rho0").get<double>();
    const double radius = p.at("R").get<double>();
    const auto fit_times = numbers(p, "fit_times", c.scenario.schedule);
    const auto times = numbers(p, "times");
    const auto fractions = numbers(p, "subsuper_fractions", {1.0, 0.5});
    const double slack = tol(c.scenario, "subsuper_slack_h") * h;

    const BarrierFit fit = fit_barrier_constants(c.series, c.sdf(), eps, rho0, radius, fit_times);
    std::vector<double> t_ladder;
    for (double f : fractions) t_ladder.push_back(f * fit.t1);
    const SubsuperReport ss = check_subsuper(c.sdf(), eps, rho0, t_ladder, slack);
    const EnvelopeReport env =
        check_envelope(c.series, c.sdf(), fit.config, times, tol(c.scenario, "envelope_tol_h") * h);

    std::vector<std::string> warnings = fit.warnings;
    for (double t : times)
        if (t > fit.t_eps) warnings.push_back("envelope time " + number(t) + " exceeds t_eps = " + number(fit.t_eps));

    std::size_t violations = 0;
    std::ostringstream csv;
    csv << "t,nodes,lower_violations,upper_violations,worst_lower,worst_upper\n";
    for (const auto& rung : env.rungs) {
        violations += rung.lower_violations + rung.upper_violations;
        csv << number(rung.t) << ',' << rung.nodes << ',' << rung.lower_violations << ',' << rung.upper_violations
            << ',' << number(rung.worst_lower) << ',' << number(rung.worst_upper) << '\n';
    }
    r.report = {{"fit", fit.to_json()}, {"subsuper", ss.to_json()}, {"envelope", env.to_json()},
                {"warnings", warnings}};
    r.metrics["t1"] = fit.t1;
    r.metrics["envelope_violations"] = violations;
    r.csv = csv.str();
    r.passed = ss.passed && env.passed;
}

void run_balance(const Context& c, const nlohmann::json& p, ExperimentResult& r)
{
    const int dim = c.series.grid.dim;
    const auto times = numbers(p, "times");
    const int nodes = p.value("nodes", 256);
    const double moment_tol = tol(c.scenario, "moment_abs");
    bool passed = true;
    std::ostringstream csv;
    csv << "test,t,r,value,expect,passed\n";

    nlohmann::json radial = nlohmann::json::array();
    double worst_moment = 0.0;
    for (const auto& probe_spec : p.value("radial", nlohmann::json::array())) {
        const Point x0 = point_param(probe_spec, "x0", dim);
        for (double radius : numbers(probe_spec, "radii"))
            for (double t : times) {
                const double m = moment_balance(c.series, x0, radius, t, nodes).norm();
                const bool ok = m <= moment_tol;
                passed = passed && ok;
                worst_moment = std::max(worst_moment, m);
                radial.push_back({{"x0", to_vector(x0)}, {"r", radius}, {"t", t}, {"moment", m}, {"passed", ok}});
                csv << "moment," << number(t) << ',' << number(radius) << ',' << number(m) << ",zero," << ok << '\n';
            }
    }

    nlohmann::json pairs = nlohmann::json::array();
    const double t_pair = p.value("pair_time", times.empty() ? 0.0 : *std::min_element(times.begin(), times.end()));
    for (const auto& pair : p.value("pairs", nlohmann::json::array())) {
        const Point a = point_param(pair, "p", dim), b = point_param(pair, "q", dim);
        const double radius = pair.at("r").get<double>();
        const std::string expect = pair.value("expect", std::string("zero"));
        const double v = difference_mean_balance(c.series, a, b, radius, t_pair, nodes);
        bool ok = false;
        if (expect == "zero")
            ok = std::abs(v) <= tol(c.scenario, "symmetric_pair_abs");
        else if (expect == "nonzero")
            ok = std::abs(v) > tol(c.scenario, "asymmetric_pair_min");
        else
            fail(ErrorKind::schema, "pair expect must be zero or nonzero");
        passed = passed && ok;
        pairs.push_back({{"p", to_vector(a)}, {"q", to_vector(b)}, {"r", radius}, {"t", t_pair}, {"value", v},
                         {"expect", expect}, {"passed", ok}});
        csv << "pair," << number(t_pair) << ',' << number(radius) << ',' << number(v) << ',' << expect << ',' << ok
            << '\n';
    }
    r.report = {{"nodes", nodes}, {"radial", radial}, {"pairs", pairs}};
    r.metrics["max_moment"] = worst_moment;
    r.csv = csv.str();
    r.passed = passed;
}

void run_detect(const Context& c, const nlohmann::json& p, ExperimentResult& r)
{
    const double h = c.series.grid.h();
    const DomainSpec d = DomainSpec::from_json(p.at("D"));
    if (d.dim() != c.series.grid.dim) fail(ErrorKind::schema, "params.D has the wrong dimension");
    std::vector<SurfaceSample> gamma = sample_boundary(d, p.value("spacing_h", 2.0) * h);
    const std::string which = p.value("gamma", std::string("all"));
    if (which == "nearest_component")
        gamma = nearest_component(c.scenario.domain, gamma);
    else if (which != "all")
        fail(ErrorKind::schema, "params.gamma must be all or nearest_component");

    ClassifyOptions opts;
    opts.times = numbers(p, "times", c.scenario.schedule);
    opts.rel_tol = tol(c.scenario, "stationary_rel");
    opts.abs_tol = tol(c.scenario, "stationary_abs");
    opts.directions = p.value("directions", opts.directions);
    const SymmetryVerdict v = classify_boundary(c.scenario.domain, d, gamma, c.series, opts);

    const std::string expect = p.value("expect", std::string());
    const std::string got = to_string(v.classification);
    bool ok = true;
    if (expect == "non_sphere")
        ok = v.classification != Classification::sphere &&
             v.classification != Classification::two_concentric_spheres && !v.failing_stage.empty();
    else if (!expect.empty())
        ok = got == expect;
    if (ok && p.contains("R_expected")) {
        const double rec = v.stages.value("recovered_R", NAN);
        ok = std::abs(rec - p.at("R_expected").get<double>()) <= 3.0 * h;
        r.metrics["R_error"] = std::abs(rec - p.at("R_expected").get<double>());
    }
    r.report = v.to_json();
    r.report["gamma_samples"] = gamma.size();
    r.report["expect"] = expect;
    std::ostringstream csv;
    csv << "classification,failing_stage,expect,passed\n" << got << ',' << v.failing_stage << ',' << expect << ','
        << ok << '\n';
    r.csv = csv.str();
    r.passed = ok;
}

void run_experiment(const Context& c, const ExperimentSpec& e, ExperimentResult& r)
{
    if (e.kind == "oracle")
        run_oracle(c, e.params, r);
    else if (e.kind == "varadhan")
        run_varadhan(c, e.params, r);
    else if (e.kind == "heat_content")
        run_heat_content(c, e.params, r);
    else if (e.kind == "barriers")
        run_barriers(c, e.params, r);
    else if (e.kind == "balance")
        run_balance(c, e.params, r);
    else if (e.kind == "detect")
        run_detect(c, e.params, r);
    else
        fail(ErrorKind::schema, "unknown experiment kind '" + e.kind + "'");
}

std::string solve_key(const Scenario& s)
{
    return nlohmann::json{{"domain", s.domain.to_json()},
                          {"problem", to_string(s.problem)},
                          {"nonlinearity", s.nonlinearity.to_json()},
                          {"grid", s.grid.to_json()},
                          {"time_stepping", s.stepping.to_json()},
                          {"schedule", s.schedule}}
        .dump();
}

}  // namespace

nlohmann::json RunReport::to_json(bool with_timings) const
{
    nlohmann::json ex = nlohmann::json::array();
    for (const auto& e : experiments) {
        nlohmann::json j = {{"name", e.name}, {"kind", e.kind}, {"passed", e.passed},
                            {"metrics", e.metrics}, {"report", e.report}};
        if (!e.error.empty()) j["error"] = e.error;
        ex.push_back(std::move(j));
    }
    nlohmann::json j = {{"schema_version", scenario_schema_version},
                        {"scenario", scenario},
                        {"tolerances", scenario.value("tolerances", nlohmann::json::object())},
                        {"solve", solve},
                        {"solve_count", solve_count},
                        {"experiments", ex},
                        {"passed", passed}};
    if (with_timings) j["timings"] = timings;
    return j;
}

RunReport run_scenario(const Scenario& scenario, const RunOptions& options)
{
    const auto start = Clock::now();
    RunReport report;
    report.scenario = scenario.to_json();
    report.timings = {{"solves", nlohmann::json::array()}, {"experiments", nlohmann::json::object()}};

    std::vector<const ExperimentSpec*> selected;
    for (const auto& e : scenario.experiments)
        if (!options.only_kind || *options.only_kind == e.kind) selected.push_back(&e);

    std::map<std::string, SolutionSeries> cache;
    std::string solve_error;
    const SolutionSeries* series = nullptr;
    try {
        const std::string key = solve_key(scenario);
        auto it = cache.find(key);
        if (it == cache.end()) {
            const auto t0 = Clock::now();
            it = cache.emplace(key, solve(scenario.problem, scenario.domain, scenario.nonlinearity, scenario.grid,
                                          scenario.schedule, scenario.stepping))
                     .first;
            ++report.solve_count;
            report.timings["solves"].push_back({{"problem", to_string(scenario.problem)},
                                                {"grid_h", scenario.grid.h()},
                                                {"seconds", seconds_since(t0)}});
        }
        series = &it->second;
        report.solve = series->diagnostics.to_json(false);
        report.solve["time_grid_steps"] = time_grid(scenario.schedule, scenario.stepping, scenario.grid.h()).size();
        report.solve["steps_per_level"] = scenario.stepping.steps_per_level(scenario.grid.h());
    } catch (const Error& e) {
        solve_error = e.what();
        report.solve = {{"error", solve_error}};
    }

    const std::filesystem::path out = options.output_dir ? *options.output_dir : scenario.output_dir;
    if (series && options.write && options.grid_dump) {
        std::filesystem::create_directories(out / "fields");
        for (std::size_t k = 0; k < series->snapshots.size(); ++k)
            dump_field(series->field(series->snapshots[k].t), "u", out / "fields" / ("u_" + std::to_string(k)));
    }

    report.passed = series != nullptr;
    if (series) {
        const Context ctx{scenario, *series};
        for (const ExperimentSpec* e : selected) {
            ExperimentResult r;
            r.name = e->name;
            r.kind = e->kind;
            const auto t0 = Clock::now();
            try {
                run_experiment(ctx, *e, r);
            } catch (const Error& err) {
                r.passed = false;
                r.error = err.what();
            }
            report.timings["experiments"][e->name] = seconds_since(t0);
            report.passed = report.passed && r.passed;
            report.experiments.push_back(std::move(r));
        }
    } else {
        for (const ExperimentSpec* e : selected) {
            ExperimentResult r;
            r.name = e->name;
            r.kind = e->kind;
            r.error = "solve failed: " + solve_error;
            report.experiments.push_back(std::move(r));
        }
    }
    report.timings["total"] = seconds_since(start);
    if (options.write) write_report(report, out);
    return report;
}

void write_report(const RunReport& report, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "report.json");
        if (!os) fail(ErrorKind::io, "cannot write " + (dir / "report.json").string());
        os << report.to_json(true).dump(2) << '\n';
    }
    for (const auto& e : report.experiments) {
        if (e.csv.empty()) continue;
        std::ofstream os(dir / (e.name + ".csv"));
        if (!os) fail(ErrorKind::io, "cannot write " + (dir / (e.name + ".csv")).string());
        os << e.csv;
    }
}

std::string convergence_table(const std::vector<RunReport>& reports)
{
    if (reports.size() < 2) fail(ErrorKind::precondition, "convergence needs at least two reports");
    const std::string name = reports.front().scenario.value("name", std::string());
    std::vector<std::pair<double, const RunReport*>> rungs;
    for (const auto& r : reports) {
        if (r.scenario.value("name", std::string()) != name)
            fail(ErrorKind::configuration, "reports come from different scenarios");
        rungs.emplace_back(r.scenario.at("grid").at("spacing")[0].get<double>(), &r);
    }
    std::sort(rungs.begin(), rungs.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 1; k < rungs.size(); ++k)
        if (!(rungs[k].first < rungs[k - 1].first)) fail(ErrorKind::precondition, "reports must have distinct h");

    auto metric = [](const RunReport& r, const std::string& exp, const std::string& key) -> std::optional<double> {
        for (const auto& e : r.experiments)
            if (e.name == exp && e.metrics.contains(key) && e.metrics.at(key).is_number())
                return e.metrics.at(key).get<double>();
        return std::nullopt;
    };

    std::ostringstream csv;
    csv << "metric,h_coarse,h_fine,e_coarse,e_fine,p,flag\n";
    for (const auto& e : rungs.front().second->experiments)
        for (const auto& [key, value] : e.metrics.items()) {
            if (!value.is_number()) continue;
            for (std::size_t k = 1; k < rungs.size(); ++k) {
                const auto ec = metric(*rungs[k - 1].second, e.name, key);
                const auto ef = metric(*rungs[k].second, e.name, key);
                if (!ec || !ef) fail(ErrorKind::configuration, "metric " + e.name + "." + key + " is missing");
                const double ratio = rungs[k - 1].first / rungs[k].first;
                std::string flag;
                double p = NAN;
                if (!(*ec > 0.0) || !(*ef > 0.0)) {
                    flag = "nonpositive_error";
                } else {
                    p = std::log(*ec / *ef) / std::log(ratio);
                    if (std::abs(p) < 1e-12) {
                        p = 0.0;
                        flag = "no_convergence";
                    }
                }
                csv << e.name << '.' << key << ',' << number(rungs[k - 1].first) << ',' << number(rungs[k].first)
                    << ',' << number(*ec) << ',' << number(*ef) << ',' << number(p) << ',' << flag << '\n';
            }
        }
    return csv.str();
}

}  // namespace isotherm

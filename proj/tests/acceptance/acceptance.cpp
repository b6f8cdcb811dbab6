// End-to-end acceptance run. `run` executes every criterion once (the heavy
// solves are shared) and writes a results file; `check N` prints the line for
// criterion N and exits nonzero when it failed.
#include "isotherm/asymptotics.hpp"
#include "isotherm/comparison.hpp"
#include "isotherm/detectors.hpp"
#include "isotherm/error.hpp"
#include "isotherm/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

using namespace isotherm;
namespace fs = std::filesystem;

namespace {

struct Line {
    bool passed = false;
    std::string text;
    nlohmann::json details = nlohmann::json::object();
};

std::string fmt(double v, int digits = 4)
{
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

double elapsed(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const ExperimentResult& experiment(const RunReport& r, const std::string& name)
{
    for (const auto& e : r.experiments)
        if (e.name == name) return e;
    throw Error(ErrorKind::configuration, "report " + r.scenario.value("name", std::string()) + " has no experiment " + name);
}

double solve_seconds(const RunReport& r)
{
    double s = 0.0;
    for (const auto& e : r.timings.at("solves")) s += e.at("seconds").get<double>();
    return s;
}

double experiment_seconds(const RunReport& r, const std::string& name)
{
    return r.timings.at("experiments").value(name, 0.0);
}

class Acceptance {
public:
    Acceptance(fs::path scenarios, fs::path out) : scenarios_(std::move(scenarios)), out_(std::move(out)) {}

    std::map<int, Line> run()
    {
        std::map<int, Line> lines;
        auto guarded = [&](int id, auto&& f) {
            try {
                lines[id] = f();
            } catch (const std::exception& e) {
                lines[id] = {false, std::string("error: ") + e.what(), {}};
            }
            std::cout << "criterion " << id << ": " << (lines[id].passed ? "PASS " : "FAIL ") << lines[id].text
                      << std::endl;
        };
        guarded(1, [&] { return c1(); });
        guarded(3, [&] { return c3(); });
        guarded(5, [&] { return c5(); });
        guarded(9, [&] { return c9(); });
        guarded(10, [&] { return c10(); });
        guarded(8, [&] { return c8(); });
        guarded(2, [&] { return c2(); });
        guarded(6, [&] { return c6(); });
        guarded(7, [&] { return c7(); });
        guarded(4, [&] { return c4(); });
        return lines;
    }

private:
    fs::path scenarios_;
    fs::path out_;
    std::map<std::string, RunReport> cache_;

    const RunReport& report(const std::string& name)
    {
        auto it = cache_.find(name);
        if (it != cache_.end()) return it->second;
        RunOptions opts;
        opts.output_dir = out_ / name;
        return cache_.emplace(name, run_scenario(load_scenario(scenarios_ / (name + ".json")), opts)).first->second;
    }

    // 1D half-line heat IBVP against erfc at h = 1/512.
    Line c1()
    {
        const auto t0 = std::chrono::steady_clock::now();
        const RunReport& r = report("oracle_1d");
        const double seconds = elapsed(t0);
        const auto& e = experiment(r, "oracle");
        const double err = e.metrics.at("max_rel_error").get<double>();
        const bool ok = err < 1e-3 && seconds < 10.0;
        return {ok, "1D erfc oracle: max rel error " + fmt(err) + " (< 1e-3), runtime " + fmt(seconds, 3) + " s (< 10 s)",
                {{"max_rel_error", err}, {"seconds", seconds}}};
    }

    // Varadhan ladder on the unit disk, heat and wavy nonlinearity.
    Line c2()
    {
        const RunReport& heat = report("disk_varadhan");
        const RunReport& wavy = report("disk_varadhan_wavy");
        const auto& eh = experiment(heat, "varadhan");
        const auto& ew = experiment(wavy, "varadhan");
        const double seconds = solve_seconds(heat) + experiment_seconds(heat, "varadhan") + solve_seconds(wavy) +
                               experiment_seconds(wavy, "varadhan");
        const auto vh = eh.report.at("values").get<std::vector<double>>();
        const auto vw = ew.report.at("values").get<std::vector<double>>();
        const bool mono_h = eh.report.at("monotone_decreasing").get<bool>() && vh.size() == 3;
        const bool mono_w = ew.report.at("monotone_decreasing").get<bool>() && vw.size() == 3;
        const double rel = eh.metrics.at("final_relative_error").get<double>();
        const bool ok = mono_h && mono_w && rel < 0.15 && seconds < 300.0;
        auto ladder = [](const std::vector<double>& v) {
            std::string s;
            for (double x : v) s += (s.empty() ? "" : ", ") + fmt(x);
            return s;
        };
        return {ok,
                "Varadhan sup errors heat [" + ladder(vh) + "] decreasing=" + (mono_h ? "yes" : "no") + ", wavy [" +
                    ladder(vw) + "] decreasing=" + (mono_w ? "yes" : "no") + ", final rel error " + fmt(rel) +
                    " (< 0.15), runtime " + fmt(seconds, 3) + " s (< 300 s)",
                {{"heat", vh}, {"wavy", vw}, {"final_relative_error", rel}, {"seconds", seconds}}};
    }

    // Heat constant against the Gamma closed form, Cauchy half.
    Line c3()
    {
        const auto t0 = std::chrono::steady_clock::now();
        // 2^{(N-1)/2} w_{N-1} (2/((N+1)/2)) (1/(2 sqrt pi)) 2^{(N+1)/2} Gamma((N+3)/4) at N = 2.
        const double oracle = std::sqrt(2.0) * 2.0 * (2.0 / 1.5) / (2.0 * std::sqrt(pi)) * std::pow(2.0, 1.5) *
                              std::tgamma(1.25);
        const double c = heat_constant(2, ProblemKind::ibvp);
        const double half = heat_constant(2, ProblemKind::cauchy);
        const double seconds = elapsed(t0);
        const bool ok = std::abs(c - oracle) <= 1e-8 && half == 0.5 * c && seconds < 1.0;
        return {ok,
                "c2 = " + fmt(c, 12) + " vs closed form " + fmt(oracle, 12) + " (|diff| " + fmt(std::abs(c - oracle), 2) +
                    " <= 1e-8), cauchy exactly half: " + (half == 0.5 * c ? "yes" : "no") + ", runtime " +
                    fmt(seconds, 2) + " s",
                {{"c2", c}, {"oracle", oracle}, {"cauchy", half}}};
    }

    // Heat content limits (IBVP and Cauchy) and the degenerate divergence.
    Line c4()
    {
        const RunReport& ibvp = report("disk_varadhan");
        const RunReport& cauchy = report("disk_cauchy");
        const auto& li = experiment(ibvp, "heat_content_limit");
        const auto& lc = experiment(cauchy, "heat_content_limit");
        const auto& dv = experiment(ibvp, "heat_content_divergence");
        const double ei = li.metrics.at("relative_error").get<double>();
        const double ec = lc.metrics.at("relative_error").get<double>();
        const bool grows = dv.report.at("monotone_increasing").get<bool>();
        const double seconds = solve_seconds(ibvp) + experiment_seconds(ibvp, "heat_content_limit") +
                               experiment_seconds(ibvp, "heat_content_divergence") + solve_seconds(cauchy) +
                               experiment_seconds(cauchy, "heat_content_limit");
        const bool ok = ei <= 0.10 && ec <= 0.10 && grows && seconds < 600.0;
        return {ok,
                "heat content rel error ibvp " + fmt(ei) + ", cauchy " + fmt(ec) + " (<= 0.10), centre R = 1 grows: " +
                    (grows ? "yes" : "no") + ", runtime " + fmt(seconds, 3) + " s (< 600 s)",
                {{"ibvp", ei}, {"cauchy", ec}, {"divergence", dv.report.at("values")}, {"seconds", seconds}}};
    }

    // Level band measure near a flat boundary against the chord formula.
    Line c5()
    {
        const auto t0 = std::chrono::steady_clock::now();
        const double R = 1.0, h = 1.0 / 1024.0;
        const auto half = DomainSpec::halfspace(make_point({0.0, 1.0}), 0.0);
        const auto sdf = build_signed_distance(half, GridSpec::covering(make_point({-1.1, -0.05}), make_point({1.1, 0.1}), h));
        const std::vector<double> ladder{0.04, 0.01, 0.0025};
        std::vector<double> values;
        for (double s : ladder) values.push_back(level_band_measure(sdf, s, make_point({0.0, R}), R) / std::sqrt(s));
        // s^{-1/2} 2 sqrt(2Rs - s^2) = 2 sqrt(2R) - s / sqrt(2R) + ...: integer powers of s.
        const double limit = richardson_limit(ladder, values, 1.0);
        const double oracle = 2.0 * std::sqrt(2.0 * R);
        const double rel = std::abs(limit - oracle) / oracle;
        const double seconds = elapsed(t0);
        const bool ok = rel <= 0.05 && seconds < 30.0;
        return {ok, "tangent-disk band measure limit " + fmt(limit, 6) + " vs 2 sqrt(2R) = " + fmt(oracle, 6) +
                        " (rel " + fmt(rel, 3) + " <= 0.05), runtime " + fmt(seconds, 3) + " s",
                {{"values", values}, {"limit", limit}, {"oracle", oracle}}};
    }

    // Barriers on the disk: residual signs, envelope, t1 against the radial closed form.
    Line c6()
    {
        const RunReport& r = report("disk_varadhan");
        const auto& b = experiment(r, "barriers");
        const bool subsuper = b.report.at("subsuper").at("passed").get<bool>();
        const auto violations = b.metrics.at("envelope_violations").get<std::size_t>();
        const double t1 = b.metrics.at("t1").get<double>();
        // max |Laplacian d*| on |d*| <= rho0 is 1 / (1 - rho0) for the unit disk.
        const double eps = 0.1, rho0 = 0.25;
        const double closed = std::pow(eps / (2.0 / (1.0 - rho0)), 2.0);
        const double rel = std::abs(t1 - closed) / closed;
        const bool ok = subsuper && violations == 0 && rel <= 0.05;
        return {ok,
                "subsuper " + std::string(subsuper ? "passes" : "fails") + ", envelope violations " +
                    std::to_string(violations) + " at t in {1e-3, 2.5e-4}, t1 " + fmt(t1, 6) + " vs " + fmt(closed, 6) +
                    " (rel " + fmt(rel, 3) + " <= 0.05)",
                {{"t1", t1}, {"closed_form", closed}, {"warnings", b.report.at("warnings")}}};
    }

    // Balance laws on the disk solve.
    Line c7()
    {
        const RunReport& r = report("disk_varadhan");
        const auto& b = experiment(r, "balance");
        const double moment = b.metrics.at("max_moment").get<double>();
        double sym = 0.0, asym = 0.0;
        for (const auto& p : b.report.at("pairs")) {
            const double v = std::abs(p.at("value").get<double>());
            if (p.at("expect") == "zero")
                sym = std::max(sym, v);
            else
                asym = std::max(asym, v);
        }
        const bool ok = b.passed && moment <= 1e-10 && sym <= 1e-8 && asym > 1e-6;
        return {ok,
                "max radial moment " + fmt(moment, 3) + " (<= 1e-10), symmetric pair " + fmt(sym, 3) +
                    " (<= 1e-8), asymmetric pair " + fmt(asym, 3) + " (> 1e-6)",
                {{"max_moment", moment}, {"symmetric", sym}, {"asymmetric", asym}}};
    }

    // Detection pipeline at h and h/2.
    Line c8()
    {
        bool ok = true;
        std::string text;
        nlohmann::json details = nlohmann::json::object();
        for (const std::string name : {"detect_disk", "detect_annulus", "detect_ellipse"}) {
            const Scenario s = load_scenario(scenarios_ / (name + ".json"));
            std::vector<std::string> got;
            bool passed = true;
            for (double h : {s.grid.h(), 0.5 * s.grid.h()}) {
                RunOptions opts;
                opts.output_dir = out_ / (name + "_h" + fmt(1.0 / h, 6));
                const RunReport r = run_scenario(s.with_spacing(h), opts);
                const auto& e = r.experiments.at(0);
                const std::string cls = e.report.value("classification", std::string("?"));
                const auto& stage_json = e.report.value("failing_stage", nlohmann::json());
                const std::string stage = stage_json.is_string() ? stage_json.get<std::string>() : std::string();
                got.push_back(stage.empty() ? cls : cls + "@" + stage);
                passed = passed && e.passed;
                details[name].push_back({{"h", h}, {"classification", cls}, {"failing_stage", stage},
                                         {"passed", e.passed}, {"metrics", e.metrics}});
            }
            const bool stable = got[0] == got[1];
            ok = ok && passed && stable;
            text += (text.empty() ? "" : "; ") + name + " " + got[0] + " / " + got[1] + (stable ? " stable" : " CHANGED") +
                    (passed ? "" : " (expectation not met)");
        }
        return {ok, text, details};
    }

    // Parallel-body reconstruction and moving planes on the disk construction.
    Line c9()
    {
        const double h = 1.0 / 128.0;
        const auto omega = DomainSpec::ball(make_point({0.0, 0.0}), 1.0);
        const auto d = DomainSpec::ball(make_point({0.0, 0.0}), 0.4);
        const auto rec = reconstruct_domain(d, 0.6, omega, GridSpec::covering(make_point({-1.1, -1.1}), make_point({1.1, 1.1}), h));
        const auto v = moving_plane_scan(d, scan_directions(2, 8),
                                         GridSpec::covering(make_point({-0.45, -0.45}), make_point({0.45, 0.45}), h));
        bool monotone = true;
        for (const auto& s : v.scans) monotone = monotone && s.containment_monotone;
        const double centre_err = v.center ? v.center->norm() : INFINITY;
        const bool ok = rec.disagreeing == 0 && centre_err <= h && monotone;
        return {ok,
                "reconstruction disagreeing nodes " + std::to_string(rec.disagreeing) + " of " + std::to_string(rec.probed) +
                    ", moving-plane centre error " + fmt(centre_err, 3) + " (<= h = " + fmt(h, 4) +
                    "), containment monotone: " + (monotone ? "yes" : "no"),
                {{"reconstruction", rec.to_json()}, {"centre_error", centre_err}}};
    }

    // Repeat determinism and the observed order on the 1D oracle pair.
    Line c10()
    {
        const Scenario s = load_scenario(scenarios_ / "oracle_1d.json");
        RunOptions quiet;
        quiet.write = false;
        const std::string a = run_scenario(s, quiet).to_json(false).dump();
        const std::string b = run_scenario(s, quiet).to_json(false).dump();
        const bool identical = a == b;
        const RunReport coarse = run_scenario(s.with_spacing(2.0 * s.grid.h()), quiet);
        const RunReport fine = run_scenario(s, quiet);
        const std::string table = convergence_table({coarse, fine});
        std::istringstream rows(table);
        std::string line;
        std::getline(rows, line);
        double p = NAN;
        while (std::getline(rows, line)) {
            if (line.rfind("oracle.max_rel_error,", 0) != 0) continue;
            // metric,h_coarse,h_fine,e_coarse,e_fine,p,flag
            std::istringstream fields(line);
            std::string field;
            for (int k = 0; k <= 5; ++k) std::getline(fields, field, ',');
            p = std::stod(field);
        }
        std::ofstream(out_ / "convergence_oracle_1d.csv") << table;
        const bool ok = identical && p >= 0.8 && p <= 1.2;
        return {ok, std::string("repeat reports byte-identical: ") + (identical ? "yes" : "no") + ", observed order p = " +
                        fmt(p) + " in [0.8, 1.2]",
                {{"identical", identical}, {"p", p}, {"table", table}}};
    }
};

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance criteria"};
    app.require_subcommand(1);
    std::string results = "acceptance_results.json";
    std::string scenarios = ISOTHERM_SOURCE_DIR "/scenarios";
    std::string out = "acceptance_out";
    int id = 0;
    auto* run = app.add_subcommand("run", "Run every criterion and write the results file");
    run->add_option("--results", results, "Results file");
    run->add_option("--scenarios", scenarios, "Scenario directory");
    run->add_option("--out", out, "Output directory for run reports");
    auto* check = app.add_subcommand("check", "Print one criterion from the results file");
    check->add_option("criterion", id, "Criterion number 1-10")->required()->check(CLI::Range(1, 10));
    check->add_option("--results", results, "Results file");
    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        fs::create_directories(out);
        const auto lines = Acceptance(scenarios, out).run();
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [k, l] : lines)
            j[std::to_string(k)] = {{"passed", l.passed}, {"line", l.text}, {"details", l.details}};
        std::ofstream(results) << j.dump(2) << '\n';
        return 0;
    }

    std::ifstream in(results);
    if (!in) {
        std::cout << "criterion " << id << ": FAIL no results file " << results << '\n';
        return 1;
    }
    const auto j = nlohmann::json::parse(in);
    const std::string key = std::to_string(id);
    if (!j.contains(key)) {
        std::cout << "criterion " << id << ": FAIL not evaluated\n";
        return 1;
    }
    const bool passed = j.at(key).at("passed").get<bool>();
    std::cout << "criterion " << id << ": " << (passed ? "PASS " : "FAIL ") << j.at(key).at("line").get<std::string>()
              << '\n';
    return passed ? 0 : 1;
}

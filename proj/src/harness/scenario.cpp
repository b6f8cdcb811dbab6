#include "isotherm/harness.hpp"

#include "isotherm/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace isotherm {

namespace {

const std::set<std::string> experiment_kinds{"oracle", "varadhan", "heat_content", "barriers", "balance", "detect"};

const nlohmann::json& require(const nlohmann::json& j, const std::string& key, const std::string& where)
{
    if (!j.is_object() || !j.contains(key)) fail(ErrorKind::schema, where + "." + key + " is required");
    return j.at(key);
}

std::vector<double> number_list(const nlohmann::json& j, const std::string& where)
{
    if (!j.is_array()) fail(ErrorKind::schema, where + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) fail(ErrorKind::schema, where + " must be an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

nlohmann::json resolve_include(const nlohmann::json& j, const std::filesystem::path& base)
{
    if (!j.is_string()) return j;
    const std::filesystem::path p = base / j.get<std::string>();
    std::ifstream in(p);
    if (!in) fail(ErrorKind::io, "cannot read " + p.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::schema, p.string() + ": " + e.what());
    }
}

void check_in_schedule(const std::vector<double>& times, const std::vector<double>& schedule, const std::string& where)
{
    for (double t : times) {
        const bool found = std::any_of(schedule.begin(), schedule.end(),
                                       [t](double s) { return std::abs(s - t) <= 1e-9 * std::max(s, t); });
        if (!found) fail(ErrorKind::schema, where + ": t = " + std::to_string(t) + " is not in the schedule");
    }
}

void check_experiment(const ExperimentSpec& e, const std::vector<double>& schedule, int dim)
{
    const std::string where = "experiments[" + e.name + "].params";
    const auto& p = e.params;
    auto times = [&](const char* key, bool required) {
        if (!p.contains(key)) {
            if (required) fail(ErrorKind::schema, where + "." + key + " is required");
            return;
        }
        check_in_schedule(number_list(p.at(key), where + "." + key), schedule, where + "." + key);
    };
    if (e.kind == "oracle") {
        times("times", true);
        if (dim != 1) fail(ErrorKind::schema, where + ": the erfc oracle needs a 1D grid");
    } else if (e.kind == "varadhan") {
        times("ladder", true);
    } else if (e.kind == "heat_content") {
        times("ladder", true);
        require(p, "x0", where);
        require(p, "R", where);
    } else if (e.kind == "barriers") {
        times("times", true);
        require(p, "epsilon", where);
        require(p, "rho0", where);
        require(p, "R", where);
    } else if (e.kind == "balance") {
        times("times", true);
    } else if (e.kind == "detect") {
        require(p, "D", where);
        times("times", false);
    }
}

}  // namespace

nlohmann::json default_tolerances()
{
    return {{"oracle_rel", 1e-3},
            {"varadhan_rel", 0.15},
            {"heat_content_rel", 0.10},
            {"subsuper_slack_h", 10.0},
            {"envelope_tol_h", 10.0},
            {"moment_abs", 1e-10},
            {"symmetric_pair_abs", 1e-8},
            {"asymmetric_pair_min", 1e-6},
            {"stationary_rel", 0.02},
            {"stationary_abs", 1e-4}};
}

Scenario Scenario::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir)
{
    if (!j.is_object()) fail(ErrorKind::schema, "scenario must be a JSON object");
    const int version = j.value("schema_version", scenario_schema_version);
    if (version != scenario_schema_version)
        fail(ErrorKind::schema, "schema_version " + std::to_string(version) + " is not supported");
    const auto& name = require(j, "name", "scenario");
    if (!name.is_string() || name.get<std::string>().empty()) fail(ErrorKind::schema, "scenario.name must be a string");
    Scenario s{version, name.get<std::string>(),
               DomainSpec::from_json(resolve_include(require(j, "domain", "scenario"), base_dir)),
               ProblemKind::ibvp, {}, {}, {}, {}, {}, nlohmann::json::object(), {}};
    s.problem = problem_from_string(j.value("problem", std::string("ibvp")));
    s.nonlinearity = Nonlinearity::from_json(require(j, "nonlinearity", "scenario"));
    const NonlinearityValidation nv = validate_nonlinearity(s.nonlinearity);
    if (!nv.passed)
        fail(ErrorKind::schema, "nonlinearity fails validation: " + (nv.messages.empty() ? std::string() : nv.messages[0]));

    const auto& g = require(j, "grid", "scenario");
    if (g.is_object() && g.contains("h")) {
        const double h = g.at("h").get<double>();
        const auto lo = number_list(require(g, "lo", "grid"), "grid.lo");
        const auto hi = number_list(require(g, "hi", "grid"), "grid.hi");
        if (lo.size() != hi.size()) fail(ErrorKind::schema, "grid.lo and grid.hi differ in length");
        s.grid = GridSpec::covering(make_point(lo), make_point(hi), h);
    } else {
        s.grid = GridSpec::from_json(g);
    }
    if (s.grid.dim != s.domain.dim()) fail(ErrorKind::schema, "grid and domain dimensions differ");
    if (j.contains("time_stepping")) s.stepping = TimeStepping::from_json(j.at("time_stepping"));

    s.schedule = number_list(require(j, "schedule", "scenario"), "schedule");
    if (s.schedule.empty()) fail(ErrorKind::schema, "schedule must not be empty");
    for (std::size_t k = 0; k < s.schedule.size(); ++k) {
        if (!(s.schedule[k] > 0.0)) fail(ErrorKind::schema, "schedule[" + std::to_string(k) + "] must be > 0");
        if (k > 0 && !(s.schedule[k] > s.schedule[k - 1]))
            fail(ErrorKind::schema, "schedule[" + std::to_string(k) + "] must exceed schedule[" + std::to_string(k - 1) + "]");
    }

    const auto& ex = require(j, "experiments", "scenario");
    if (!ex.is_array()) fail(ErrorKind::schema, "scenario.experiments must be an array");
    std::set<std::string> names;
    for (std::size_t k = 0; k < ex.size(); ++k) {
        const auto& e = ex[k];
        const std::string where = "experiments[" + std::to_string(k) + "]";
        ExperimentSpec spec;
        const auto& kind = require(e, "kind", where);
        if (!kind.is_string()) fail(ErrorKind::schema, where + ".kind must be a string");
        spec.kind = kind.get<std::string>();
        if (!experiment_kinds.count(spec.kind)) fail(ErrorKind::schema, where + ": unknown experiment kind '" + spec.kind + "'");
        spec.name = e.value("name", spec.kind);
        if (!names.insert(spec.name).second) fail(ErrorKind::schema, where + ": duplicate experiment name '" + spec.name + "'");
        spec.params = e.value("params", nlohmann::json::object());
        if (!spec.params.is_object()) fail(ErrorKind::schema, where + ".params must be an object");
        if (spec.params.contains("D")) spec.params["D"] = resolve_include(spec.params["D"], base_dir);
        check_experiment(spec, s.schedule, s.grid.dim);
        s.experiments.push_back(std::move(spec));
    }

    s.tolerances = default_tolerances();
    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        if (!t.is_object()) fail(ErrorKind::schema, "scenario.tolerances must be an object");
        for (const auto& [k, v] : t.items()) {
            if (!s.tolerances.contains(k)) fail(ErrorKind::schema, "unknown tolerance '" + k + "'");
            if (!v.is_number() || v.get<double>() < 0.0) fail(ErrorKind::schema, "tolerance '" + k + "' must be a number >= 0");
            s.tolerances[k] = v;
        }
    }
    s.output_dir = j.value("output_dir", "out/" + s.name);
    return s;
}

nlohmann::json Scenario::to_json() const
{
    nlohmann::json ex = nlohmann::json::array();
    for (const auto& e : experiments) ex.push_back({{"kind", e.kind}, {"name", e.name}, {"params", e.params}});
    return {{"schema_version", schema_version},
            {"name", name},
            {"domain", domain.to_json()},
            {"problem", to_string(problem)},
            {"nonlinearity", {{"label", nonlinearity.label}, {"params", nonlinearity.params}}},
            {"grid", grid.to_json()},
            {"time_stepping", stepping.to_json()},
            {"schedule", schedule},
            {"experiments", ex},
            {"tolerances", tolerances},
            {"output_dir", output_dir.generic_string()}};
}

Scenario Scenario::with_spacing(double h) const
{
    if (!(h > 0.0)) fail(ErrorKind::configuration, "grid spacing must be > 0");
    Scenario s = *this;
    s.grid = GridSpec::covering(grid.lower(), grid.upper(), h);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot read scenario " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::schema, path.string() + ": " + e.what());
    }
    return Scenario::from_json(j, path.parent_path());
}

}  // namespace isotherm

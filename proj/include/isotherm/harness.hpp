#pragma once

#include "isotherm/diffusion_model.hpp"
#include "isotherm/geometry.hpp"
#include "isotherm/solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace isotherm {

constexpr int scenario_schema_version = 1;

/// Default tolerance table; scenario "tolerances" entries override it and
/// the merged table is echoed into every report.
nlohmann::json default_tolerances();

struct ExperimentSpec {
    std::string kind;  // oracle | varadhan | heat_content | barriers | balance | detect
    std::string name;
    nlohmann::json params = nlohmann::json::object();
};

struct Scenario {
    int schema_version = scenario_schema_version;
    std::string name;
    DomainSpec domain;
    ProblemKind problem = ProblemKind::ibvp;
    Nonlinearity nonlinearity;
    GridSpec grid;
    TimeStepping stepping;
    std::vector<double> schedule;
    std::vector<ExperimentSpec> experiments;
    nlohmann::json tolerances = nlohmann::json::object();
    std::filesystem::path output_dir;

    static Scenario from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    nlohmann::json to_json() const;
    /// Same box, spacing h (extents rescaled); stepping follows h if tied.
    Scenario with_spacing(double h) const;
};

Scenario load_scenario(const std::filesystem::path& path);

struct ExperimentResult {
    std::string name;
    std::string kind;
    bool passed = false;
    std::string error;
    nlohmann::json report = nlohmann::json::object();
    /// Scalar error measures used by convergence tables.
    nlohmann::json metrics = nlohmann::json::object();
    std::string csv;
};

struct RunReport {
    nlohmann::json scenario;
    std::vector<ExperimentResult> experiments;
    nlohmann::json solve = nlohmann::json::object();
    nlohmann::json timings = nlohmann::json::object();
    int solve_count = 0;
    bool passed = false;

    /// Deterministic part first; timings only when requested.
    nlohmann::json to_json(bool with_timings = true) const;
};

struct RunOptions {
    bool write = true;
    bool grid_dump = false;
    /// Restrict to experiments of this kind (CLI subcommands).
    std::optional<std::string> only_kind;
    std::optional<std::filesystem::path> output_dir;
};

/// One solve shared by every experiment; writes report.json, per-experiment
/// CSV tables and optional grid dumps.
RunReport run_scenario(const Scenario& scenario, const RunOptions& options = {});

void write_report(const RunReport& report, const std::filesystem::path& dir);

/// Rows (metric, h_coarse, h_fine, e_coarse, e_fine, p, flag) with
/// p = log2(e_h / e_{h/2}) over consecutive refinements.
std::string convergence_table(const std::vector<RunReport>& reports);

}  // namespace isotherm

#include "isotherm/error.hpp"
#include "isotherm/harness.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace isotherm;
namespace fs = std::filesystem;

namespace {

nlohmann::json small_scenario()
{
    return nlohmann::json::parse(R"({
      "schema_version": 1,
      "name": "harness_small",
      "domain": {"kind": "halfspace", "params": {"normal": [1.0], "offset": 0.0}},
      "problem": "ibvp",
      "nonlinearity": {"label": "identity"},
      "grid": {"h": 0.015625, "lo": [0.0], "hi": [1.0]},
      "time_stepping": {"steps_per_doubling": 8},
      "schedule": [0.0025, 0.01],
      "experiments": [
        {"kind": "oracle", "name": "late", "params": {"times": [0.01]}},
        {"kind": "oracle", "name": "early", "params": {"times": [0.0025]}}
      ]
    })");
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / "isotherm_harness_test" / name;
    fs::remove_all(p);
    return p;
}

RunReport fake_report(double h, double error)
{
    RunReport r;
    r.scenario = {{"name", "fake"}, {"grid", {{"spacing", {h}}}}};
    ExperimentResult e;
    e.name = "exp";
    e.metrics = {{"err", error}};
    r.experiments.push_back(e);
    return r;
}

int count_lines(const std::string& s)
{
    int n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST_CASE("shipped scenario loads")
{
    const auto s = load_scenario(fs::path(ISOTHERM_SOURCE_DIR) / "scenarios" / "disk_varadhan.json");
    CHECK(s.name == "disk_varadhan");
    CHECK(s.grid.dim == 2);
    CHECK_FALSE(s.experiments.empty());
    CHECK(s.tolerances.contains("oracle_rel"));
    const auto again = Scenario::from_json(s.to_json());
    CHECK(again.to_json() == s.to_json());
}

TEST_CASE("schema errors name the offending field")
{
    auto j = small_scenario();
    j["schedule"] = {0.01, -0.1};
    try {
        Scenario::from_json(j);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::schema);
        CHECK(std::string(e.what()).find("schedule[1] must be > 0") != std::string::npos);
    }

    j = small_scenario();
    j["nonlinearity"].erase("label");
    try {
        Scenario::from_json(j);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::schema);
        CHECK(std::string(e.what()).find("nonlinearity.label") != std::string::npos);
    }

    j = small_scenario();
    j["tolerances"] = {{"no_such_tolerance", 1.0}};
    CHECK_THROWS_AS(Scenario::from_json(j), Error);
}

TEST_CASE("one solve feeds every experiment")
{
    const auto s = Scenario::from_json(small_scenario());
    RunOptions opts;
    opts.output_dir = scratch("shared");
    const auto r = run_scenario(s, opts);
    CHECK(r.solve_count == 1);
    CHECK(r.timings.at("solves").size() == 1);
    REQUIRE(r.experiments.size() == 2);
    CHECK(fs::exists(*opts.output_dir / "report.json"));
    CHECK(fs::exists(*opts.output_dir / "late.csv"));
    std::ifstream in(*opts.output_dir / "report.json");
    const auto written = nlohmann::json::parse(in);
    CHECK(written.at("solve_count") == 1);
    CHECK(written.contains("timings"));
}

TEST_CASE("a zero tolerance fails the run but still writes the report")
{
    auto j = small_scenario();
    j["tolerances"] = {{"oracle_rel", 0.0}};
    RunOptions opts;
    opts.output_dir = scratch("strict");
    const auto r = run_scenario(Scenario::from_json(j), opts);
    CHECK_FALSE(r.passed);
    for (const auto& e : r.experiments) {
        CHECK_FALSE(e.passed);
        CHECK(e.error.empty());
    }
    std::ifstream in(*opts.output_dir / "report.json");
    CHECK(nlohmann::json::parse(in).at("passed") == false);
}

TEST_CASE("runs are deterministic")
{
    const auto s = Scenario::from_json(small_scenario());
    RunOptions opts;
    opts.write = false;
    const auto a = run_scenario(s, opts).to_json(false);
    const auto b = run_scenario(s, opts).to_json(false);
    CHECK(a.dump() == b.dump());
    CHECK_FALSE(a.contains("timings"));
}

TEST_CASE("only_kind restricts the experiments")
{
    RunOptions opts;
    opts.write = false;
    opts.only_kind = "varadhan";
    const auto r = run_scenario(Scenario::from_json(small_scenario()), opts);
    CHECK(r.experiments.empty());
}

TEST_CASE("convergence tables")
{
    const std::string same = convergence_table({fake_report(0.1, 0.5), fake_report(0.05, 0.5)});
    CHECK(same.find("no_convergence") != std::string::npos);
    CHECK(same.find(",0,no_convergence") != std::string::npos);

    const std::string three =
        convergence_table({fake_report(0.025, 0.025), fake_report(0.1, 0.1), fake_report(0.05, 0.05)});
    CHECK(count_lines(three) == 3);
    std::istringstream rows(three);
    std::string line;
    std::getline(rows, line);
    while (std::getline(rows, line)) CHECK(line.find(",1,") != std::string::npos);

    auto other = fake_report(0.05, 0.1);
    other.scenario["name"] = "different";
    CHECK_THROWS_AS(convergence_table({fake_report(0.1, 0.2), other}), Error);
    CHECK_THROWS_AS(convergence_table({fake_report(0.1, 0.2)}), Error);
    CHECK(convergence_table({fake_report(0.1, 0.0), fake_report(0.05, 0.1)}).find("nonpositive_error") !=
          std::string::npos);
}

TEST_CASE("spacing override keeps the box")
{
    const auto s = Scenario::from_json(small_scenario()).with_spacing(1.0 / 32.0);
    CHECK(s.grid.h() == doctest::Approx(1.0 / 32.0));
    CHECK(s.grid.lower()[0] <= 0.0);
    CHECK(s.grid.upper()[0] >= 1.0);
    CHECK(s.grid.upper()[0] - s.grid.lower()[0] <= 1.0 + 2.0 / 32.0 + 1e-12);
}

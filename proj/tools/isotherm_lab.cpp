#include "isotherm/error.hpp"
#include "isotherm/harness.hpp"

#include <CLI11.hpp>

#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

struct Common {
    std::string scenario;
    std::string out;
    bool grid_dump = false;
    double h = 0.0;
};

void add_common(CLI::App* cmd, Common& c, bool with_h)
{
    cmd->set_help_flag("--help", "Print this help message and exit");
    cmd->add_option("scenario", c.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", c.out, "Output directory (defaults to the scenario's output_dir)");
    cmd->add_flag("--grid-dump", c.grid_dump, "Write every snapshot as a raw grid dump");
    if (with_h) cmd->add_option("--h", c.h, "Override the grid spacing")->check(CLI::PositiveNumber);
}

isotherm::Scenario load(const Common& c)
{
    isotherm::Scenario s = isotherm::load_scenario(c.scenario);
    if (c.h > 0.0) s = s.with_spacing(c.h);
    return s;
}

void print_summary(const isotherm::RunReport& r)
{
    if (r.solve.contains("error")) std::cout << "solve failed: " << r.solve.at("error").get<std::string>() << '\n';
    for (const auto& e : r.experiments) {
        std::cout << (e.passed ? "PASS " : "FAIL ") << e.name << " (" << e.kind << ")";
        if (!e.error.empty()) std::cout << ": " << e.error;
        std::cout << '\n';
    }
    std::cout << (r.passed ? "all experiments passed" : "some experiments failed") << '\n';
}

int run(const Common& c, std::optional<std::string> only_kind)
{
    const isotherm::Scenario s = load(c);
    isotherm::RunOptions opts;
    opts.grid_dump = c.grid_dump;
    opts.only_kind = std::move(only_kind);
    if (!c.out.empty()) opts.output_dir = c.out;
    const isotherm::RunReport r = isotherm::run_scenario(s, opts);
    print_summary(r);
    return r.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
#ifdef ISOTHERM_BLAS_ENV
    // OpenBLAS reads its core type when the library loads, so restart once
    // with the core type chosen at configure time.
    {
        const std::string env = ISOTHERM_BLAS_ENV;
        const auto eq = env.find('=');
        const std::string key = env.substr(0, eq);
        if (eq != std::string::npos && !std::getenv(key.c_str())) {
            setenv(key.c_str(), env.substr(eq + 1).c_str(), 1);
            execv("/proc/self/exe", argv);
        }
    }
#endif
    CLI::App app{"Nonlinear diffusion experiments: solve, asymptotics, barriers and symmetry detection"};
    app.require_subcommand(1);

    Common common;
    struct Sub {
        const char* name;
        const char* kind;
        const char* help;
    };
    const Sub subs[] = {
        {"run", nullptr, "Run every experiment in the scenario"},
        {"solve", "", "Solve only (use --grid-dump to keep the snapshots)"},
        {"varadhan", "varadhan", "Run the Varadhan experiments"},
        {"heat-content", "heat_content", "Run the heat content experiments"},
        {"barriers", "barriers", "Run the barrier experiments"},
        {"balance", "balance", "Run the balance law experiments"},
        {"detect", "detect", "Run the symmetry detection experiments"},
    };
    std::vector<std::pair<CLI::App*, const Sub*>> commands;
    for (const auto& s : subs) {
        CLI::App* cmd = app.add_subcommand(s.name, s.help);
        add_common(cmd, common, true);
        commands.emplace_back(cmd, &s);
    }

    Common conv;
    std::vector<double> spacings;
    CLI::App* convergence = app.add_subcommand("convergence", "Observed orders over grid refinements");
    add_common(convergence, conv, false);
    convergence->add_option("--h", spacings, "Grid spacings, at least two")->required()->expected(2, -1);

    CLI11_PARSE(app, argc, argv);

    try {
        for (const auto& [cmd, sub] : commands) {
            if (!cmd->parsed()) continue;
            std::optional<std::string> kind;
            if (sub->kind) kind = sub->kind;
            return run(common, kind);
        }
        if (convergence->parsed()) {
            const isotherm::Scenario base = isotherm::load_scenario(conv.scenario);
            const std::filesystem::path out = conv.out.empty() ? base.output_dir : std::filesystem::path(conv.out);
            std::vector<isotherm::RunReport> reports;
            for (std::size_t k = 0; k < spacings.size(); ++k) {
                isotherm::RunOptions opts;
                opts.grid_dump = conv.grid_dump;
                opts.output_dir = out / ("h" + std::to_string(k));
                reports.push_back(isotherm::run_scenario(base.with_spacing(spacings[k]), opts));
                print_summary(reports.back());
            }
            const std::string table = isotherm::convergence_table(reports);
            std::filesystem::create_directories(out);
            std::ofstream(out / "convergence.csv") << table;
            std::cout << table;
            bool passed = true;
            for (const auto& r : reports) passed = passed && r.passed;
            return passed ? 0 : 1;
        }
    } catch (const isotherm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

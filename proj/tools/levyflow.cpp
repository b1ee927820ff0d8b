#include "levyflow/errors.hpp"
#include "levyflow/levy_model.hpp"
#include "levyflow/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

enum ExitCode { ok = 0, failure = 1, config_error = 2, invalid_triplet = 3 };

}  // namespace

int main(int argc, char** argv) {
    using namespace levyflow;
    CLI::App app{"Simulate and analyse matrix-valued Levy flows"};
    app.set_version_flag("--version", std::string(LEVYFLOW_VERSION));
    app.require_subcommand(1);

    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    for (const auto& name : experiment_names()) {
        auto* sub = app.add_subcommand(name, "Run the " + name + " experiment");
        sub->add_option("--config", config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "Override the scenario seed");
        sub->add_option("--out", out, "Override the output directory");
    }

    std::string report_out = "report.csv";
    std::vector<std::string> manifests;
    auto* report = app.add_subcommand("report", "Tabulate manifest.json files into one CSV");
    report->add_option("--out", report_out, "Output CSV file");
    report->add_option("manifests", manifests, "manifest.json files")->check(CLI::ExistingFile);

    app.add_subcommand("builtins", "List builtin triplet names");

    CLI11_PARSE(app, argc, argv);

    try {
        auto* sub = app.get_subcommands().front();
        const std::string cmd = sub->get_name();
        if (cmd == "builtins") {
            for (const auto& n : builtin_names()) std::cout << n << '\n';
            return ok;
        }
        if (cmd == "report") {
            std::vector<RunManifest> ms;
            for (const auto& m : manifests) ms.push_back(load_manifest(m));
            emit_report(ms, report_out);
            std::cout << report_out << '\n';
            return ok;
        }
        ScenarioOverrides over;
        over.experiment = cmd;
        over.seed = seed;
        over.output_dir = out;
        const RunManifest m = run_scenario(config, over);
        std::cout << m.to_json()["summary"].dump() << '\n';
        return ok;
    } catch (const ConfigError& e) {
        std::cerr << "levyflow: " << e.what() << '\n';
        return config_error;
    } catch (const ValidationError& e) {
        std::cerr << "levyflow: invalid triplet: " << e.what() << '\n';
        return invalid_triplet;
    } catch (const std::exception& e) {
        std::cerr << "levyflow: " << e.what() << '\n';
        return failure;
    }
}

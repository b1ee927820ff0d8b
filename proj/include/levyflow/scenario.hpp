#pragma once

#include "levyflow/config_io.hpp"
#include "levyflow/levy_model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace levyflow {

/// simulate, determinant, lyapunov, clt, berry_esseen, invariant_measure,
/// mixing, ip_certify, generator_check, mean_check
const std::vector<std::string>& experiment_names();

struct Scenario {
    std::string experiment;
    MatrixLevyTriplet triplet;
    Json triplet_doc;  // as given: builtin name or inline document
    std::uint64_t seed = 0;
    Json params = Json::object();
    std::string output_dir = ".";
};

struct ScenarioOverrides {
    std::optional<std::string> experiment;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
};

/// Throws ConfigError (key path) or ValidationError (invalid triplet).
Scenario parse_scenario(const Json& doc, const ScenarioOverrides& over = {});
Scenario load_scenario(const std::string& config_path, const ScenarioOverrides& over = {});

/// FNV-1a 64 of the canonical scenario document, hex.
std::string scenario_hash(const Scenario& s);

struct RunManifest {
    std::string experiment;
    std::string scenario_hash;
    std::string tool_version;
    std::uint64_t seed = 0;
    double wall_clock_seconds = 0;
    Json summary = Json::object();
    std::vector<std::string> files;  // relative to output_dir
    Json extra = Json::object();
    std::string output_dir;

    Json to_json() const;
    static RunManifest from_json(const Json& doc);
};

RunManifest run_scenario(const Scenario& s);
RunManifest run_scenario(const std::string& config_path, const ScenarioOverrides& over = {});

RunManifest load_manifest(const std::string& path);

/// One row per scenario; berry_esseen manifests give a (t, sup_dist) long
/// table. Throws MixedKinds when experiments differ.
void emit_report(const std::vector<RunManifest>& manifests, const std::string& csv_file);

}  // namespace levyflow

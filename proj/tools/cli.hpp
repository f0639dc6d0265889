#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "canard/dynamics.hpp"

namespace canard::cli {

struct ModelSection {
    std::optional<double> delta;
    std::optional<double> theta;
    std::optional<double> eta;
    std::optional<double> epsilon;
};

struct SimulateSection {
    std::optional<double> u0;
    std::optional<double> v0;
    std::optional<double> t_end;
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    std::string method = "rkf78";
    bool detect_cycles = true;
};

struct SweepSection {
    std::optional<double> delta_min;
    std::optional<double> delta_max;
    std::optional<double> step;
    int refine_levels = 8;
    bool reverse_near_hopf = true;
    bool locate_snl = false;
};

struct AnalyzeSection {
    double transversality_step = 1e-4;
};

struct SingularOrbitSection {
    int points_per_segment = 200;
};

struct OutputSection {
    std::string dir = ".";
};

struct RunConfig {
    ModelSection model;
    SimulateSection simulate;
    SweepSection sweep;
    AnalyzeSection analyze;
    SingularOrbitSection singular_orbit;
    OutputSection output;
};

nlohmann::json to_json(const RunConfig& cfg);
// Unknown keys and wrongly typed values are validation errors naming the field.
RunConfig from_json(const nlohmann::json& j);

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& cfg, const std::string& path);

// FNV-1a (64 bit) of the canonical JSON of every section except "output".
std::uint64_t config_hash(const RunConfig& cfg);
std::string config_hash_line(const RunConfig& cfg);

// Model parameters; a missing field raises ValidationError("model.<name> ...").
Params model_params(const RunConfig& cfg, bool need_delta = true);

// Each command writes its files into cfg.output.dir, prints a short summary
// to `out` and warnings to `err`, and returns the path of its main output.
std::string cmd_analyze(const RunConfig& cfg, std::ostream& out);
std::string cmd_simulate(const RunConfig& cfg, std::ostream& out);
std::string cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);
std::string cmd_singular_orbit(const RunConfig& cfg, std::ostream& out);

// Full command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace canard::cli

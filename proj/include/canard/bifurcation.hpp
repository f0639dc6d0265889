#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "canard/dynamics.hpp"
#include "canard/model.hpp"

namespace canard {

struct DiagramRow {
    double delta = 0.0;
    double u_eq = 0.0;
    Stability eq_stability = Stability::stable_focus_or_node;
    std::optional<Branch> eq_branch;
    std::optional<double> u_cycle_min;
    std::optional<double> u_cycle_max;
    std::optional<CycleStability> cycle_stability;
    std::optional<CycleKind> cycle_kind;
    std::string status = "ok";  // "gap: <reason>" when the row failed

    bool operator==(const DiagramRow&) const = default;
};

struct SweepMeta {
    double delta_min = 0.0;
    double delta_max = 0.0;
    double step = 0.0;
    double epsilon = 0.0;
    double theta = 0.0;
    double eta = 0.0;
    int refine_levels = 0;

    bool operator==(const SweepMeta&) const = default;
};

struct DiagramBranch {
    std::vector<DiagramRow> rows;
    SweepMeta meta;
    std::vector<std::string> warnings;
};

struct SweepOptions {
    int refine_levels = 8;           // points per side of each Hopf value
    bool reverse_near_hopf = true;   // reverse-time search for unstable cycles
    double reverse_window = 0.02;    // |delta - delta_H| below which it runs
    ScanOptions scan;
};

// Uniform grid on [lo, hi] plus points delta_H +- step/2^j around both Hopf
// values. The upper end is clamped below the transcritical threshold.
DiagramBranch sweep(double delta_lo, double delta_hi, double step, const Params& base,
                    const SweepOptions& options = {});

// Hopf value where u*(delta) crosses a fold abscissa inside the bracket.
double locate_hopf(const Params& base, std::pair<double, double> bracket);

struct SnlOptions {
    double bisection_tolerance = 1e-12;
    double min_offset = 1e-10;  // closest approach to delta_H when searching for two cycles
    ScanOptions scan;
};

struct SnlResult {
    enum class Verdict { located, below_resolution };
    Verdict verdict = Verdict::below_resolution;
    std::optional<double> delta_snl;
    double delta_H = 0.0;
    int evaluations = 0;
};

std::string to_string(SnlResult::Verdict v);

// Number of cycles around E*: stable ones from the displacement scan,
// unstable ones from the scan or from reverse-time iteration.
int count_cycles(const Params& params, const ScanOptions& scan);

SnlResult locate_snl(const Params& base, double theta, std::pair<double, double> bracket, double epsilon,
                     const SnlOptions& options = {});

// Key facts for the diagram sidecar.
struct ThresholdSummary {
    std::optional<double> delta_H_P;
    std::optional<double> delta_H_Q;
    std::optional<double> A_P;
    std::optional<double> A_Q;
    std::optional<double> theta_B;
    std::optional<double> B;
    std::optional<SnlResult> snl;
};

ThresholdSummary summarize_thresholds(double theta, double eta, double epsilon);

// CSV with the row schema plus a "<path>.meta" key = value sidecar.
// Each header line is written as "# <line>" before the data.
void export_diagram(const DiagramBranch& branch, const std::string& path, const ThresholdSummary& summary,
                    const std::vector<std::string>& header_lines = {});

void write_diagram_csv(std::ostream& out, const DiagramBranch& branch);
std::vector<DiagramRow> read_diagram_csv(std::istream& in);

DiagramBranch import_diagram(const std::string& path);

}  // namespace canard

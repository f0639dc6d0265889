#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "canard/manifold.hpp"
#include "canard/params.hpp"

namespace canard {

// Embedded Runge-Kutta pairs: Dormand-Prince 5(4) and Fehlberg 7(8).
enum class Method { dopri5, rkf78 };
enum class TimeDirection { forward, reverse };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct IntegratorControls {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    Method method = Method::rkf78;
    double initial_step = 1e-3;
    double max_step = 0.0;  // 0 means unlimited
    double min_step = 1e-12;
    std::size_t max_steps = 50'000'000;
    bool check_invariants = true;
};

struct IntegratorStats {
    std::size_t steps = 0;
    std::size_t rejections = 0;
    double min_step = std::numeric_limits<double>::infinity();
};

struct Sample {
    double t;
    double u;
    double v;
};

struct Orbit {
    std::vector<Sample> samples;
    Params params;
    IntegratorStats meta;
};

// Forward-invariant box {0 < u <= u_max, 0 < v <= v_max} for a start point.
struct Box {
    double u_max = 0.0;
    double v_max = 0.0;
};

Box boundedness_box(const Params& params, State initial);

// One accepted step of the underlying scheme.
struct StepInfo {
    double t0;
    State x0;
    double t1;
    State x1;
};

enum class RunStatus { completed, stopped, escaped };

// Adaptive stepping engine for the slow-fast field (or its time reversal).
// Time always increases; in reverse mode it is elapsed backward time.
class StepEngine {
public:
    StepEngine(const Params& params, TimeDirection direction, const IntegratorControls& controls);
    ~StepEngine();
    StepEngine(const StepEngine&) = delete;
    StepEngine& operator=(const StepEngine&) = delete;

    // Observer returns false to stop. Forward runs assert positivity and the
    // boundedness box (NumericalError on violation); reverse runs report
    // leaving the box as RunStatus::escaped.
    RunStatus run(State start, double t_end, const std::function<bool(const StepInfo&)>& observer);

    // State at time t inside an accepted step, recomputed by a single step of
    // the base scheme from the step's left end.
    State state_at(const StepInfo& step, double t) const;

    State field(State s) const;
    const IntegratorStats& stats() const { return stats_; }
    TimeDirection direction() const { return direction_; }

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
    Params params_;
    IntegratorControls controls_;
    IntegratorStats stats_;
    TimeDirection direction_;
};

// Trajectory sampled at every accepted step.
Orbit integrate(const Params& params, State initial, double t_end, const IntegratorControls& controls = {});

void write_orbit_csv(std::ostream& out, const Orbit& orbit);

// A line on which one coordinate is fixed; the other one is the section
// coordinate. crossing = +1 selects crossings with the fixed coordinate
// increasing in forward time, -1 decreasing.
struct Section {
    enum class Fixed { u, v };
    Fixed fixed = Fixed::v;
    double level = 0.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    int crossing = +1;

    State point(double s) const;
    double coordinate(State x) const;
};

struct Extrema {
    double u_min = std::numeric_limits<double>::infinity();
    double u_max = -std::numeric_limits<double>::infinity();
    double v_min = std::numeric_limits<double>::infinity();
    double v_max = -std::numeric_limits<double>::infinity();
    void include(State x);
};

enum class ReturnStatus { hit, no_return, section_miss, escaped };

struct ReturnResult {
    ReturnStatus status = ReturnStatus::no_return;
    double s = 0.0;     // section coordinate of the hit
    double time = 0.0;  // return time
    Extrema extrema;
    std::vector<State> path;  // filled when requested
};

// First return to the section starting from section coordinate s.
ReturnResult return_map(const Params& params, const Section& section, double s, TimeDirection direction,
                        double max_time, const IntegratorControls& controls, bool record_path = false);

enum class CycleStability { stable, unstable };
enum class CycleKind { small_canard, canard, relaxation };

std::string to_string(CycleStability s);
std::string to_string(CycleKind k);

struct CycleRecord {
    double period = 0.0;
    double u_min = 0.0, u_max = 0.0, v_min = 0.0, v_max = 0.0;
    CycleStability stability = CycleStability::stable;
    CycleKind kind = CycleKind::canard;
    std::optional<double> hausdorff_to_singular;
    Section section;
    double section_coordinate = 0.0;
    int iterations = 0;
    std::vector<State> path;  // one revolution
};

enum class CycleStatus { found, no_cycle, section_miss };

struct CycleSearch {
    CycleStatus status = CycleStatus::no_cycle;
    std::optional<CycleRecord> cycle;
    std::string detail;
    std::vector<double> iterates;  // section coordinates visited
};

struct PoincareOptions {
    int max_iterations = 200;
    double tolerance = 1e-8;
    double max_transient = 1e7;     // total integration time budget
    double max_return_time = 0.0;   // 0 selects 200/epsilon
    std::optional<double> start;    // initial section coordinate
    bool accelerate = true;
    IntegratorControls controls;
};

// Section through the left attracting branch used for relaxation cycles:
// the vertical line u = (u_l + u_m)/2 crossed with u increasing.
Section relaxation_section(const SingularOrbit& gamma0);

// Horizontal ray v = v*, u in (u*, 1) through the interior equilibrium.
Section equilibrium_ray(const Params& params);

// Fixed-point iteration of the return map; forward finds stable cycles,
// reverse finds unstable ones.
CycleSearch poincare_cycle(const Params& params, const Section& section, TimeDirection direction,
                           const PoincareOptions& options = {});

struct ScanOptions {
    int probes = 24;
    double rho_min = 1e-6;          // smallest probe offset from u*
    double tolerance = 1e-10;       // root tolerance in the section coordinate
    double max_return_time = 0.0;   // 0 selects 200/epsilon
    std::vector<double> seeds;      // extra probe coordinates (continuation)
    IntegratorControls controls;
};

// All cycles crossing the equilibrium ray, from sign changes of the
// displacement P(s) - s (stable and unstable).
std::vector<CycleRecord> find_cycles(const Params& params, const ScanOptions& options = {});

// Revolution on a known fixed point: period, extrema and path.
CycleRecord record_cycle(const Params& params, const Section& section, double s, CycleStability stability,
                         double max_return_time, const IntegratorControls& controls);

double hausdorff_distance(const std::vector<State>& a, const std::vector<State>& b);

double cycle_vs_singular(const std::vector<State>& cycle, const SingularOrbit& gamma0,
                         int points_per_segment = 400);

CycleKind classify_cycle(const CycleRecord& cycle, const std::vector<FoldPoint>& folds, double epsilon,
                         double amplitude_constant = 5.0);

void write_cycle_record(std::ostream& out, const CycleRecord& cycle);

}  // namespace canard

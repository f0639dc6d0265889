#include "cli.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "canard/analysis.hpp"
#include "canard/bifurcation.hpp"
#include "canard/errors.hpp"
#include "canard/manifold.hpp"
#include "canard/model.hpp"
#include "canard/normal_form.hpp"
#include "canard/report.hpp"

namespace canard::cli {

using nlohmann::json;

namespace {

template <class T>
void put(json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

// Reads one field, rejecting values of the wrong type.
template <class T>
T read_field(const json& j, const std::string& section, const std::string& key) {
    const json& v = j.at(key);
    const std::string name = section + "." + key;
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ValidationError("config field " + name + " must be a boolean");
    } else if constexpr (std::is_same_v<T, int>) {
        if (!v.is_number_integer()) throw ValidationError("config field " + name + " must be an integer");
    } else if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ValidationError("config field " + name + " must be a number");
    } else {
        if (!v.is_string()) throw ValidationError("config field " + name + " must be a string");
    }
    return v.get<T>();
}

class SectionReader {
public:
    SectionReader(const json& root, std::string name) : name_(std::move(name)) {
        if (!root.contains(name_)) return;
        j_ = root.at(name_);
        if (!j_.is_object()) throw ValidationError("config section " + name_ + " must be an object");
    }

    template <class T>
    void opt(const char* key, std::optional<T>& dst) {
        seen_.push_back(key);
        if (j_.contains(key)) dst = read_field<T>(j_, name_, key);
    }

    template <class T>
    void val(const char* key, T& dst) {
        seen_.push_back(key);
        if (j_.contains(key)) dst = read_field<T>(j_, name_, key);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
                throw ValidationError("unknown config field " + name_ + "." + it.key());
            }
        }
    }

private:
    std::string name_;
    json j_ = json::object();
    std::vector<std::string> seen_;
};

std::string join(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path + " for writing");
    return f;
}

void close_out(std::ofstream& f, const std::string& path) {
    f.close();
    if (!f) throw IoError("write failed for " + path);
}

double require(const std::optional<double>& v, const std::string& name) {
    if (!v) throw ValidationError("missing required config field " + name);
    return *v;
}

}  // namespace

json to_json(const RunConfig& c) {
    json j;
    json m = json::object();
    put(m, "delta", c.model.delta);
    put(m, "theta", c.model.theta);
    put(m, "eta", c.model.eta);
    put(m, "epsilon", c.model.epsilon);
    j["model"] = m;

    json s = json::object();
    put(s, "u0", c.simulate.u0);
    put(s, "v0", c.simulate.v0);
    put(s, "t_end", c.simulate.t_end);
    s["rel_tol"] = c.simulate.rel_tol;
    s["abs_tol"] = c.simulate.abs_tol;
    s["method"] = c.simulate.method;
    s["detect_cycles"] = c.simulate.detect_cycles;
    j["simulate"] = s;

    json w = json::object();
    put(w, "delta_min", c.sweep.delta_min);
    put(w, "delta_max", c.sweep.delta_max);
    put(w, "step", c.sweep.step);
    w["refine_levels"] = c.sweep.refine_levels;
    w["reverse_near_hopf"] = c.sweep.reverse_near_hopf;
    w["locate_snl"] = c.sweep.locate_snl;
    j["sweep"] = w;

    j["analyze"] = {{"transversality_step", c.analyze.transversality_step}};
    j["singular_orbit"] = {{"points_per_segment", c.singular_orbit.points_per_segment}};
    j["output"] = {{"dir", c.output.dir}};
    return j;
}

RunConfig from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("config root must be an object");
    static const std::vector<std::string> sections = {"model",   "simulate",       "sweep",
                                                      "analyze", "singular_orbit", "output"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(sections.begin(), sections.end(), it.key()) == sections.end()) {
            throw ValidationError("unknown config section " + it.key());
        }
    }
    RunConfig c;
    SectionReader m(j, "model");
    m.opt("delta", c.model.delta);
    m.opt("theta", c.model.theta);
    m.opt("eta", c.model.eta);
    m.opt("epsilon", c.model.epsilon);
    m.finish();

    SectionReader s(j, "simulate");
    s.opt("u0", c.simulate.u0);
    s.opt("v0", c.simulate.v0);
    s.opt("t_end", c.simulate.t_end);
    s.val("rel_tol", c.simulate.rel_tol);
    s.val("abs_tol", c.simulate.abs_tol);
    s.val("method", c.simulate.method);
    s.val("detect_cycles", c.simulate.detect_cycles);
    s.finish();

    SectionReader w(j, "sweep");
    w.opt("delta_min", c.sweep.delta_min);
    w.opt("delta_max", c.sweep.delta_max);
    w.opt("step", c.sweep.step);
    w.val("refine_levels", c.sweep.refine_levels);
    w.val("reverse_near_hopf", c.sweep.reverse_near_hopf);
    w.val("locate_snl", c.sweep.locate_snl);
    w.finish();

    SectionReader a(j, "analyze");
    a.val("transversality_step", c.analyze.transversality_step);
    a.finish();

    SectionReader g(j, "singular_orbit");
    g.val("points_per_segment", c.singular_orbit.points_per_segment);
    g.finish();

    SectionReader o(j, "output");
    o.val("dir", c.output.dir);
    o.finish();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + path + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

void save_config(const RunConfig& cfg, const std::string& path) {
    auto f = open_out(path);
    f << to_json(cfg).dump(2) << '\n';
    close_out(f, path);
}

std::uint64_t config_hash(const RunConfig& cfg) {
    json j = to_json(cfg);
    j.erase("output");
    const std::string text = j.dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string config_hash_line(const RunConfig& cfg) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "config-hash: %016" PRIx64, config_hash(cfg));
    return buf;
}

Params model_params(const RunConfig& cfg, bool need_delta) {
    Params p;
    p.delta = need_delta ? require(cfg.model.delta, "model.delta") : cfg.model.delta.value_or(0.5);
    p.theta = require(cfg.model.theta, "model.theta");
    p.eta = require(cfg.model.eta, "model.eta");
    p.epsilon = require(cfg.model.epsilon, "model.epsilon");
    p.validate();
    return p;
}

std::string cmd_analyze(const RunConfig& cfg, std::ostream& out) {
    const Params p = model_params(cfg);
    if (!(cfg.analyze.transversality_step > 0.0)) {
        throw ValidationError("analyze.transversality_step must be positive");
    }
    const Report r = analyze(p, cfg.analyze.transversality_step);
    ensure_dir(cfg.output.dir);
    const std::string path = join(cfg.output.dir, "analyze_report.txt");
    auto f = open_out(path);
    f << "# " << config_hash_line(cfg) << '\n';
    r.write(f);
    close_out(f, path);
    r.write(out);
    return path;
}

std::string cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    const Params p = model_params(cfg);
    const double u0 = require(cfg.simulate.u0, "simulate.u0");
    const double v0 = require(cfg.simulate.v0, "simulate.v0");
    const double t_end = require(cfg.simulate.t_end, "simulate.t_end");
    if (!(u0 >= 0.0)) throw ValidationError("simulate.u0 must be non-negative");
    if (!(v0 >= 0.0)) throw ValidationError("simulate.v0 must be non-negative");
    if (!(t_end > 0.0)) throw ValidationError("simulate.t_end must be positive");
    if (!(cfg.simulate.rel_tol > 0.0)) throw ValidationError("simulate.rel_tol must be positive");
    if (!(cfg.simulate.abs_tol > 0.0)) throw ValidationError("simulate.abs_tol must be positive");

    IntegratorControls ctl;
    ctl.rel_tol = cfg.simulate.rel_tol;
    ctl.abs_tol = cfg.simulate.abs_tol;
    ctl.method = parse_method(cfg.simulate.method);
    const Orbit orbit = integrate(p, {u0, v0}, t_end, ctl);

    ensure_dir(cfg.output.dir);
    const std::string hash = config_hash_line(cfg);
    const std::string path = join(cfg.output.dir, "orbit.csv");
    auto f = open_out(path);
    f << "# " << hash << '\n';
    write_orbit_csv(f, orbit);
    close_out(f, path);

    const Sample& last = orbit.samples.back();
    out << "samples = " << orbit.samples.size() << '\n';
    out << "steps = " << orbit.meta.steps << '\n';
    out << "final.u = " << format_double(last.u) << '\n';
    out << "final.v = " << format_double(last.v) << '\n';

    if (cfg.simulate.detect_cycles && interior_equilibrium(p)) {
        ScanOptions scan;
        scan.controls = ctl;
        const auto cycles = find_cycles(p, scan);
        Report r;
        r.add("cycles", static_cast<int>(cycles.size()));
        for (std::size_t i = 0; i < cycles.size(); ++i) {
            const CycleRecord& c = cycles[i];
            const std::string k = "cycle" + std::to_string(i + 1);
            r.add(k + ".kind", to_string(c.kind));
            r.add(k + ".stability", to_string(c.stability));
            r.add(k + ".period", c.period);
            r.add(k + ".u_min", c.u_min);
            r.add(k + ".u_max", c.u_max);
            r.add(k + ".v_min", c.v_min);
            r.add(k + ".v_max", c.v_max);
        }
        const std::string cpath = join(cfg.output.dir, "cycles.txt");
        auto cf = open_out(cpath);
        cf << "# " << hash << '\n';
        r.write(cf);
        close_out(cf, cpath);
        r.write(out);
    }
    return path;
}

std::string cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    Params base = model_params(cfg, false);
    const double lo = require(cfg.sweep.delta_min, "sweep.delta_min");
    const double hi = require(cfg.sweep.delta_max, "sweep.delta_max");
    const double step = require(cfg.sweep.step, "sweep.step");
    if (!(step > 0.0)) throw ValidationError("sweep.step must be positive");
    if (!(lo > 0.0)) throw ValidationError("sweep.delta_min must be positive");
    if (!(hi > lo)) throw ValidationError("sweep.delta_max must exceed sweep.delta_min");
    if (cfg.sweep.refine_levels < 0) throw ValidationError("sweep.refine_levels must be non-negative");
    base.delta = lo;

    SweepOptions opt;
    opt.refine_levels = cfg.sweep.refine_levels;
    opt.reverse_near_hopf = cfg.sweep.reverse_near_hopf;
    const DiagramBranch br = sweep(lo, hi, step, base, opt);
    for (const auto& w : br.warnings) err << "warning: " << w << '\n';

    ThresholdSummary s = summarize_thresholds(base.theta, base.eta, base.epsilon);
    if (cfg.sweep.locate_snl && s.delta_H_P && s.A_P && *s.A_P > 0.0) {
        try {
            const double dh = *s.delta_H_P;
            s.snl = locate_snl(base, base.theta, {std::max(1e-6, dh - 0.05), dh}, base.epsilon);
        } catch (const Error& e) {
            err << "warning: saddle-node of cycles not located: " << e.what() << '\n';
        }
    }

    ensure_dir(cfg.output.dir);
    const std::string path = join(cfg.output.dir, "diagram.csv");
    export_diagram(br, path, s, {config_hash_line(cfg)});

    int cycles = 0;
    int gaps = 0;
    std::optional<double> first;
    std::optional<double> last;
    for (const auto& r : br.rows) {
        if (r.status != "ok") ++gaps;
        if (r.cycle_stability == CycleStability::stable) {
            ++cycles;
            if (!first) first = r.delta;
            last = r.delta;
        }
    }
    out << "rows = " << br.rows.size() << '\n';
    out << "gaps = " << gaps << '\n';
    out << "stable_cycle_rows = " << cycles << '\n';
    if (first) {
        out << "stable_cycle_delta_first = " << format_double(*first) << '\n';
        out << "stable_cycle_delta_last = " << format_double(*last) << '\n';
    }
    return path;
}

std::string cmd_singular_orbit(const RunConfig& cfg, std::ostream& out) {
    const Params p = model_params(cfg, false);
    const auto folds = fold_points(p.theta, p.eta);
    const SingularOrbit g = singular_orbit(p.theta, p.eta, folds);
    const auto pts = g.sample(cfg.singular_orbit.points_per_segment);

    ensure_dir(cfg.output.dir);
    const std::string path = join(cfg.output.dir, "singular_orbit.csv");
    auto f = open_out(path);
    f << "# " << config_hash_line(cfg) << '\n';
    f << "u,v,segment\n";
    for (const auto& q : pts) {
        f << format_double(q.u) << ',' << format_double(q.v) << ',' << to_string(q.segment) << '\n';
    }
    close_out(f, path);
    out << "u_l = " << format_double(g.u_l) << '\n';
    out << "u_r = " << format_double(g.u_r) << '\n';
    out << "points = " << pts.size() << '\n';
    return path;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    const RunConfig d;
    CLI::App app{"Canard and relaxation-oscillation analysis of a slow-fast predator-prey model"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<double> delta, theta, eta, epsilon;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--out", out_dir, "output directory")->default_str(d.output.dir);
        sub->add_option("--delta", delta, "model.delta");
        sub->add_option("--theta", theta, "model.theta");
        sub->add_option("--eta", eta, "model.eta");
        sub->add_option("--epsilon", epsilon, "model.epsilon (required, no default)");
    };

    auto* an = app.add_subcommand("analyze", "threshold report (folds, Hopf data, Bautin point)");
    common(an);
    std::optional<double> tstep;
    an->add_option("--transversality-step", tstep, "central-difference step")
        ->default_str(format_double(d.analyze.transversality_step));

    auto* sim = app.add_subcommand("simulate", "integrate one orbit and report detected cycles");
    common(sim);
    std::optional<double> u0, v0, t_end, rtol, atol;
    std::optional<std::string> method;
    std::optional<bool> detect;
    sim->add_option("--u0", u0, "initial u (required)");
    sim->add_option("--v0", v0, "initial v (required)");
    sim->add_option("--t-end", t_end, "final time (required)");
    sim->add_option("--rel-tol", rtol, "relative tolerance")->default_str(format_double(d.simulate.rel_tol));
    sim->add_option("--abs-tol", atol, "absolute tolerance")->default_str(format_double(d.simulate.abs_tol));
    sim->add_option("--method", method, "rkf78 or dopri5")->default_str(d.simulate.method);
    sim->add_option("--detect-cycles", detect, "run the cycle scan")->default_str("true");

    auto* sw = app.add_subcommand("sweep", "bifurcation diagram in delta");
    common(sw);
    std::optional<double> dmin, dmax, step;
    std::optional<int> refine;
    std::optional<bool> reverse, snl;
    sw->add_option("--delta-min", dmin, "lower end of the range (required)");
    sw->add_option("--delta-max", dmax, "upper end, clamped below 1/(1+eta) (required)");
    sw->add_option("--step", step, "grid step (required)");
    sw->add_option("--refine-levels", refine, "extra points step/2^j on each side of each Hopf value")
        ->default_str(std::to_string(d.sweep.refine_levels));
    sw->add_option("--reverse-near-hopf", reverse, "reverse-time search for unstable cycles near Hopf values")
        ->default_str("true");
    sw->add_option("--locate-snl", snl, "search for the saddle-node of cycles below delta_H at fold P")
        ->default_str("false");

    auto* so = app.add_subcommand("singular-orbit", "four-segment singular relaxation loop");
    common(so);
    std::optional<int> pps;
    so->add_option("--points-per-segment", pps, "samples per segment")
        ->default_str(std::to_string(d.singular_orbit.points_per_segment));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (out_dir) cfg.output.dir = *out_dir;
        if (delta) cfg.model.delta = delta;
        if (theta) cfg.model.theta = theta;
        if (eta) cfg.model.eta = eta;
        if (epsilon) cfg.model.epsilon = epsilon;
        if (tstep) cfg.analyze.transversality_step = *tstep;
        if (u0) cfg.simulate.u0 = u0;
        if (v0) cfg.simulate.v0 = v0;
        if (t_end) cfg.simulate.t_end = t_end;
        if (rtol) cfg.simulate.rel_tol = *rtol;
        if (atol) cfg.simulate.abs_tol = *atol;
        if (method) cfg.simulate.method = *method;
        if (detect) cfg.simulate.detect_cycles = *detect;
        if (dmin) cfg.sweep.delta_min = dmin;
        if (dmax) cfg.sweep.delta_max = dmax;
        if (step) cfg.sweep.step = step;
        if (refine) cfg.sweep.refine_levels = *refine;
        if (reverse) cfg.sweep.reverse_near_hopf = *reverse;
        if (snl) cfg.sweep.locate_snl = *snl;
        if (pps) cfg.singular_orbit.points_per_segment = *pps;

        std::string path;
        if (an->parsed()) path = cmd_analyze(cfg, out);
        if (sim->parsed()) path = cmd_simulate(cfg, out);
        if (sw->parsed()) path = cmd_sweep(cfg, out, err);
        if (so->parsed()) path = cmd_singular_orbit(cfg, out);
        out << "wrote " << path << '\n';
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.exit_code();
    }
}

}  // namespace canard::cli

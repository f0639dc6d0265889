#include "canard/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "canard/errors.hpp"
#include "canard/normal_form.hpp"
#include "canard/report.hpp"
#include "numerics.hpp"

namespace canard {

namespace {

std::vector<double> hopf_values(double theta, double eta) {
    std::vector<double> out;
    const auto folds = fold_points(theta, eta);
    if (folds.size() == 2) {
        for (const auto& f : folds) out.push_back(canard_delta(f.u, eta));
    }
    return out;
}

bool duplicate(const std::vector<CycleRecord>& cycles, const CycleRecord& c) {
    for (const auto& o : cycles) {
        if (std::abs(o.u_min - c.u_min) < 1e-6 && std::abs(o.u_max - c.u_max) < 1e-6) return true;
    }
    return false;
}

// Unstable cycle through reverse-time iteration started just outside E*.
std::optional<CycleRecord> reverse_search(const Params& p, const ScanOptions& scan) {
    const Section ray = equilibrium_ray(p);
    PoincareOptions opt;
    opt.controls = scan.controls;
    opt.max_return_time = scan.max_return_time;
    opt.start = ray.lo + 1e-3 * (ray.hi - ray.lo);
    const CycleSearch r = poincare_cycle(p, ray, TimeDirection::reverse, opt);
    if (r.status == CycleStatus::found) return r.cycle;
    return std::nullopt;
}

}  // namespace

DiagramBranch sweep(double lo, double hi, double step, const Params& base, const SweepOptions& opt) {
    if (!(step > 0.0)) throw ValidationError("sweep step must be positive");
    if (!(lo > 0.0) || !(hi > lo)) throw ValidationError("sweep range must satisfy 0 < delta_min < delta_max");
    if (opt.refine_levels < 0) throw ValidationError("refine_levels must be non-negative");
    Params probe = base;
    probe.delta = lo;
    probe.validate();

    DiagramBranch br;
    const double cap = transcritical_threshold(base.eta);
    if (!(lo < cap)) throw ValidationError("sweep range lies beyond the transcritical threshold");
    if (hi >= cap) {
        const double clamped = cap * (1.0 - 1e-9);
        br.warnings.push_back("range upper end " + format_double(hi) + " clamped below the transcritical threshold " +
                              format_double(cap));
        hi = clamped;
    }
    br.meta = {lo, hi, step, base.epsilon, base.theta, base.eta, opt.refine_levels};

    std::vector<double> grid;
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long k = 0; k <= n; ++k) grid.push_back(lo + static_cast<double>(k) * step);
    for (double dh : hopf_values(base.theta, base.eta)) {
        for (int j = 1; j <= opt.refine_levels; ++j) {
            const double off = step * std::ldexp(1.0, -j);
            for (double d : {dh - off, dh + off}) {
                if (d >= lo && d <= hi) grid.push_back(d);
            }
        }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const auto hopf = hopf_values(base.theta, base.eta);
    std::optional<double> seed;
    for (double d : grid) {
        Params p = base;
        p.delta = d;
        DiagramRow row;
        row.delta = d;
        try {
            const auto e = interior_equilibrium(p);
            if (!e) throw ValidationError("no interior equilibrium");
            row.u_eq = e->u;
            row.eq_stability = e->stability;
            row.eq_branch = e->branch;

            ScanOptions scan = opt.scan;
            if (seed) scan.seeds.push_back(*seed);
            std::vector<CycleRecord> cycles = find_cycles(p, scan);

            bool near_hopf = false;
            for (double dh : hopf) near_hopf = near_hopf || std::abs(d - dh) < opt.reverse_window;
            if (opt.reverse_near_hopf && near_hopf && e->stability == Stability::stable_focus_or_node) {
                if (auto c = reverse_search(p, opt.scan); c && !duplicate(cycles, *c)) cycles.push_back(*c);
            }

            seed.reset();
            for (const auto& c : cycles) {
                if (c.stability == CycleStability::stable) seed = c.section_coordinate;
            }
            if (cycles.empty()) {
                br.rows.push_back(row);
            }
            for (const auto& c : cycles) {
                DiagramRow r = row;
                r.u_cycle_min = c.u_min;
                r.u_cycle_max = c.u_max;
                r.cycle_stability = c.stability;
                r.cycle_kind = c.kind;
                br.rows.push_back(r);
            }
        } catch (const Error& err) {
            row.status = std::string("gap: ") + err.what();
            br.rows.push_back(row);
            seed.reset();
        }
    }
    return br;
}

double locate_hopf(const Params& base, std::pair<double, double> bracket) {
    const auto [lo, hi] = bracket;
    const double cap = transcritical_threshold(base.eta);
    if (!(lo > 0.0) || !(hi > lo) || !(hi < cap)) {
        throw ValidationError("Hopf bracket must satisfy 0 < lo < hi < 1/(1+eta)");
    }
    const auto folds = fold_points(base.theta, base.eta);
    const double ulo = interior_u(lo, base.eta);
    const double uhi = interior_u(hi, base.eta);
    const FoldPoint* hit = nullptr;
    int crossings = 0;
    for (const auto& f : folds) {
        if ((ulo - f.u) * (uhi - f.u) < 0.0) {
            ++crossings;
            hit = &f;
        }
    }
    if (crossings != 1) {
        throw NumericalError("Hopf bracket must contain exactly one fold crossing (found " +
                             std::to_string(crossings) + ")");
    }
    const double uf = hit->u;
    auto g = [&](double d) { return interior_u(d, base.eta) - uf; };
    return detail::bracketed_root(g, lo, hi, "Hopf location", 1e-13);
}

std::string to_string(SnlResult::Verdict v) {
    return v == SnlResult::Verdict::located ? "located" : "below-resolution";
}

int count_cycles(const Params& p, const ScanOptions& scan) {
    std::vector<CycleRecord> cycles = find_cycles(p, scan);
    const auto e = interior_equilibrium(p);
    if (e && e->stability == Stability::stable_focus_or_node) {
        if (auto c = reverse_search(p, scan); c && !duplicate(cycles, *c)) cycles.push_back(*c);
    }
    return static_cast<int>(cycles.size());
}

SnlResult locate_snl(const Params& base, double theta, std::pair<double, double> bracket, double epsilon,
                     const SnlOptions& opt) {
    Params p = base;
    p.theta = theta;
    p.epsilon = epsilon;
    const auto folds = fold_points(theta, p.eta);
    if (folds.size() != 2) {
        throw ValidationError("locate_snl needs two folds");
    }
    const double dh = canard_delta(folds[0].u, p.eta);
    const CanardExpansion e = taylor_coefficients(folds[0], theta, p.eta, dh);
    const double A = criticality_constant(e);
    if (!(A > 0.0)) {
        throw ValidationError("locate_snl requires the subcritical side (A > 0 at fold P)");
    }
    const auto [lo, hi] = bracket;
    if (!(lo < hi) || hi > dh || !(lo > 0.0)) {
        throw ValidationError("SNL bracket must satisfy 0 < lo < hi <= delta_H");
    }

    SnlResult res;
    res.delta_H = dh;
    auto count = [&](double d) {
        Params q = p;
        q.delta = d;
        ++res.evaluations;
        return count_cycles(q, opt.scan);
    };

    // A parameter with two cycles: hi first, then points approaching delta_H
    // geometrically when the bracket reaches delta_H.
    std::optional<double> two;
    if (hi < dh) {
        if (count(hi) >= 2) two = hi;
    } else {
        for (double off = 0.1 * (dh - lo); off >= opt.min_offset; off *= 0.1) {
            if (count(dh - off) >= 2) {
                two = dh - off;
                break;
            }
        }
    }
    if (!two) {
        res.verdict = SnlResult::Verdict::below_resolution;
        return res;
    }
    double a = lo;
    double b = *two;
    if (a == b || count(a) >= 2) {
        throw NumericalError("two cycles persist at the lower end of the SNL bracket");
    }
    while (b - a > opt.bisection_tolerance) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        if (count(mid) >= 2) {
            b = mid;
        } else {
            a = mid;
        }
    }
    res.verdict = SnlResult::Verdict::located;
    res.delta_snl = 0.5 * (a + b);
    return res;
}

ThresholdSummary summarize_thresholds(double theta, double eta, double epsilon) {
    ThresholdSummary s;
    const auto folds = fold_points(theta, eta);
    if (folds.size() != 2) return s;
    for (const auto& f : folds) {
        const double dh = canard_delta(f.u, eta);
        if (f.degenerate) continue;
        const CanardExpansion e = taylor_coefficients(f, theta, eta, dh);
        if (f.kind == FoldKind::local_min) {
            s.delta_H_P = dh;
            s.A_P = criticality_constant(e);
            s.theta_B = theta_bautin(f.u, eta, dh);
            s.B = second_lyapunov(expansion_at(f.u, *s.theta_B, eta, dh), epsilon).B;
        } else {
            s.delta_H_Q = dh;
            s.A_Q = criticality_constant(e);
        }
    }
    return s;
}

namespace {

std::string opt_num(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

template <class E>
std::string opt_enum(const std::optional<E>& v) {
    return v ? to_string(*v) : std::string();
}

Stability parse_stability(const std::string& s) {
    for (Stability x : {Stability::attracting_saddle_node, Stability::stable_node, Stability::saddle,
                        Stability::stable_focus_or_node, Stability::unstable, Stability::undetermined_on_fold}) {
        if (to_string(x) == s) return x;
    }
    throw ValidationError("unknown stability tag: " + s);
}

std::optional<Branch> parse_branch(const std::string& s) {
    if (s.empty()) return std::nullopt;
    for (Branch b : {Branch::left, Branch::middle, Branch::right, Branch::fold}) {
        if (to_string(b) == s) return b;
    }
    throw ValidationError("unknown branch tag: " + s);
}

std::optional<CycleStability> parse_cycle_stability(const std::string& s) {
    if (s.empty()) return std::nullopt;
    for (CycleStability c : {CycleStability::stable, CycleStability::unstable}) {
        if (to_string(c) == s) return c;
    }
    throw ValidationError("unknown cycle stability: " + s);
}

std::optional<CycleKind> parse_kind(const std::string& s) {
    if (s.empty()) return std::nullopt;
    for (CycleKind k : {CycleKind::small_canard, CycleKind::canard, CycleKind::relaxation}) {
        if (to_string(k) == s) return k;
    }
    throw ValidationError("unknown cycle kind: " + s);
}

std::optional<double> parse_opt_num(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

constexpr const char* kHeader = "delta,u_eq,eq_stability,eq_branch,u_cycle_min,u_cycle_max,cycle_stability,cycle_kind,status";

std::string sanitize(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

}  // namespace

void write_diagram_csv(std::ostream& out, const DiagramBranch& br) {
    out << kHeader << '\n';
    for (const auto& r : br.rows) {
        out << format_double(r.delta) << ',' << format_double(r.u_eq) << ',' << to_string(r.eq_stability) << ','
            << opt_enum(r.eq_branch) << ',' << opt_num(r.u_cycle_min) << ',' << opt_num(r.u_cycle_max) << ','
            << opt_enum(r.cycle_stability) << ',' << opt_enum(r.cycle_kind) << ',' << sanitize(r.status) << '\n';
    }
}

std::vector<DiagramRow> read_diagram_csv(std::istream& in) {
    std::vector<DiagramRow> rows;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != kHeader) throw ValidationError("unexpected diagram header: " + line);
            header = true;
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != 9) throw ValidationError("malformed diagram row: " + line);
        DiagramRow r;
        r.delta = std::stod(f[0]);
        r.u_eq = std::stod(f[1]);
        r.eq_stability = parse_stability(f[2]);
        r.eq_branch = parse_branch(f[3]);
        r.u_cycle_min = parse_opt_num(f[4]);
        r.u_cycle_max = parse_opt_num(f[5]);
        r.cycle_stability = parse_cycle_stability(f[6]);
        r.cycle_kind = parse_kind(f[7]);
        r.status = f[8];
        rows.push_back(r);
    }
    if (!header) throw ValidationError("diagram file has no header");
    return rows;
}

void export_diagram(const DiagramBranch& br, const std::string& path, const ThresholdSummary& s,
                    const std::vector<std::string>& header_lines) {
    if (br.rows.empty()) {
        throw ValidationError("cannot export an empty diagram branch");
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    for (const auto& h : header_lines) out << "# " << h << '\n';
    write_diagram_csv(out, br);
    out.close();
    if (!out) throw IoError("write failed for " + path);

    Report meta;
    meta.add("delta_min", br.meta.delta_min);
    meta.add("delta_max", br.meta.delta_max);
    meta.add("step", br.meta.step);
    meta.add("epsilon", br.meta.epsilon);
    meta.add("theta", br.meta.theta);
    meta.add("eta", br.meta.eta);
    meta.add("refine_levels", br.meta.refine_levels);
    meta.add("rows", static_cast<int>(br.rows.size()));
    meta.add("delta_H_P", opt_num(s.delta_H_P));
    meta.add("delta_H_Q", opt_num(s.delta_H_Q));
    meta.add("A_P", opt_num(s.A_P));
    meta.add("A_Q", opt_num(s.A_Q));
    meta.add("theta_B", opt_num(s.theta_B));
    meta.add("B", opt_num(s.B));
    if (s.snl) {
        meta.add("delta_SNL", s.snl->delta_snl ? format_double(*s.snl->delta_snl) : to_string(s.snl->verdict));
    } else {
        meta.add("delta_SNL", "not-computed");
    }
    const std::string mpath = path + ".meta";
    std::ofstream mo(mpath);
    if (!mo) throw IoError("cannot open " + mpath + " for writing");
    for (const auto& h : header_lines) mo << "# " << h << '\n';
    meta.write(mo);
    mo.close();
    if (!mo) throw IoError("write failed for " + mpath);
}

DiagramBranch import_diagram(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    DiagramBranch br;
    br.rows = read_diagram_csv(in);
    std::ifstream mi(path + ".meta");
    if (mi) {
        const Report m = Report::parse(mi);
        br.meta.delta_min = m.get_double("delta_min");
        br.meta.delta_max = m.get_double("delta_max");
        br.meta.step = m.get_double("step");
        br.meta.epsilon = m.get_double("epsilon");
        br.meta.theta = m.get_double("theta");
        br.meta.eta = m.get_double("eta");
        br.meta.refine_levels = static_cast<int>(m.get_double("refine_levels"));
    }
    return br;
}

}  // namespace canard

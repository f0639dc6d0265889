#include "canard/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "canard/errors.hpp"
#include "canard/model.hpp"
#include "numerics.hpp"

namespace odeint = boost::numeric::odeint;

namespace canard {

std::string to_string(Method m) {
    return m == Method::dopri5 ? "dopri5" : "rkf78";
}

Method parse_method(const std::string& name) {
    if (name == "dopri5") return Method::dopri5;
    if (name == "rkf78") return Method::rkf78;
    throw ValidationError("unknown integration method '" + name + "' (expected dopri5 or rkf78)");
}

std::string to_string(CycleStability s) {
    return s == CycleStability::stable ? "stable" : "unstable";
}

std::string to_string(CycleKind k) {
    switch (k) {
        case CycleKind::small_canard: return "small-canard";
        case CycleKind::canard: return "canard";
        case CycleKind::relaxation: return "relaxation";
    }
    return "?";
}

Box boundedness_box(const Params& p, State x0) {
    // u cannot grow past max(u0, 1) because f < 0 for u > 1. For
    // W = u + v/eps one has W' + eps*delta*eta*W <= p(u) + eps*delta*eta*u,
    // and p(u) <= (1+theta)(1+eta)/4 on [0, 1].
    const double u_bound = std::max(x0.u, 1.0);
    const double dh = p.delta * p.eta;
    const double m = (1.0 + p.theta) * (1.0 + p.eta) / 4.0 + p.epsilon * dh * u_bound;
    const double v_bound = std::max(x0.v + p.epsilon * x0.u, m / dh);
    const double slack = 1.0 + 1e-6;
    return {u_bound * slack + 1e-12, v_bound * slack + 1e-12};
}

// ---------------------------------------------------------------------------
// Stepping engine

namespace {

using Vec = std::array<double, 2>;

struct Rhs {
    Params p;
    double sign;
    void operator()(const Vec& x, Vec& dx, double) const {
        const State f = vector_field({x[0], x[1]}, p);
        dx[0] = sign * f.u;
        dx[1] = sign * f.v;
    }
};

}  // namespace

struct StepEngine::Impl {
    virtual ~Impl() = default;
    virtual void reset() = 0;
    virtual bool try_step(State& x, double& t, double& dt) = 0;
    virtual State single_step(State x0, double t0, double h) const = 0;
};

namespace {

class DopriImpl final : public StepEngine::Impl {
public:
    using Stepper = odeint::runge_kutta_dopri5<Vec>;
    using Controlled = odeint::controlled_runge_kutta<Stepper>;

    DopriImpl(const Params& p, double sign, const IntegratorControls& c)
        : rhs_{p, sign}, controls_(c), ctrl_(make()) {}

    void reset() override { ctrl_ = make(); }

    bool try_step(State& x, double& t, double& dt) override {
        Vec v{x.u, x.v};
        if (ctrl_.try_step(rhs_, v, t, dt) == odeint::success) {
            x = {v[0], v[1]};
            return true;
        }
        return false;
    }

    State single_step(State x0, double t0, double h) const override {
        Vec v{x0.u, x0.v};
        plain_.do_step(rhs_, v, t0, h);
        return {v[0], v[1]};
    }

private:
    Controlled make() const {
        return odeint::make_controlled(controls_.abs_tol, controls_.rel_tol, controls_.max_step, Stepper());
    }

    Rhs rhs_;
    IntegratorControls controls_;
    Controlled ctrl_;
    mutable Stepper plain_;
};

class Rkf78Impl final : public StepEngine::Impl {
public:
    using Stepper = odeint::runge_kutta_fehlberg78<Vec>;
    using Controlled = odeint::controlled_runge_kutta<Stepper>;

    Rkf78Impl(const Params& p, double sign, const IntegratorControls& c)
        : rhs_{p, sign}, controls_(c), ctrl_(make()) {}

    void reset() override { ctrl_ = make(); }

    bool try_step(State& x, double& t, double& dt) override {
        Vec v{x.u, x.v};
        if (ctrl_.try_step(rhs_, v, t, dt) == odeint::success) {
            x = {v[0], v[1]};
            return true;
        }
        return false;
    }

    State single_step(State x0, double t0, double h) const override {
        Vec v{x0.u, x0.v};
        plain_.do_step(rhs_, v, t0, h);
        return {v[0], v[1]};
    }

private:
    Controlled make() const {
        return odeint::make_controlled(controls_.abs_tol, controls_.rel_tol, controls_.max_step, Stepper());
    }

    Rhs rhs_;
    IntegratorControls controls_;
    Controlled ctrl_;
    mutable Stepper plain_;
};

std::string where(double t, State x) {
    std::ostringstream s;
    s.precision(12);
    s << "t = " << t << ", (u, v) = (" << x.u << ", " << x.v << ")";
    return s.str();
}

}  // namespace

StepEngine::StepEngine(const Params& params, TimeDirection direction, const IntegratorControls& controls)
    : direction_(direction) {
    params.validate();
    if (!(controls.rel_tol > 0.0) || !(controls.abs_tol > 0.0)) {
        throw ValidationError("integrator tolerances must be positive");
    }
    if (!(controls.initial_step > 0.0) || controls.max_step < 0.0 || !(controls.min_step > 0.0)) {
        throw ValidationError("integrator step controls must be positive");
    }
    const double sign = direction == TimeDirection::forward ? 1.0 : -1.0;
    if (controls.method == Method::dopri5) {
        impl_ = std::make_unique<DopriImpl>(params, sign, controls);
    } else {
        impl_ = std::make_unique<Rkf78Impl>(params, sign, controls);
    }
    params_ = params;
    controls_ = controls;
}

StepEngine::~StepEngine() = default;

State StepEngine::field(State s) const {
    const State f = vector_field(s, params_);
    const double sign = direction_ == TimeDirection::forward ? 1.0 : -1.0;
    return {sign * f.u, sign * f.v};
}

State StepEngine::state_at(const StepInfo& step, double t) const {
    if (t <= step.t0) return step.x0;
    if (t >= step.t1) return step.x1;
    return impl_->single_step(step.x0, step.t0, t - step.t0);
}

RunStatus StepEngine::run(State start, double t_end, const std::function<bool(const StepInfo&)>& observer) {
    if (!(start.u >= 0.0) || !(start.v >= 0.0) || !std::isfinite(start.u) || !std::isfinite(start.v)) {
        throw ValidationError("initial state must be non-negative and finite");
    }
    if (!(t_end > 0.0)) {
        throw ValidationError("integration end time must be positive");
    }
    impl_->reset();
    stats_ = IntegratorStats{};
    const bool forward = direction_ == TimeDirection::forward;
    const Box box = boundedness_box(params_, start);
    const Box escape{10.0 * box.u_max, 10.0 * box.v_max};
    const bool u_pos = start.u > 0.0;
    const bool v_pos = start.v > 0.0;

    State x = start;
    double t = 0.0;
    double dt = std::min(controls_.initial_step, t_end);
    while (t_end - t > 1e-14 * std::max(1.0, t_end)) {
        if (stats_.steps + stats_.rejections >= controls_.max_steps) {
            throw NumericalError("integrator exceeded the step budget at " + where(t, x));
        }
        const bool clipped = dt >= t_end - t;
        if (clipped) dt = t_end - t;
        const State x0 = x;
        const double t0 = t;
        if (!impl_->try_step(x, t, dt)) {
            ++stats_.rejections;
            if (dt < controls_.min_step) {
                throw NumericalError("step-size underflow at " + where(t, x));
            }
            continue;
        }
        ++stats_.steps;
        if (!clipped) stats_.min_step = std::min(stats_.min_step, t - t0);
        if (!std::isfinite(x.u) || !std::isfinite(x.v)) {
            throw NumericalError("non-finite state at " + where(t, x));
        }
        if (forward) {
            if (controls_.check_invariants) {
                const bool pos_ok = (u_pos ? x.u > 0.0 : x.u >= 0.0) && (v_pos ? x.v > 0.0 : x.v >= 0.0);
                if (!pos_ok) {
                    throw NumericalError("positivity invariant violated (model or tolerance bug) at " + where(t, x));
                }
                if (x.u > box.u_max || x.v > box.v_max) {
                    throw NumericalError("boundedness invariant violated (model or tolerance bug) at " + where(t, x));
                }
            }
        } else if (x.u <= 0.0 || x.v <= 0.0 || x.u > escape.u_max || x.v > escape.v_max) {
            return RunStatus::escaped;
        }
        if (!observer(StepInfo{t0, x0, t, x})) return RunStatus::stopped;
    }
    return RunStatus::completed;
}

Orbit integrate(const Params& params, State initial, double t_end, const IntegratorControls& controls) {
    if (!(initial.u >= 0.0) || !(initial.v >= 0.0)) {
        throw ValidationError("initial state must be non-negative");
    }
    StepEngine engine(params, TimeDirection::forward, controls);
    Orbit orbit;
    orbit.params = params;
    orbit.samples.push_back({0.0, initial.u, initial.v});
    engine.run(initial, t_end, [&](const StepInfo& s) {
        orbit.samples.push_back({s.t1, s.x1.u, s.x1.v});
        return true;
    });
    orbit.meta = engine.stats();
    return orbit;
}

void write_orbit_csv(std::ostream& out, const Orbit& orbit) {
    out << "t,u,v\n";
    out.precision(17);
    for (const Sample& s : orbit.samples) {
        out << s.t << ',' << s.u << ',' << s.v << '\n';
    }
}

// ---------------------------------------------------------------------------
// Return map

State Section::point(double s) const {
    return fixed == Fixed::v ? State{s, level} : State{level, s};
}

double Section::coordinate(State x) const {
    return fixed == Fixed::v ? x.u : x.v;
}

void Extrema::include(State x) {
    u_min = std::min(u_min, x.u);
    u_max = std::max(u_max, x.u);
    v_min = std::min(v_min, x.v);
    v_max = std::max(v_max, x.v);
}

namespace {

double fixed_value(const Section& sec, State x) {
    return sec.fixed == Section::Fixed::v ? x.v : x.u;
}

// Add extrema of u and v reached inside [t_lo, t_hi] of a step.
void refine_extrema(const StepEngine& eng, const StepInfo& step, double t_lo, double t_hi, Extrema& ext) {
    const State a = eng.state_at(step, t_lo);
    const State b = eng.state_at(step, t_hi);
    const State fa = eng.field(a);
    const State fb = eng.field(b);
    for (int comp = 0; comp < 2; ++comp) {
        const double da = comp == 0 ? fa.u : fa.v;
        const double db = comp == 0 ? fb.u : fb.v;
        if (da == 0.0 || db == 0.0 || (da > 0.0) == (db > 0.0)) continue;
        auto deriv = [&](double t) {
            const State f = eng.field(eng.state_at(step, t));
            return comp == 0 ? f.u : f.v;
        };
        const double tr = detail::bracketed_root(deriv, t_lo, t_hi, "extremum", 1e-13 * std::max(1.0, t_hi));
        ext.include(eng.state_at(step, tr));
    }
    ext.include(b);
}

double default_return_time(const Params& p, double requested) {
    return requested > 0.0 ? requested : 200.0 / p.epsilon;
}

}  // namespace

ReturnResult return_map(const Params& params, const Section& sec, double s, TimeDirection direction,
                        double max_time, const IntegratorControls& controls, bool record_path) {
    StepEngine engine(params, direction, controls);
    const int eff = direction == TimeDirection::forward ? sec.crossing : -sec.crossing;
    ReturnResult res;
    const State start = sec.point(s);
    res.extrema.include(start);
    if (record_path) res.path.push_back(start);

    const RunStatus st = engine.run(start, max_time, [&](const StepInfo& step) {
        const double c0 = fixed_value(sec, step.x0) - sec.level;
        const double c1 = fixed_value(sec, step.x1) - sec.level;
        const bool crossed = eff > 0 ? (c0 < 0.0 && c1 >= 0.0) : (c0 > 0.0 && c1 <= 0.0);
        if (!crossed) {
            refine_extrema(engine, step, step.t0, step.t1, res.extrema);
            if (record_path) res.path.push_back(step.x1);
            return true;
        }
        auto g = [&](double t) { return fixed_value(sec, engine.state_at(step, t)) - sec.level; };
        const double tc = detail::bracketed_root(g, step.t0, step.t1, "section crossing",
                                                 1e-14 * std::max(1.0, step.t1));
        State hit = engine.state_at(step, tc);
        if (sec.fixed == Section::Fixed::v) {
            hit.v = sec.level;
        } else {
            hit.u = sec.level;
        }
        refine_extrema(engine, step, step.t0, tc, res.extrema);
        res.extrema.include(hit);
        if (record_path) res.path.push_back(hit);
        res.s = sec.coordinate(hit);
        res.time = tc;
        res.status = (res.s >= sec.lo && res.s <= sec.hi) ? ReturnStatus::hit : ReturnStatus::section_miss;
        return false;
    });
    if (st == RunStatus::escaped) {
        res.status = ReturnStatus::escaped;
    } else if (st == RunStatus::completed) {
        res.status = ReturnStatus::no_return;
    }
    return res;
}

Section relaxation_section(const SingularOrbit& g0) {
    Section s;
    s.fixed = Section::Fixed::u;
    s.level = 0.5 * (g0.u_l + g0.p.u);
    s.lo = 0.0;
    s.hi = std::numeric_limits<double>::infinity();
    s.crossing = +1;
    return s;
}

Section equilibrium_ray(const Params& params) {
    const auto e = interior_equilibrium(params);
    if (!e) {
        throw ValidationError("equilibrium ray needs an interior equilibrium");
    }
    Section s;
    s.fixed = Section::Fixed::v;
    s.level = e->v;
    s.lo = e->u;
    s.hi = 1.0;
    s.crossing = +1;
    return s;
}

CycleRecord record_cycle(const Params& params, const Section& sec, double s, CycleStability stability,
                         double max_return_time, const IntegratorControls& controls) {
    const ReturnResult r = return_map(params, sec, s, TimeDirection::forward,
                                      default_return_time(params, max_return_time), controls, true);
    if (r.status != ReturnStatus::hit) {
        throw NumericalError("cycle revolution did not return to its section");
    }
    CycleRecord c;
    c.period = r.time;
    c.u_min = r.extrema.u_min;
    c.u_max = r.extrema.u_max;
    c.v_min = r.extrema.v_min;
    c.v_max = r.extrema.v_max;
    c.stability = stability;
    c.section = sec;
    c.section_coordinate = s;
    c.path = r.path;
    const auto folds = fold_points(params.theta, params.eta);
    c.kind = classify_cycle(c, folds, params.epsilon);
    return c;
}

CycleSearch poincare_cycle(const Params& params, const Section& sec, TimeDirection direction,
                           const PoincareOptions& opt) {
    if (opt.max_iterations <= 0 || !(opt.tolerance > 0.0) || !(opt.max_transient > 0.0)) {
        throw ValidationError("Poincare options must be positive");
    }
    const double max_return = default_return_time(params, opt.max_return_time);
    const double span_hi = std::isfinite(sec.hi) ? sec.hi : sec.lo + 1.0;
    double s = opt.start ? *opt.start : 0.5 * (sec.lo + span_hi);
    const double collapse = 1e-9 * std::max(1.0, span_hi - sec.lo);

    CycleSearch out;
    out.iterates.push_back(s);
    double budget = opt.max_transient;
    std::vector<double> hist{s};
    for (int k = 0; k < opt.max_iterations; ++k) {
        const ReturnResult r = return_map(params, sec, s, direction, std::min(max_return, budget), opt.controls);
        if (r.status == ReturnStatus::section_miss) {
            out.status = CycleStatus::section_miss;
            out.detail = "orbit crossed the section line outside its admissible range";
            return out;
        }
        if (r.status != ReturnStatus::hit) {
            out.status = CycleStatus::no_cycle;
            out.detail = r.status == ReturnStatus::escaped ? "orbit escaped" : "no return within the time budget";
            return out;
        }
        budget -= r.time;
        const double next = r.s;
        out.iterates.push_back(next);
        if (std::abs(next - s) < opt.tolerance) {
            CycleRecord c = record_cycle(params, sec, next,
                                         direction == TimeDirection::forward ? CycleStability::stable
                                                                             : CycleStability::unstable,
                                         max_return, opt.controls);
            c.iterations = k + 1;
            out.status = CycleStatus::found;
            out.cycle = std::move(c);
            return out;
        }
        if (next - sec.lo < collapse) {
            out.status = CycleStatus::no_cycle;
            out.detail = "iterates collapse onto the section boundary (equilibrium)";
            return out;
        }
        if (budget <= 0.0) {
            out.status = CycleStatus::no_cycle;
            out.detail = "transient exceeds max_transient";
            return out;
        }
        hist.push_back(next);
        s = next;
        if (opt.accelerate && hist.size() >= 3) {
            const double s0 = hist[hist.size() - 3];
            const double s1 = hist[hist.size() - 2];
            const double s2 = hist[hist.size() - 1];
            const double d1 = s1 - s0;
            const double d2 = s2 - s1;
            const double denom = d2 - d1;
            if (d1 != 0.0 && denom != 0.0) {
                const double ratio = d2 / d1;
                const double cand = s2 - d2 * d2 / denom;
                if (ratio > 0.0 && ratio < 0.99 && cand > sec.lo && cand < sec.hi) {
                    s = cand;
                    hist.assign(1, s);
                }
            }
        }
    }
    out.status = CycleStatus::no_cycle;
    out.detail = "return map did not converge within the iteration limit";
    return out;
}

// ---------------------------------------------------------------------------
// Displacement scan on the equilibrium ray

std::vector<CycleRecord> find_cycles(const Params& params, const ScanOptions& opt) {
    if (opt.probes < 2 || !(opt.rho_min > 0.0) || !(opt.tolerance > 0.0)) {
        throw ValidationError("scan options must be positive (at least two probes)");
    }
    const Section ray = equilibrium_ray(params);
    const double max_return = default_return_time(params, opt.max_return_time);
    const double u_star = ray.lo;
    const double span = ray.hi - u_star;
    if (!(span > 0.0)) return {};

    IntegratorControls fine = opt.controls;
    fine.rel_tol *= 1e-2;
    fine.abs_tol *= 1e-2;
    auto displacement_with = [&](double s, const IntegratorControls& c) {
        const ReturnResult r = return_map(params, ray, s, TimeDirection::forward, max_return, c);
        if (r.status == ReturnStatus::hit) return r.s - s;
        // No rotation back to the ray: the orbit is absorbed near E*.
        return -(s - u_star);
    };
    auto displacement = [&](double s) { return displacement_with(s, fine); };
    // Sign of the displacement certified against the integration error,
    // estimated from two tolerance levels; 0 when it cannot be resolved.
    auto certified = [&](double s) {
        const double a = displacement_with(s, opt.controls);
        const double b = displacement(s);
        if ((a > 0.0) != (b > 0.0) || std::abs(b) <= 10.0 * std::abs(a - b)) return 0.0;
        return b;
    };

    std::vector<double> probes;
    const double rho_max = 0.999 * span;
    const double rho_min = std::min(opt.rho_min * std::max(1.0, span), 0.5 * rho_max);
    for (int i = 0; i < opt.probes; ++i) {
        const double f = static_cast<double>(i) / (opt.probes - 1);
        probes.push_back(u_star + rho_min * std::pow(rho_max / rho_min, f));
    }
    for (double sd : opt.seeds) {
        if (sd > u_star && sd < ray.hi) probes.push_back(sd);
    }
    std::sort(probes.begin(), probes.end());
    probes.erase(std::unique(probes.begin(), probes.end()), probes.end());

    std::vector<double> d;
    d.reserve(probes.size());
    for (double s : probes) d.push_back(certified(s));

    // An unstable equilibrium is surrounded by an attracting cycle; if the
    // innermost probe already lies outside it, look closer to E*.
    const Jacobian j = jacobian({u_star, ray.level}, params);
    if (j.a + j.d > 0.0) {
        double rho = probes.front() - u_star;
        while (d.front() < 0.0 && rho > 1e-12) {
            rho *= 0.1;
            probes.insert(probes.begin(), u_star + rho);
            d.insert(d.begin(), certified(u_star + rho));
        }
    }

    // Drop probes whose displacement sign is below the noise floor.
    std::vector<double> ps, ds;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        if (d[i] != 0.0) {
            ps.push_back(probes[i]);
            ds.push_back(d[i]);
        }
    }

    std::vector<CycleRecord> cycles;
    for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
        if ((ds[i] > 0.0) == (ds[i + 1] > 0.0)) continue;
        const double root =
            detail::bracketed_root(displacement, ps[i], ps[i + 1], "cycle displacement", opt.tolerance);
        const double residual = std::abs(displacement(root));
        if (residual > std::max(1e-7, 100.0 * opt.tolerance)) {
            continue;  // a jump of the displacement, not a fixed point
        }
        const CycleStability stab = ds[i] > 0.0 ? CycleStability::stable : CycleStability::unstable;
        cycles.push_back(record_cycle(params, ray, root, stab, max_return, fine));
    }
    return cycles;
}

// ---------------------------------------------------------------------------
// Geometry of cycles

namespace {

double point_segment(State p, State a, State b) {
    const double dx = b.u - a.u, dy = b.v - a.v;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) {
        t = std::clamp(((p.u - a.u) * dx + (p.v - a.v) * dy) / len2, 0.0, 1.0);
    }
    const double ex = a.u + t * dx - p.u, ey = a.v + t * dy - p.v;
    return std::sqrt(ex * ex + ey * ey);
}

double directed(const std::vector<State>& a, const std::vector<State>& b) {
    double worst = 0.0;
    for (const State& p : a) {
        double best = std::numeric_limits<double>::infinity();
        if (b.size() == 1) {
            best = std::hypot(p.u - b[0].u, p.v - b[0].v);
        }
        for (std::size_t i = 0; i + 1 < b.size(); ++i) {
            best = std::min(best, point_segment(p, b[i], b[i + 1]));
            if (best == 0.0) break;
        }
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace

double hausdorff_distance(const std::vector<State>& a, const std::vector<State>& b) {
    if (a.empty() || b.empty()) {
        throw ValidationError("Hausdorff distance needs non-empty sample sets");
    }
    return std::max(directed(a, b), directed(b, a));
}

double cycle_vs_singular(const std::vector<State>& cycle, const SingularOrbit& gamma0, int points_per_segment) {
    std::vector<State> g;
    for (const TaggedPoint& p : gamma0.sample(points_per_segment)) g.push_back({p.u, p.v});
    return hausdorff_distance(cycle, g);
}

CycleKind classify_cycle(const CycleRecord& c, const std::vector<FoldPoint>& folds, double epsilon,
                         double amplitude_constant) {
    if (c.u_max - c.u_min < amplitude_constant * std::sqrt(epsilon)) return CycleKind::small_canard;
    if (folds.size() == 2 && c.u_max > folds[1].u && c.u_min < folds[0].u) return CycleKind::relaxation;
    return CycleKind::canard;
}

void write_cycle_record(std::ostream& out, const CycleRecord& c) {
    out.precision(17);
    out << "period = " << c.period << '\n'
        << "u_min = " << c.u_min << '\n'
        << "u_max = " << c.u_max << '\n'
        << "v_min = " << c.v_min << '\n'
        << "v_max = " << c.v_max << '\n'
        << "stability = " << to_string(c.stability) << '\n'
        << "kind = " << to_string(c.kind) << '\n';
    if (c.hausdorff_to_singular) {
        out << "hausdorff_to_singular = " << *c.hausdorff_to_singular << '\n';
    }
}

}  // namespace canard

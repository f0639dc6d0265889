#include "canard/model.hpp"

#include <cmath>

#include "canard/errors.hpp"

namespace canard {

namespace {

// Prey growth term u(1-u)(u+theta)(u^2+eta) expanded in powers of u.
double growth(double u, double theta, double eta) {
    return u * (1.0 - u) * (u + theta) * (u * u + eta);
}

double growth_derivative(double u, double theta, double eta) {
    const double u2 = u * u;
    return -5.0 * u2 * u2 + 4.0 * (1.0 - theta) * u2 * u + 3.0 * (theta - eta) * u2 +
           2.0 * (1.0 - theta) * eta * u + theta * eta;
}

bool near_threshold(double delta, double eta) {
    const double t = transcritical_threshold(eta);
    return std::abs(delta - t) <= 1e-12 * t;
}

}  // namespace

std::string to_string(EquilibriumKind k) {
    switch (k) {
        case EquilibriumKind::origin: return "E0";
        case EquilibriumKind::boundary: return "E1";
        case EquilibriumKind::interior: return "E*";
    }
    return "?";
}

std::string to_string(Stability s) {
    switch (s) {
        case Stability::attracting_saddle_node: return "attracting-saddle-node";
        case Stability::stable_node: return "stable-node";
        case Stability::saddle: return "saddle";
        case Stability::stable_focus_or_node: return "stable";
        case Stability::unstable: return "unstable";
        case Stability::undetermined_on_fold: return "undetermined-on-fold";
    }
    return "?";
}

State vector_field(State s, const Params& p) {
    const double u2 = s.u * s.u;
    const double f = growth(s.u, p.theta, p.eta) - u2 * s.v;
    const double g = u2 * s.v - p.delta * s.v * (u2 + p.eta);
    return {f, p.epsilon * g};
}

Jacobian jacobian(State s, const Params& p) {
    const double u = s.u;
    const double v = s.v;
    Jacobian j;
    j.a = growth_derivative(u, p.theta, p.eta) - 2.0 * u * v;
    j.b = -u * u;
    j.c = p.epsilon * 2.0 * u * v * (1.0 - p.delta);
    j.d = p.epsilon * (u * u - p.delta * (u * u + p.eta));
    return j;
}

Params nondimensionalize(const DimensionalParams& dp, double epsilon) {
    dp.validate();
    Params out;
    out.delta = dp.d / dp.p;
    out.theta = dp.m / dp.K;
    out.eta = dp.c / (dp.K * dp.K);
    out.epsilon = epsilon;
    out.validate();
    return out;
}

double transcritical_threshold(double eta) {
    if (!(eta >= 0.0)) {
        throw ValidationError("eta must be non-negative");
    }
    return 1.0 / (1.0 + eta);
}

double interior_u(double delta, double eta) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw ValidationError("interior equilibrium requires 0 < delta < 1");
    }
    return std::sqrt(delta * eta / (1.0 - delta));
}

double delta_for_equilibrium_at(double u, double eta) {
    return u * u / (u * u + eta);
}

std::optional<Equilibrium> interior_equilibrium(const Params& p) {
    const double threshold = transcritical_threshold(p.eta);
    if (!(p.delta < threshold) || near_threshold(p.delta, p.eta)) {
        return std::nullopt;
    }
    Equilibrium e;
    e.kind = EquilibriumKind::interior;
    e.u = interior_u(p.delta, p.eta);
    e.v = phi(e.u, p.theta, p.eta);

    const auto folds = fold_points(p.theta, p.eta);
    bool on_fold = false;
    for (const auto& f : folds) {
        if (std::abs(e.u - f.u) < 1e-9) {
            on_fold = true;
        }
    }
    if (folds.size() == 2) {
        e.branch = branch_of(e.u, folds);
    } else if (on_fold) {
        e.branch = Branch::fold;
    }

    if (on_fold) {
        e.stability = Stability::undetermined_on_fold;
    } else {
        const Jacobian j = jacobian({e.u, e.v}, p);
        const double trace = j.a + j.d;
        if (trace < 0.0) {
            e.stability = Stability::stable_focus_or_node;
        } else if (trace > 0.0) {
            e.stability = Stability::unstable;
        } else {
            e.stability = Stability::undetermined_on_fold;
        }
    }
    return e;
}

std::vector<Equilibrium> equilibria(const Params& p) {
    p.validate();
    std::vector<Equilibrium> out;
    out.push_back({EquilibriumKind::origin, 0.0, 0.0, Stability::attracting_saddle_node, std::nullopt});

    Stability e1 = Stability::saddle;
    if (near_threshold(p.delta, p.eta)) {
        e1 = Stability::attracting_saddle_node;
    } else if (p.delta > transcritical_threshold(p.eta)) {
        e1 = Stability::stable_node;
    }
    out.push_back({EquilibriumKind::boundary, 1.0, 0.0, e1, std::nullopt});

    if (auto e = interior_equilibrium(p)) {
        out.push_back(*e);
    }
    return out;
}

}  // namespace canard

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "canard/manifold.hpp"
#include "canard/params.hpp"

namespace canard {

enum class EquilibriumKind { origin, boundary, interior };

enum class Stability {
    attracting_saddle_node,
    stable_node,
    saddle,
    stable_focus_or_node,
    unstable,
    undetermined_on_fold
};

std::string to_string(EquilibriumKind k);
std::string to_string(Stability s);

struct Equilibrium {
    EquilibriumKind kind;
    double u = 0.0;
    double v = 0.0;
    Stability stability;
    std::optional<Branch> branch;
};

struct Jacobian {
    double a = 0.0, b = 0.0;  // row 1
    double c = 0.0, d = 0.0;  // row 2
};

// Right-hand side of the time-rescaled polynomial system.
State vector_field(State s, const Params& params);
Jacobian jacobian(State s, const Params& params);

// delta = d/p, theta = m/K, eta = c/K^2; epsilon is independent input.
Params nondimensionalize(const DimensionalParams& dp, double epsilon);

double transcritical_threshold(double eta);

// Interior equilibrium abscissa sqrt(delta*eta/(1-delta)); requires delta < 1.
double interior_u(double delta, double eta);

// delta at which the interior equilibrium sits at abscissa u.
double delta_for_equilibrium_at(double u, double eta);

std::vector<Equilibrium> equilibria(const Params& params);

std::optional<Equilibrium> interior_equilibrium(const Params& params);

}  // namespace canard

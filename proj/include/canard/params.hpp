#pragma once

#include <string>
#include <vector>

namespace canard {

// Dimensionless parameters of the time-rescaled predator-prey system.
struct Params {
    double delta = 0.0;    // predator death-rate ratio d/p
    double theta = 0.0;    // Allee threshold m/K
    double eta = 0.0;      // half-saturation c/K^2
    double epsilon = 0.0;  // timescale separation

    // Throws ValidationError unless every field is strictly positive and
    // epsilon < 1.
    void validate() const;

    // Non-fatal remarks: large epsilon, (theta, eta) outside the unit square.
    std::vector<std::string> advisories() const;
};

// Dimensional parameters of the original model.
struct DimensionalParams {
    double r = 0.0;
    double K = 0.0;
    double m = 0.0;
    double p = 0.0;
    double q = 0.0;
    double c = 0.0;
    double d = 0.0;

    void validate() const;
};

// Planar state (prey u, predator v).
struct State {
    double u = 0.0;
    double v = 0.0;
};

}  // namespace canard

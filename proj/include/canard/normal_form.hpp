#pragma once

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <string>

#include "canard/manifold.hpp"

namespace canard {

using cplx = std::complex<double>;

// Taylor coefficients a_ij = d^{i+j} f / du^i dv^j and b_ij of the predator
// equation at the canard point (u_m, v_m, delta*).
struct CanardExpansion {
    double u_m = 0.0;
    double v_m = 0.0;
    double theta = 0.0;
    double eta = 0.0;
    double delta_star = 0.0;

    double a10 = 0.0, a01 = 0.0, a20 = 0.0, a11 = 0.0, a30 = 0.0, a21 = 0.0, a40 = 0.0, a50 = 0.0;
    double b10 = 0.0, b01 = 0.0, b20 = 0.0, b11 = 0.0, b21 = 0.0;

    double lambda(double delta) const { return delta - delta_star; }
};

// delta at which the interior equilibrium sits on the fold abscissa.
double canard_delta(double u_fold, double eta);

// Closed forms evaluated at (u_m, theta, eta, delta*) with v_m = phi(u_m).
// No checks; used for families where theta is moved off the fold.
CanardExpansion expansion_at(double u_m, double theta, double eta, double delta_star);

// Checked construction at a fold point.
CanardExpansion taylor_coefficients(const FoldPoint& fold, double theta, double eta, double delta_star);

struct PrimedCoefficients {
    double a10 = 0.0, a01 = 0.0, b10 = 0.0, b01 = 0.0;
    double a20 = 0.0, a11 = 0.0, a30 = 0.0, a21 = 0.0, a40 = 0.0, a50 = 0.0;
    double b20 = 0.0, b11 = 0.0, b21 = 0.0;
};

// Rescaled problem near the fold: u = r2 u2, v = r2^2 v2, lambda = r2 lambda2,
// epsilon = r2^2, with the equilibrium P2 and its linearization.
struct BlowupChart {
    double r2 = 0.0;
    double lambda2 = 0.0;
    double u2e = 0.0;
    double v2e = 0.0;
    double alpha11 = 0.0, alpha12 = 0.0, alpha21 = 0.0, alpha22 = 0.0;
    cplx mu;
    double beta0 = 0.0;
    std::array<cplx, 2> p{};
    std::array<cplx, 2> q{};
    PrimedCoefficients primed;

    double alpha() const { return mu.real(); }
    double beta() const { return mu.imag(); }
};

BlowupChart blowup_chart(const CanardExpansion& exp, double epsilon, double lambda2);

struct GCoefficients {
    cplx g20, g11, g02;
    cplx g30, g21, g12, g03;
    cplx g40, g31, g22, g13, g04;
    cplx g50, g41, g32, g23, g14, g05;
};

struct HCoefficients {
    cplx h20, h11, h02;
    cplx h30, h12, h03;
    cplx h40, h31, h22, h13, h04;
};

struct NormalFormCoeffs {
    GCoefficients g;
    HCoefficients h;
    cplx c1;
    cplx c2;
};

// Complex cubic and quintic Taylor coefficients in z = <p, (x, y)>.
NormalFormCoeffs g_coefficients(const BlowupChart& chart);

// Normalizing transformation and resonant coefficients of
// w' = mu w + c1 w^2 conj(w) + c2 w^3 conj(w)^2.
NormalFormCoeffs h_and_c(const NormalFormCoeffs& nf, cplx mu);

struct FirstLyapunov {
    double L1 = 0.0;
    double A = 0.0;
};

double criticality_constant(const CanardExpansion& exp);
FirstLyapunov first_lyapunov(const CanardExpansion& exp, double epsilon);

// (1/(2 beta^2)) Re(i g20 g11 + beta0 g21) through the chart at lambda2 = 0.
double first_lyapunov_pipeline(const CanardExpansion& exp, double epsilon);

double theta_bautin(double u_m, double eta, double delta_star);

struct SecondLyapunov {
    double L2 = 0.0;
    double B = 0.0;
    double A = 0.0;
    bool on_locus = true;
    std::string warning;
};

SecondLyapunov second_lyapunov(const CanardExpansion& exp, double epsilon, double locus_tol = 1e-6);

double l2_compact(const NormalFormCoeffs& nf, double beta);

// Re(c2)/beta through the chart at lambda2 = 0.
double second_lyapunov_pipeline(const CanardExpansion& exp, double epsilon);

struct Thresholds {
    double delta_H = 0.0;
    double delta_C = 0.0;
};

Thresholds thresholds(const CanardExpansion& exp, double epsilon);

enum class Criticality { supercritical, subcritical, degenerate };
std::string to_string(Criticality c);
Criticality classify_hopf(double A, double tol = 1e-10);

// Real part of the chart eigenvalue and the first Lyapunov coefficient as
// functions of (delta, theta).
struct BautinFamily {
    std::function<double(double delta, double theta)> alpha;
    std::function<double(double delta, double theta)> l1;
};

// Family built from the model: folds and delta* are recomputed at every
// theta; alpha and L1 come from the chart at lambda2 = (delta - delta*)/r2.
BautinFamily model_bautin_family(double eta, double epsilon, FoldKind fold = FoldKind::local_min);

double bautin_transversality(const BautinFamily& family, double delta_H, double theta_B, double step);

struct LyapunovResult {
    double L1 = 0.0;
    double A = 0.0;
    double L2 = 0.0;
    double B = 0.0;
    double delta_H = 0.0;
    double theta_B = 0.0;
    double delta_C = 0.0;
    std::optional<double> delta_SNL;
    std::optional<double> bautin_transversality;
};

}  // namespace canard

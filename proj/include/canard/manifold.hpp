#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "canard/params.hpp"

namespace canard {

enum class Branch { left, middle, right, fold };

enum class FoldKind { local_min, local_max };

enum class Region { r1, r2, r3, two_folds_outside_closed_forms, fewer_than_two_folds };

std::string to_string(Branch b);
std::string to_string(FoldKind k);
std::string to_string(Region r);

struct FoldPoint {
    double u = 0.0;
    double v = 0.0;
    FoldKind kind = FoldKind::local_min;
    bool degenerate = false;
};

// Graph of the nontrivial critical manifold, v = phi(u), and its derivatives.
double phi(double u, double theta, double eta);
double dphi(double u, double theta, double eta);
double d2phi(double u, double theta, double eta);

// Fold quartic F(u) = -u^2 phi'(u) and its derivative.
double fold_quartic(double u, double theta, double eta);
double fold_quartic_derivative(double u, double theta, double eta);

double gamma_cap(double theta, double eta);
double lambda1(double theta, double eta);
double lambda2(double theta, double eta);

// Real roots of F in (0, 1), sorted by u.
std::vector<FoldPoint> fold_points(double theta, double eta);

struct RegionReport {
    Region region = Region::fewer_than_two_folds;
    // Closed-form tag that fired verbatim, if any, before the numeric check.
    std::optional<Region> closed_form_tag;
    bool closed_form_consistent = true;
    int numeric_root_count = 0;
    double gamma = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

RegionReport classify_region(double theta, double eta);

// Requires exactly two folds (P, Q).
Branch branch_of(double u, const std::vector<FoldPoint>& folds);

enum class SegmentKind { fast_l1, slow_right, fast_l2, slow_left };
std::string to_string(SegmentKind k);

struct Segment {
    SegmentKind kind;
    State start;
    State end;
};

struct TaggedPoint {
    double u;
    double v;
    SegmentKind segment;
};

struct SingularOrbit {
    double theta = 0.0;
    double eta = 0.0;
    FoldPoint p;
    FoldPoint q;
    double u_l = 0.0;
    double u_r = 0.0;
    std::vector<Segment> segments;

    // Dense polyline in segment order; slow pieces follow the manifold.
    std::vector<TaggedPoint> sample(int points_per_segment) const;
};

SingularOrbit singular_orbit(double theta, double eta, const std::vector<FoldPoint>& folds);

// Reduced slow flow du/dtau on the critical manifold.
double slow_flow(double u, const Params& params);

// True iff phi' < 0 at every one of n_samples interior points of (u_lo, u_hi).
bool dulac_sign_check(double theta, double eta, double u_lo, double u_hi, int n_samples);

// Dulac test on (u_M, 1); requires the interior equilibrium right of Q.
bool dulac_region_check(const Params& params, const std::vector<FoldPoint>& folds,
                        int n_samples = 10000);

// CSV with columns u,phi,branch over n points of (0, 1).
void write_manifold_csv(std::ostream& out, double theta, double eta, int n_points);

}  // namespace canard

#include "canard/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "canard/errors.hpp"
#include "numerics.hpp"

namespace canard {

std::string to_string(Branch b) {
    switch (b) {
        case Branch::left: return "S0l";
        case Branch::middle: return "S0m";
        case Branch::right: return "S0r";
        case Branch::fold: return "fold";
    }
    return "?";
}

std::string to_string(FoldKind k) {
    return k == FoldKind::local_min ? "min" : "max";
}

std::string to_string(Region r) {
    switch (r) {
        case Region::r1: return "R1";
        case Region::r2: return "R2";
        case Region::r3: return "R3";
        case Region::two_folds_outside_closed_forms: return "two-folds-outside-closed-forms";
        case Region::fewer_than_two_folds: return "fewer-than-two-folds";
    }
    return "?";
}

std::string to_string(SegmentKind k) {
    switch (k) {
        case SegmentKind::fast_l1: return "l1";
        case SegmentKind::slow_right: return "c_r";
        case SegmentKind::fast_l2: return "l2";
        case SegmentKind::slow_left: return "c_l";
    }
    return "?";
}

double phi(double u, double theta, double eta) {
    return (1.0 - u) * (u + theta) * (u * u + eta) / u;
}

double dphi(double u, double theta, double eta) {
    return -3.0 * u * u + 2.0 * (1.0 - theta) * u + (theta - eta) - theta * eta / (u * u);
}

double d2phi(double u, double theta, double eta) {
    return -6.0 * u + 2.0 * (1.0 - theta) + 2.0 * theta * eta / (u * u * u);
}

double fold_quartic(double u, double theta, double eta) {
    const double u2 = u * u;
    return 3.0 * u2 * u2 - 2.0 * (1.0 - theta) * u2 * u - (theta - eta) * u2 + eta * theta;
}

double fold_quartic_derivative(double u, double theta, double eta) {
    return 2.0 * u * (6.0 * u * u - 3.0 * (1.0 - theta) * u - (theta - eta));
}

double gamma_cap(double theta, double eta) {
    return 9.0 * theta * theta + 6.0 * theta + 9.0 - 24.0 * eta;
}

double lambda1(double theta, double eta) {
    const double t2 = theta * theta;
    return eta / 8.0 * (t2 + 22.0 / 3.0 * theta + 1.0) -
           (3.0 * (1.0 + t2 * t2) + 2.0 * (t2 + 4.0 * eta * eta)) / 96.0;
}

double lambda2(double theta, double eta) {
    return (1.0 - theta) / 288.0 * (3.0 * theta * theta + 2.0 * theta + 3.0 - 8.0 * eta);
}

std::vector<FoldPoint> fold_points(double theta, double eta) {
    if (!(theta > 0.0) || !(eta > 0.0)) {
        throw ValidationError("fold_points requires theta > 0 and eta > 0");
    }
    auto F = [&](double u) { return fold_quartic(u, theta, eta); };
    auto dF = [&](double u) { return fold_quartic_derivative(u, theta, eta); };

    // F' vanishes at 0 and at (1-theta)/4 +- sqrt(Gamma)/12, so these points
    // split (0, 1) into intervals on which F is monotone.
    struct Node {
        double u;
        bool touching;  // F has a double root here
    };
    std::vector<Node> nodes{{0.0, false}};
    const double g = gamma_cap(theta, eta);
    if (g >= 0.0) {
        for (double sgn : {-1.0, 1.0}) {
            const double c = (1.0 - theta) / 4.0 + sgn * std::sqrt(g) / 12.0;
            if (c > 0.0 && c < 1.0) {
                nodes.push_back({c, std::abs(F(c)) <= 1e-14});
            }
        }
    }
    nodes.push_back({1.0, false});

    std::vector<FoldPoint> out;
    auto make_fold = [&](double u, bool degenerate) {
        FoldPoint fp;
        fp.u = u;
        fp.v = phi(u, theta, eta);
        fp.kind = d2phi(u, theta, eta) >= 0.0 ? FoldKind::local_min : FoldKind::local_max;
        fp.degenerate = degenerate || std::abs(dF(u)) < 1e-8;
        return fp;
    };

    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const Node& a = nodes[i];
        const Node& b = nodes[i + 1];
        if (a.touching || b.touching) continue;
        const double fa = F(a.u);
        const double fb = F(b.u);
        if ((fa > 0.0) == (fb > 0.0)) continue;
        double u = detail::bracketed_root(F, a.u, b.u, "fold quartic");
        for (int k = 0; k < 3; ++k) {
            const double d = dF(u);
            if (d == 0.0) break;
            const double next = u - F(u) / d;
            if (!(next > a.u && next < b.u)) break;
            u = next;
        }
        out.push_back(make_fold(u, false));
    }
    for (const Node& n : nodes) {
        if (n.touching) out.push_back(make_fold(n.u, true));
    }
    std::sort(out.begin(), out.end(), [](const FoldPoint& x, const FoldPoint& y) { return x.u < y.u; });
    return out;
}

RegionReport classify_region(double theta, double eta) {
    RegionReport rep;
    rep.gamma = gamma_cap(theta, eta);
    rep.lambda1 = lambda1(theta, eta);
    rep.lambda2 = lambda2(theta, eta);
    rep.numeric_root_count = static_cast<int>(fold_points(theta, eta).size());

    const Region numeric = rep.numeric_root_count == 2 ? Region::two_folds_outside_closed_forms
                                                       : Region::fewer_than_two_folds;
    if (!(rep.gamma > 0.0)) {
        rep.closed_form_tag = Region::fewer_than_two_folds;
        rep.closed_form_consistent = rep.numeric_root_count < 2;
        rep.region = rep.closed_form_consistent ? Region::fewer_than_two_folds : numeric;
        return rep;
    }

    const double sg = std::sqrt(rep.gamma);
    const bool have_ratio = rep.lambda2 != 0.0;
    const double ratio2 = have_ratio ? std::pow(rep.lambda1 / rep.lambda2, 2) : 0.0;
    const bool theta_window = sg / 3.0 - 3.0 < theta && theta < 1.0 + sg / 3.0;

    if (0.0 < eta && eta < theta && theta <= 1.0 && theta_window && have_ratio && rep.gamma > ratio2) {
        rep.closed_form_tag = Region::r1;
    } else if (0.0 < eta && eta < 1.0 && 1.0 < theta && theta_window && have_ratio &&
               rep.gamma < ratio2) {
        rep.closed_form_tag = Region::r2;
    } else if (0.0 < theta && theta < 1.0 && 1.0 < eta && sg / 3.0 - 3.0 < theta && have_ratio &&
               rep.gamma > ratio2) {
        rep.closed_form_tag = Region::r3;
    }

    if (rep.closed_form_tag) {
        rep.closed_form_consistent = rep.numeric_root_count == 2;
        rep.region = rep.closed_form_consistent ? *rep.closed_form_tag : numeric;
    } else {
        rep.region = numeric;
    }
    return rep;
}

Branch branch_of(double u, const std::vector<FoldPoint>& folds) {
    if (folds.size() != 2) {
        throw ValidationError("branch_of requires exactly two fold points");
    }
    const double um = folds[0].u;
    const double uM = folds[1].u;
    if (std::abs(u - um) < 1e-9 || std::abs(u - uM) < 1e-9) return Branch::fold;
    if (u < um) return Branch::left;
    if (u < uM) return Branch::middle;
    return Branch::right;
}

SingularOrbit singular_orbit(double theta, double eta, const std::vector<FoldPoint>& folds) {
    if (folds.size() != 2 || folds[0].degenerate || folds[1].degenerate) {
        throw ValidationError("singular orbit undefined: requires exactly two non-degenerate folds");
    }
    SingularOrbit orbit;
    orbit.theta = theta;
    orbit.eta = eta;
    orbit.p = folds[0];
    orbit.q = folds[1];
    const double um = orbit.p.u, vm = orbit.p.v;
    const double uM = orbit.q.u, vM = orbit.q.v;

    auto left = [&](double u) { return phi(u, theta, eta) - vM; };
    double lo = 0.5 * um;
    for (int k = 0; k < 80 && left(lo) <= 0.0; ++k) lo *= 0.5;
    orbit.u_l = detail::bracketed_root(left, lo, um, "left landing point");

    auto right = [&](double u) { return phi(u, theta, eta) - vm; };
    orbit.u_r = detail::bracketed_root(right, uM, 1.0, "right landing point");

    if (std::abs(left(orbit.u_l)) > 1e-10 || std::abs(right(orbit.u_r)) > 1e-10) {
        throw NumericalError("singular orbit landing point residual exceeds 1e-10");
    }

    orbit.segments = {
        {SegmentKind::fast_l1, {um, vm}, {orbit.u_r, vm}},
        {SegmentKind::slow_right, {orbit.u_r, vm}, {uM, vM}},
        {SegmentKind::fast_l2, {uM, vM}, {orbit.u_l, vM}},
        {SegmentKind::slow_left, {orbit.u_l, vM}, {um, vm}},
    };
    return orbit;
}

std::vector<TaggedPoint> SingularOrbit::sample(int points_per_segment) const {
    if (points_per_segment < 2) {
        throw ValidationError("at least two points per segment are required");
    }
    std::vector<TaggedPoint> pts;
    pts.reserve(static_cast<std::size_t>(points_per_segment) * segments.size());
    for (const Segment& s : segments) {
        const bool slow = s.kind == SegmentKind::slow_left || s.kind == SegmentKind::slow_right;
        for (int i = 0; i < points_per_segment; ++i) {
            const double t = static_cast<double>(i) / (points_per_segment - 1);
            TaggedPoint p{s.start.u + t * (s.end.u - s.start.u), s.start.v, s.kind};
            if (i == 0) {
                p.u = s.start.u;
                p.v = s.start.v;
            } else if (i == points_per_segment - 1) {
                p.u = s.end.u;
                p.v = s.end.v;
            } else if (slow) {
                p.v = canard::phi(p.u, theta, eta);
            }
            pts.push_back(p);
        }
    }
    return pts;
}

double slow_flow(double u, const Params& params) {
    for (const auto& f : fold_points(params.theta, params.eta)) {
        if (std::abs(u - f.u) < 1e-9) {
            throw NumericalError("slow flow is singular within 1e-9 of a fold point (u = " +
                                 std::to_string(u) + ")");
        }
    }
    const double d = dphi(u, params.theta, params.eta);
    if (d == 0.0) {
        throw NumericalError("slow flow is singular where phi'(u) = 0");
    }
    const double u2 = u * u;
    return (u2 - params.delta * (u2 + params.eta)) * phi(u, params.theta, params.eta) / d;
}

bool dulac_sign_check(double theta, double eta, double u_lo, double u_hi, int n_samples) {
    if (n_samples <= 0) {
        throw ValidationError("dulac check needs a positive number of samples");
    }
    if (!(u_lo < u_hi)) {
        throw ValidationError("dulac check needs u_lo < u_hi");
    }
    const double h = (u_hi - u_lo) / n_samples;
    for (int i = 0; i < n_samples; ++i) {
        const double u = u_lo + (i + 0.5) * h;
        if (!(dphi(u, theta, eta) < 0.0)) return false;
    }
    return true;
}

bool dulac_region_check(const Params& params, const std::vector<FoldPoint>& folds, int n_samples) {
    if (folds.size() != 2) {
        throw ValidationError("dulac region check requires the fold pair (P, Q)");
    }
    const double u_star = std::sqrt(params.delta * params.eta / (1.0 - params.delta));
    if (!(params.delta < 1.0) || !(u_star > folds[1].u)) {
        throw ValidationError("dulac region check requires the interior equilibrium right of fold Q");
    }
    return dulac_sign_check(params.theta, params.eta, folds[1].u, 1.0, n_samples);
}

void write_manifold_csv(std::ostream& out, double theta, double eta, int n_points) {
    if (n_points <= 0) {
        throw ValidationError("manifold export needs a positive number of points");
    }
    const auto folds = fold_points(theta, eta);
    out << "u,phi,branch\n";
    out.precision(17);
    for (int i = 0; i < n_points; ++i) {
        const double u = (i + 0.5) / n_points;
        out << u << ',' << phi(u, theta, eta) << ','
            << (folds.size() == 2 ? to_string(branch_of(u, folds)) : std::string("graph")) << '\n';
    }
}

}  // namespace canard

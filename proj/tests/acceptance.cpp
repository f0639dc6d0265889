// Acceptance checks: one PASS/FAIL line per criterion, each with its runtime budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "canard/bifurcation.hpp"
#include "canard/dynamics.hpp"
#include "canard/errors.hpp"
#include "canard/manifold.hpp"
#include "canard/model.hpp"
#include "canard/normal_form.hpp"
#include "oracles.hpp"

using namespace canard;

namespace {

constexpr double kTheta = 0.05;
constexpr double kEta = 0.176;
constexpr double kEps = 0.005;
constexpr double kDeltaRef = 0.2426879409;

struct Outcome {
    bool ok = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = dt < budget_s;
    const bool pass = o.ok && in_time;
    if (!pass) ++failures;
    std::printf("%s criterion %d: %s | %s | %.2f s (budget %.0f s)%s\n", pass ? "PASS" : "FAIL", id, name,
                o.detail.c_str(), dt, budget_s, in_time ? "" : " OVER BUDGET");
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

}  // namespace

int main() {
    criterion(1, "fold points at theta=0.05, eta=0.176", 1.0, [] {
        const auto f = fold_points(kTheta, kEta);
        if (f.size() != 2) return Outcome{false, "fold count " + std::to_string(f.size())};
        const bool ok = std::abs(f[0].u - 0.2375) < 5e-4 && std::abs(f[0].v - 0.2145) < 5e-4 &&
                        std::abs(f[1].u - 0.5359) < 5e-4 && std::abs(f[1].v - 0.235) < 5e-4;
        return Outcome{ok, fmt("P=(%.6f, %.6f) Q=(%.6f, %.6f)", f[0].u, f[0].v, f[1].u, f[1].v)};
    });

    criterion(2, "canard threshold delta*", 1.0, [] {
        const auto f = fold_points(kTheta, kEta);
        const double ds = canard_delta(f[0].u, kEta);
        return Outcome{std::abs(ds - kDeltaRef) < 1e-6, fmt("delta*=%.10f", ds)};
    });

    criterion(3, "first Lyapunov leading coefficient A at P and Q", 1.0, [] {
        const auto f = fold_points(kTheta, kEta);
        const double ap =
            criticality_constant(taylor_coefficients(f[0], kTheta, kEta, canard_delta(f[0].u, kEta)));
        const double aq = criticality_constant(expansion_at(f[1].u, kTheta, kEta, 0.62));
        const bool ok = std::abs(ap - 2.796e-7) < 0.05 * 2.796e-7 && std::abs(aq + 0.1055) < 1e-3;
        return Outcome{ok, fmt("A_P=%.5g A_Q(delta=0.62)=%.6f", ap, aq)};
    });

    criterion(4, "second Lyapunov leading coefficient B at (delta_H, theta_B)", 1.0, [] {
        const auto f = fold_points(kTheta, kEta);
        const double ds = canard_delta(f[0].u, kEta);
        const double tb = theta_bautin(f[0].u, kEta, ds);
        const SecondLyapunov s = second_lyapunov(expansion_at(f[0].u, tb, kEta, ds), kEps);
        return Outcome{std::abs(s.B + 0.004) < 0.15 * 0.004, fmt("B=%.6g theta_B=%.8f", s.B, tb)};
    });

    criterion(5, "dual-path L1 and L2 identities over 25 random parameter sets", 10.0, [] {
        std::mt19937_64 rng(55);
        std::uniform_real_distribution<double> ed(1e-4, 0.05);
        double worst1 = 0, worst2 = 0;
        for (const auto& c : oracle::random_canard_points(25, 505)) {
            const CanardExpansion e = taylor_coefficients(c.fold, c.theta, c.eta, c.delta_star);
            const double eps = ed(rng);
            const double a = first_lyapunov(e, eps).L1;
            const double b = first_lyapunov_pipeline(e, eps);
            worst1 = std::max(worst1, std::abs(a - b) / std::abs(a));
        }
        // The compact L2 formula presupposes L1 = 0: samples on the Bautin locus.
        for (const CanardExpansion& e : oracle::random_bautin_points(25, 515)) {
            const BlowupChart ch = blowup_chart(e, ed(rng), 0.0);
            const NormalFormCoeffs nf = h_and_c(g_coefficients(ch), ch.mu);
            const double r = nf.c2.real() / ch.beta();
            const double k = l2_compact(nf, ch.beta());
            worst2 = std::max(worst2, std::abs(r - k) / std::abs(r));
        }
        return Outcome{worst1 < 1e-8 && worst2 < 1e-8, fmt("max rel L1 %.3g, L2 %.3g", worst1, worst2)};
    });

    criterion(6, "Taylor coefficients against Richardson finite differences (25 points)", 10.0, [] {
        double worst = 0;
        for (const auto& c : oracle::random_canard_points(25, 606)) {
            const auto r = oracle::compare_coefficients(taylor_coefficients(c.fold, c.theta, c.eta, c.delta_star));
            worst = std::max(worst, r.max_relative);
        }
        return Outcome{worst < 1e-6, fmt("max relative deviation %.3g", worst)};
    });

    criterion(7, "bifurcation diagram over delta in [0.2, 0.7], step 0.01", 300.0, [] {
        const DiagramBranch br = sweep(0.2, 0.7, 0.01, {0.3, kTheta, kEta, kEps});
        double first = -1, last = -1;
        bool outside_ok = true, gaps = false;
        for (const auto& r : br.rows) {
            gaps = gaps || r.status != "ok";
            if (r.cycle_stability == CycleStability::stable) {
                if (first < 0) first = r.delta;
                last = r.delta;
            }
        }
        bool inside_ok = first > 0;
        for (const auto& r : br.rows) {
            const bool in = r.delta >= first && r.delta <= last;
            if (in && r.cycle_stability != CycleStability::stable) inside_ok = false;
            if (!in && (r.u_cycle_min || r.eq_stability != Stability::stable_focus_or_node)) outside_ok = false;
        }
        const bool ok = !gaps && inside_ok && outside_ok && std::abs(first - 0.24268) < 2e-3 &&
                        std::abs(last - 0.62) < 2e-3;
        return Outcome{ok, fmt("stable branch on [%.6f, %.6f], %g rows", first, last,
                               static_cast<double>(br.rows.size()))};
    });

    criterion(8, "Hausdorff distance to gamma0 decreases with epsilon at delta=0.4", 120.0, [] {
        const auto folds = fold_points(kTheta, kEta);
        const SingularOrbit g0 = singular_orbit(kTheta, kEta, folds);
        double d[3];
        const double eps[3] = {0.01, 0.005, 0.001};
        for (int i = 0; i < 3; ++i) {
            const auto c = find_cycles({0.4, kTheta, kEta, eps[i]});
            if (c.size() != 1) return Outcome{false, "cycle not found"};
            d[i] = cycle_vs_singular(c[0].path, g0);
        }
        return Outcome{d[0] > d[1] && d[1] > d[2], fmt("d = %.5f, %.5f, %.5f", d[0], d[1], d[2])};
    });

    criterion(9, "global stability at delta=0.7 (100 random starts, t=1e5)", 120.0, [] {
        const Params p{0.7, kTheta, kEta, kEps};
        const auto e = interior_equilibrium(p);
        std::mt19937_64 rng(909);
        std::uniform_real_distribution<double> d(1e-3, 2.0);
        double worst = 0;
        for (int i = 0; i < 100; ++i) {
            const Orbit o = integrate(p, {d(rng), d(rng)}, 1e5);
            const auto& s = o.samples.back();
            worst = std::max(worst, std::hypot(s.u - e->u, s.v - e->v));
        }
        const bool dulac = dulac_region_check(p, fold_points(kTheta, kEta));
        return Outcome{worst < 1e-4 && dulac, fmt("max final distance %.3g, dulac %g", worst, dulac ? 1.0 : 0.0)};
    });

    criterion(10, "saddle-node of cycles: below resolution at reference, located for theta=0.02", 300.0, [] {
        const Params base{0.3, kTheta, kEta, kEps};
        const auto fr = fold_points(kTheta, kEta);
        const double dh = canard_delta(fr[0].u, kEta);
        const SnlResult ref = locate_snl(base, kTheta, {dh - 0.05, dh}, kEps);
        const auto fs = fold_points(0.02, kEta);
        const double dhs = canard_delta(fs[0].u, kEta);
        const SnlResult syn = locate_snl(base, 0.02, {dhs - 0.05, dhs}, kEps);
        const bool ok = ref.verdict == SnlResult::Verdict::below_resolution &&
                        syn.verdict == SnlResult::Verdict::located && syn.delta_snl && *syn.delta_snl < syn.delta_H;
        return Outcome{ok, "reference " + to_string(ref.verdict) +
                               fmt(", theta=0.02: delta_SNL=%.10f < delta_H=%.10f", syn.delta_snl.value_or(NAN),
                                   syn.delta_H)};
    });

    criterion(11, "positivity and boundedness over 10000 random starts, t in [0, 1e4]", 300.0, [] {
        const Params p{kDeltaRef, kTheta, kEta, kEps};
        std::mt19937_64 rng(1111);
        std::uniform_real_distribution<double> d(1e-3, 2.0);
        int violations = 0;
        long samples = 0;
        for (int i = 0; i < 10000; ++i) {
            const State s0{d(rng), d(rng)};
            const Box box = boundedness_box(p, s0);
            try {
                const Orbit o = integrate(p, s0, 1e4);
                for (const auto& s : o.samples) {
                    ++samples;
                    if (!(s.u > 0 && s.v > 0 && s.u <= box.u_max && s.v <= box.v_max)) ++violations;
                }
            } catch (const NumericalError&) {
                ++violations;
            }
        }
        return Outcome{violations == 0, fmt("%g violations in %g samples", violations, static_cast<double>(samples))};
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}

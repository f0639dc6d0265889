#include <doctest.h>

#include <cmath>
#include <random>

#include "canard/errors.hpp"
#include "canard/manifold.hpp"
#include "canard/normal_form.hpp"
#include "oracles.hpp"

using namespace canard;
using namespace canard::oracle;

namespace {

constexpr double kTheta = 0.05;
constexpr double kEta = 0.176;
constexpr double kEps = 0.005;

CanardExpansion reference_p() {
    const auto f = fold_points(kTheta, kEta);
    return taylor_coefficients(f[0], kTheta, kEta, canard_delta(f[0].u, kEta));
}

CanardExpansion reference_q() {
    const auto f = fold_points(kTheta, kEta);
    return taylor_coefficients(f[1], kTheta, kEta, canard_delta(f[1].u, kEta));
}

}  // namespace

TEST_CASE("fixed coefficients and printed examples") {
    const CanardExpansion e = expansion_at(0.2375, kTheta, kEta, 0.2426879409);
    CHECK(e.a01 == doctest::Approx(-0.05640625).epsilon(1e-14));
    CHECK(e.a10 == 0.0);
    CHECK(e.a50 == -120.0);
    CHECK(e.b01 == 0.0);
    CHECK(e.b10 == doctest::Approx(0.0772).epsilon(1e-3 / 0.0772));
    CHECK(e.b10 == doctest::Approx(2 * (1 - 0.2426879409) * 0.2375 * e.v_m).epsilon(1e-14));
}

TEST_CASE("Taylor coefficients against Richardson finite differences") {
    for (const CanardPoint& c : random_canard_points(25, 101)) {
        const CanardExpansion e = taylor_coefficients(c.fold, c.theta, c.eta, c.delta_star);
        const CoefficientCheck r = compare_coefficients(e);
        CHECK_MESSAGE(r.max_relative < 1e-6, "theta=" << c.theta << " eta=" << c.eta << " worst=" << r.worst);
        CHECK(r.max_absolute_fixed < 1e-9);
    }
}

TEST_CASE("taylor_coefficients guards") {
    const auto f = fold_points(kTheta, kEta);
    const double ds = canard_delta(f[0].u, kEta);
    CHECK_THROWS_AS(taylor_coefficients(f[0], kTheta, kEta, ds + 1e-6), ValidationError);
    FoldPoint degenerate = f[0];
    degenerate.degenerate = true;
    CHECK_THROWS_AS(taylor_coefficients(degenerate, kTheta, kEta, ds), ValidationError);
}

TEST_CASE("blow-up chart at the Hopf point") {
    const CanardExpansion e = reference_p();
    const BlowupChart ch = blowup_chart(e, kEps, 0.0);
    CHECK(ch.r2 * ch.r2 == doctest::Approx(kEps).epsilon(1e-15));
    CHECK(ch.u2e == 0.0);
    CHECK(ch.v2e == 0.0);
    CHECK(std::abs(ch.alpha11 + ch.alpha22) < 1e-12);
    CHECK(ch.beta0 == doctest::Approx(std::sqrt(-e.a01 * e.b10)).epsilon(1e-14));
    CHECK(ch.beta0 == doctest::Approx(0.066).epsilon(0.005 / 0.066));

    // Eigenvalue oracle for the 2x2 alpha-matrix.
    const double tr = ch.alpha11 + ch.alpha22;
    const double det = ch.alpha11 * ch.alpha22 - ch.alpha12 * ch.alpha21;
    const double im = std::sqrt(det - tr * tr / 4);
    CHECK(ch.beta() == doctest::Approx(im).epsilon(1e-12));
    CHECK(ch.beta() == doctest::Approx(ch.beta0).epsilon(1e-12));

    const cplx pq = std::conj(ch.p[0]) * ch.q[0] + std::conj(ch.p[1]) * ch.q[1];
    CHECK(std::abs(pq - cplx(1.0, 0.0)) < 1e-12);
}

TEST_CASE("blow-up chart away from the Hopf point") {
    const CanardExpansion e = reference_q();
    for (double l2 : {-0.05, 0.03}) {
        const BlowupChart ch = blowup_chart(e, kEps, l2);
        const cplx pq = std::conj(ch.p[0]) * ch.q[0] + std::conj(ch.p[1]) * ch.q[1];
        CHECK(std::abs(pq - cplx(1.0, 0.0)) < 1e-12);
        // q is a right eigenvector for mu.
        const cplx r0 = ch.alpha11 * ch.q[0] + ch.alpha12 * ch.q[1] - ch.mu * ch.q[0];
        const cplx r1 = ch.alpha21 * ch.q[0] + ch.alpha22 * ch.q[1] - ch.mu * ch.q[1];
        CHECK(std::abs(r0) < 1e-12);
        CHECK(std::abs(r1) < 1e-12);
    }
    CHECK_THROWS_AS(blowup_chart(e, kEps, 50.0), NumericalError);
}

TEST_CASE("g coefficient structure") {
    const CanardExpansion e = reference_p();
    const BlowupChart ch = blowup_chart(e, kEps, 0.0);
    const NormalFormCoeffs nf = g_coefficients(ch);

    BlowupChart swapped = ch;
    swapped.q = {std::conj(ch.q[0]), std::conj(ch.q[1])};
    const NormalFormCoeffs sw = g_coefficients(swapped);
    CHECK(std::abs(sw.g.g20 - nf.g.g02) < 1e-14);
    CHECK(std::abs(sw.g.g02 - nf.g.g20) < 1e-14);

    const NormalFormCoeffs small = g_coefficients(blowup_chart(e, kEps / 4, 0.0));
    CHECK(std::abs(nf.g.g05 / small.g.g05 - 8.0) < 1e-12);
    CHECK(std::abs(nf.g.g50 / small.g.g50 - 8.0) < 1e-12);
}

TEST_CASE("h and c recursions") {
    SUBCASE("zero input") {
        const NormalFormCoeffs z = h_and_c(NormalFormCoeffs{}, cplx(0.0, 0.3));
        CHECK(std::abs(z.c1) == 0.0);
        CHECK(std::abs(z.c2) == 0.0);
        CHECK(std::abs(z.h.h31) == 0.0);
    }
    SUBCASE("division identities") {
        const double b0 = 0.066;
        NormalFormCoeffs in;
        in.g.g20 = cplx(0.0, b0);
        CHECK(std::abs(h_and_c(in, cplx(0.0, b0)).h.h20 - cplx(1.0, 0.0)) < 1e-15);

        const BlowupChart ch = blowup_chart(reference_q(), kEps, 0.02);
        const NormalFormCoeffs nf = h_and_c(g_coefficients(ch), ch.mu);
        CHECK(nf.h.h20 == nf.g.g20 / ch.mu);
        CHECK(nf.h.h11 == nf.g.g11 / std::conj(ch.mu));
        CHECK(nf.h.h02 == nf.g.g02 / (2.0 * std::conj(ch.mu) - ch.mu));
    }
    SUBCASE("small denominators") {
        NormalFormCoeffs in;
        in.g.g20 = 1.0;
        CHECK_THROWS_AS(h_and_c(in, cplx(0.0, 1e-14)), NumericalError);
    }
}

TEST_CASE("first Lyapunov coefficient") {
    const CanardExpansion p = reference_p();
    const FirstLyapunov l1 = first_lyapunov(p, kEps);
    CHECK(l1.A == doctest::Approx(2.796e-7).epsilon(0.05));
    CHECK(classify_hopf(l1.A) == Criticality::subcritical);

    const auto f = fold_points(kTheta, kEta);
    const CanardExpansion q = expansion_at(f[1].u, kTheta, kEta, 0.62);
    CHECK(std::abs(criticality_constant(q) - (-0.1055)) < 1e-3);
    CHECK(classify_hopf(criticality_constant(reference_q())) == Criticality::supercritical);
    CHECK(classify_hopf(1e-12) == Criticality::degenerate);

    for (double eps : {1e-4, 1e-3, 0.01, 0.05}) {
        const FirstLyapunov r = first_lyapunov(p, eps);
        const double beta0 = std::sqrt(-p.a01 * p.b10);
        CHECK(r.L1 == doctest::Approx(-p.a01 * r.A * std::sqrt(eps) / (4 * beta0 * p.b10)).epsilon(1e-14));
    }
}

TEST_CASE("first Lyapunov coefficient: closed form against the chart pipeline") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ed(1e-4, 0.05);
    for (const CanardPoint& c : random_canard_points(25, 202)) {
        const CanardExpansion e = taylor_coefficients(c.fold, c.theta, c.eta, c.delta_star);
        const double eps = ed(rng);
        const double closed = first_lyapunov(e, eps).L1;
        const double pipe = first_lyapunov_pipeline(e, eps);
        CHECK(pipe == doctest::Approx(closed).epsilon(1e-8));
    }
}

TEST_CASE("second Lyapunov coefficient: c2 recursion against the compact formula") {
    // The compact formula presupposes a vanishing first Lyapunov coefficient,
    // so every sample sits on the Bautin locus.
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ed(1e-4, 0.05);
    for (const CanardExpansion& e : random_bautin_points(25, 303)) {
        const BlowupChart ch = blowup_chart(e, ed(rng), 0.0);
        const NormalFormCoeffs nf = h_and_c(g_coefficients(ch), ch.mu);
        CHECK(std::abs(nf.c1.real()) < 1e-12 * std::abs(nf.c1));
        CHECK(l2_compact(nf, ch.beta()) == doctest::Approx(nf.c2.real() / ch.beta()).epsilon(1e-8));
    }
    NormalFormCoeffs real_g;
    real_g.g.g32 = 2.0;
    real_g.g.g21 = 0.5;
    real_g.g.g11 = 0.3;
    real_g.g.g20 = 0.7;
    CHECK_THROWS_AS(l2_compact(real_g, 0.0), NumericalError);
}

TEST_CASE("Bautin locus") {
    const CanardExpansion p = reference_p();
    const double tb = theta_bautin(p.u_m, kEta, p.delta_star);
    CHECK(std::abs(tb - 0.05) < 1e-3);
    CHECK(std::abs(criticality_constant(expansion_at(p.u_m, tb, kEta, p.delta_star))) < 1e-10);

    // Root of A(theta) with the fold and delta* recomputed at every theta.
    const double refolded = refolded_bautin_theta(kEta, 0.03, 0.07);
    CHECK(std::abs(refolded - tb) < 1e-4);

    // Continuity in eta: central-difference slope against a short secant.
    auto tb_of = [](double eta) {
        const auto f = fold_points(kTheta, eta);
        return theta_bautin(f[0].u, eta, canard_delta(f[0].u, eta));
    };
    const double slope = (tb_of(kEta + 1e-5) - tb_of(kEta - 1e-5)) / 2e-5;
    const double secant = (tb_of(kEta + 1e-3) - tb_of(kEta)) / 1e-3;
    CHECK(slope == doctest::Approx(secant).epsilon(0.01));
}

TEST_CASE("second Lyapunov coefficient at the Bautin point") {
    const CanardExpansion p = reference_p();
    const double tb = theta_bautin(p.u_m, kEta, p.delta_star);
    const CanardExpansion eb = expansion_at(p.u_m, tb, kEta, p.delta_star);
    const SecondLyapunov s = second_lyapunov(eb, kEps);
    CHECK(s.on_locus);
    CHECK(s.warning.empty());
    CHECK(s.B == doctest::Approx(-0.004).epsilon(0.15));
    CHECK(s.L2 == doctest::Approx(s.B * std::pow(kEps, 1.5)).epsilon(1e-14));
    CHECK(second_lyapunov(eb, 4 * kEps).L2 / s.L2 == doctest::Approx(8.0).epsilon(1e-13));

    // Off the locus the value is still produced, with a warning.
    const SecondLyapunov off = second_lyapunov(reference_q(), kEps);
    CHECK_FALSE(off.on_locus);
    CHECK_FALSE(off.warning.empty());
}

TEST_CASE("closed-form B and the chart pipeline disagree at the Bautin point") {
    // Frozen values from both evaluation paths; the mismatch is a documented
    // discrepancy between the printed closed form and the printed recursion.
    const CanardExpansion p = reference_p();
    const double tb = theta_bautin(p.u_m, kEta, p.delta_star);
    const CanardExpansion eb = expansion_at(p.u_m, tb, kEta, p.delta_star);
    const double closed = second_lyapunov(eb, kEps).B;
    const double pipeline = second_lyapunov_pipeline(eb, kEps) / std::pow(kEps, 1.5);
    CHECK(closed == doctest::Approx(-0.0041657154548).epsilon(1e-9));
    CHECK(pipeline == doctest::Approx(-7.6695438e-4).epsilon(1e-6));
    const BlowupChart ch = blowup_chart(eb, kEps, 0.0);
    const NormalFormCoeffs nf = h_and_c(g_coefficients(ch), ch.mu);
    CHECK(l2_compact(nf, ch.beta()) / std::pow(kEps, 1.5) == doctest::Approx(pipeline).epsilon(1e-8));
}

TEST_CASE("thresholds") {
    const CanardExpansion p = reference_p();
    const Thresholds t1 = thresholds(p, kEps);
    const Thresholds t2 = thresholds(p, 0.0001);
    CHECK(t1.delta_H == p.delta_star);
    CHECK(t2.delta_H == t1.delta_H);
    CHECK(t1.delta_H == doctest::Approx(0.2426879409).epsilon(1e-6 / 0.24));
    const double expected = -(p.b10 / (2 * p.a20 * p.a20 * p.a20 * p.v_m * (p.u_m * p.u_m + kEta))) *
                            criticality_constant(p) * kEps;
    CHECK(t1.delta_C - p.delta_star == doctest::Approx(expected).epsilon(1e-9));
    CHECK(t1.delta_C - p.delta_star == doctest::Approx(-1.05341e-6).epsilon(1e-4));

    const double tb = theta_bautin(p.u_m, kEta, p.delta_star);
    const CanardExpansion eb = expansion_at(p.u_m, tb, kEta, p.delta_star);
    CHECK(std::abs(thresholds(eb, kEps).delta_C - p.delta_star) < 1e-15);
}

TEST_CASE("Bautin transversality") {
    const BautinFamily fam = model_bautin_family(kEta, kEps);
    const CanardExpansion p = reference_p();
    const double tb = theta_bautin(p.u_m, kEta, p.delta_star);
    const auto fb = fold_points(tb, kEta);
    const double dh = canard_delta(fb[0].u, kEta);
    const double d1 = bautin_transversality(fam, dh, tb, 1e-4);
    const double d2 = bautin_transversality(fam, dh, tb, 5e-5);
    CHECK(std::abs(d1) > 1e-10);
    CHECK(std::abs(d2 - d1) < 0.01 * std::abs(d1));
    CHECK_THROWS_AS(bautin_transversality(fam, dh, tb, 0.0), ValidationError);

    BautinFamily flat;
    flat.alpha = [](double d, double t) { return d - 2 * t; };
    flat.l1 = [](double, double) { return 0.3; };
    CHECK(bautin_transversality(flat, 0.2, 0.05, 1e-4) == 0.0);
}

#include "canard/normal_form.hpp"

#include <cmath>
#include <sstream>

#include "canard/errors.hpp"
#include "canard/model.hpp"

namespace canard {

namespace {

constexpr double kSmallDenominator = 1e-12;

cplx checked_div(cplx num, cplx den, const char* what) {
    if (std::abs(den) < kSmallDenominator) {
        throw NumericalError(std::string("small denominator in ") + what);
    }
    return num / den;
}

}  // namespace

double canard_delta(double u_fold, double eta) {
    return u_fold * u_fold / (u_fold * u_fold + eta);
}

CanardExpansion expansion_at(double u_m, double theta, double eta, double delta_star) {
    CanardExpansion e;
    e.u_m = u_m;
    e.theta = theta;
    e.eta = eta;
    e.delta_star = delta_star;
    e.v_m = phi(u_m, theta, eta);

    const double ds = delta_star;
    const double k = ds * eta / (1.0 - ds);  // equals u_m^2 on the canard point
    e.a10 = 0.0;
    e.a01 = -u_m * u_m;
    e.a11 = -2.0 * u_m;
    e.a21 = -2.0;
    e.a50 = -120.0;
    e.a20 = 4.0 * k * (3.0 - 3.0 * theta - 5.0 * u_m) + 2.0 * eta * (1.0 - 3.0 * u_m - theta) +
            6.0 * theta * u_m - 2.0 * e.v_m;
    e.a30 = 24.0 * (1.0 - theta) * u_m + 6.0 * (theta - eta) - 60.0 * k;
    e.a40 = 24.0 * (1.0 - theta) - 120.0 * u_m;
    e.b01 = 0.0;
    e.b10 = 2.0 * (1.0 - ds) * u_m * e.v_m;
    e.b20 = 2.0 * (1.0 - ds) * e.v_m;
    e.b11 = 2.0 * (1.0 - ds) * u_m;
    e.b21 = 2.0 * (1.0 - ds);
    return e;
}

CanardExpansion taylor_coefficients(const FoldPoint& fold, double theta, double eta, double delta_star) {
    if (fold.degenerate) {
        throw ValidationError("canard analysis refuses a degenerate fold");
    }
    if (!(delta_star > 0.0 && delta_star < 1.0)) {
        throw ValidationError("delta* must lie in (0, 1)");
    }
    const double u_star = interior_u(delta_star, eta);
    if (std::abs(u_star - fold.u) > 1e-8) {
        std::ostringstream msg;
        msg << "canard condition violated: u*(delta*) = " << u_star << " differs from fold abscissa "
            << fold.u;
        throw ValidationError(msg.str());
    }
    CanardExpansion e = expansion_at(fold.u, theta, eta, delta_star);
    if (std::abs(e.a20) < 1e-8) {
        throw ValidationError("degenerate fold: |a20| < 1e-8");
    }
    if (e.a01 == 0.0 || e.b10 == 0.0) {
        throw ValidationError("non-degeneracy condition violated: a01 and b10 must be nonzero");
    }
    return e;
}

BlowupChart blowup_chart(const CanardExpansion& e, double epsilon, double lambda2) {
    if (!(epsilon > 0.0)) {
        throw ValidationError("blow-up chart requires epsilon > 0");
    }
    BlowupChart c;
    const double r = std::sqrt(epsilon);
    const double l = lambda2;
    c.r2 = r;
    c.lambda2 = l;

    const double s = e.u_m * e.u_m + e.eta;
    const double K = e.v_m * s;
    const double G = 2.0 * e.u_m * e.v_m * e.v_m * s - e.b20 / (2.0 * e.b10) * e.v_m * e.v_m * s * s;

    c.u2e = K / e.b10 * l + G / (e.b10 * e.b10) * r * l * l;
    c.v2e = -e.a20 / (2.0 * e.a01 * e.b10 * e.b10) * K * K * l * l;

    c.alpha11 = e.a20 / e.b10 * K * l + e.a20 / (e.b10 * e.b10) * G * r * l * l +
                (e.a30 - e.a20 * e.a11 / e.a01) * K * K / (2.0 * e.b10 * e.b10) * r * l * l;
    c.alpha12 = e.a01 + e.a11 / e.b10 * K * r * l;
    c.alpha21 = e.b10 - 2.0 * e.u_m * e.v_m * r * l + e.b20 / e.b10 * K * r * l;
    c.alpha22 = e.b11 / e.b10 * K * r * r * l - s * r * r * l;

    const double trace = c.alpha11 + c.alpha22;
    const double disc = 4.0 * (c.alpha11 * c.alpha22 - c.alpha12 * c.alpha21) - trace * trace;
    if (!(disc > 0.0)) {
        throw NumericalError("chart eigenvalues are not complex (outside the oscillatory regime)");
    }
    c.mu = cplx(trace / 2.0, std::sqrt(disc) / 2.0);
    c.beta0 = std::sqrt(-e.a01 * e.b10);

    c.q = {cplx(c.alpha12, 0.0), c.mu - c.alpha11};
    const cplx den = 2.0 * c.alpha12 * std::conj(c.mu) - c.alpha12 * trace;
    c.p = {(std::conj(c.mu) - c.alpha22) / den, cplx(c.alpha12, 0.0) / den};

    PrimedCoefficients& pc = c.primed;
    pc.a10 = c.alpha11;
    pc.a01 = c.alpha12;
    pc.b10 = c.alpha21;
    pc.b01 = c.alpha22;
    pc.a20 = e.a20 + e.a30 / e.b10 * K * r * l;
    pc.a11 = e.a11 * r + e.a21 / e.b10 * K * r * l;
    pc.a30 = e.a30 * r + e.a40 / e.b10 * K * r * l;
    pc.a21 = e.a21 * r * r;
    pc.a40 = e.a40 * r * r;
    pc.a50 = e.a50 * r * r * r;
    pc.b20 = e.b20 * r - 2.0 * e.v_m * r * l;
    pc.b11 = e.b11 * r * r;
    pc.b21 = e.b21 * r * r * r;
    return c;
}

NormalFormCoeffs g_coefficients(const BlowupChart& ch) {
    const PrimedCoefficients& a = ch.primed;
    const cplx q1 = ch.q[0], q2 = ch.q[1];
    const cplx P1 = std::conj(ch.p[0]), P2 = std::conj(ch.p[1]);
    const cplx Q1 = std::conj(q1), Q2 = std::conj(q2);

    NormalFormCoeffs nf{};
    GCoefficients& g = nf.g;
    g.g20 = P1 * (a.a20 * q1 * q1 + 2.0 * a.a11 * q1 * q2) + P2 * (a.b20 * q1 * q1 + 2.0 * a.b11 * q1 * q2);
    g.g11 = P1 * (a.a20 * q1 * Q1 + a.a11 * (q1 * Q2 + q2 * Q1)) +
            P2 * (a.b20 * q1 * Q1 + a.b11 * (q1 * Q2 + q2 * Q1));
    g.g02 = P1 * (a.a20 * Q1 * Q1 + 2.0 * a.a11 * Q1 * Q2) + P2 * (a.b20 * Q1 * Q1 + 2.0 * a.b11 * Q1 * Q2);

    g.g30 = P1 * (a.a30 * q1 * q1 * q1 + 3.0 * a.a21 * q1 * q1 * q2) + 3.0 * a.b21 * P2 * q1 * q1 * q2;
    g.g21 = P1 * (a.a30 * q1 * q1 * Q1 + a.a21 * (q1 * q1 * Q2 + 2.0 * q1 * Q1 * q2)) +
            a.b21 * P2 * (q1 * q1 * Q2 + 2.0 * q1 * Q1 * q2);
    g.g12 = P1 * (a.a30 * q1 * Q1 * Q1 + a.a21 * (Q1 * Q1 * q2 + 2.0 * q1 * Q1 * Q2)) +
            a.b21 * P2 * (Q1 * Q1 * q2 + 2.0 * q1 * Q1 * Q2);
    g.g03 = P1 * (a.a30 * Q1 * Q1 * Q1 + 3.0 * a.a21 * Q1 * Q1 * Q2) + 3.0 * a.b21 * P2 * Q1 * Q1 * Q2;

    auto mono = [&](int i, int j) { return std::pow(q1, i) * std::pow(Q1, j); };
    g.g40 = a.a40 * P1 * mono(4, 0);
    g.g31 = a.a40 * P1 * mono(3, 1);
    g.g22 = a.a40 * P1 * mono(2, 2);
    g.g13 = a.a40 * P1 * mono(1, 3);
    g.g04 = a.a40 * P1 * mono(0, 4);

    g.g50 = a.a50 * P1 * mono(5, 0);
    g.g41 = a.a50 * P1 * mono(4, 1);
    g.g32 = a.a50 * P1 * mono(3, 2);
    g.g23 = a.a50 * P1 * mono(2, 3);
    g.g14 = a.a50 * P1 * mono(1, 4);
    g.g05 = a.a50 * P1 * mono(0, 5);
    return nf;
}

NormalFormCoeffs h_and_c(const NormalFormCoeffs& in, cplx mu) {
    NormalFormCoeffs nf = in;
    const GCoefficients& g = nf.g;
    HCoefficients& h = nf.h;
    const cplx mb = std::conj(mu);
    auto C = [](cplx z) { return std::conj(z); };
    auto abs2 = [](cplx z) { return std::norm(z); };

    h.h20 = checked_div(g.g20, mu, "h20");
    h.h11 = checked_div(g.g11, mb, "h11");
    h.h02 = checked_div(g.g02, 2.0 * mb - mu, "h02");

    nf.c1 = checked_div(g.g20 * g.g11 * (2.0 * mu + mb), 2.0 * abs2(mu), "c1") +
            checked_div(abs2(g.g11), mu, "c1") +
            checked_div(abs2(g.g02), 2.0 * (2.0 * mu - mb), "c1") + g.g21 / 2.0;

    h.h30 = checked_div(3.0, mu, "h30") * (g.g20 * h.h20 / 2.0 + g.g11 * C(h.h02) / 2.0 + g.g30 / 6.0);
    h.h12 = checked_div(1.0, 2.0 * mb, "h12") *
            (g.g20 * h.h02 + 2.0 * g.g11 * h.h11 + g.g11 * C(h.h20) + 2.0 * g.g02 * C(h.h11) + g.g12);
    h.h03 = checked_div(1.0, 3.0 * mb - mu, "h03") * (g.g03 + 3.0 * g.g11 * h.h02 + 3.0 * g.g02 * C(h.h20));

    // The resonant cubic term is absorbed by c1, so its h coefficient is zero.
    const cplx h21 = 0.0;
    const cplx c1 = nf.c1;

    h.h40 = checked_div(8.0, mu, "h40") *
            (g.g20 / 2.0 * (h.h20 * h.h20 / 4.0 + h.h30 / 3.0) +
             g.g11 * (C(h.h03) / 6.0 + h.h20 * C(h.h02) / 4.0) + g.g02 * C(h.h02) * C(h.h02) / 8.0 +
             g.g30 * h.h20 / 4.0 + g.g21 * C(h.h02) / 4.0 + g.g40 / 24.0);
    h.h31 = checked_div(6.0, 2.0 * mu + mb, "h31") *
            (g.g20 / 2.0 * (h21 + h.h20 * h.h11) +
             g.g11 * (C(h.h12) / 2.0 + h.h20 * C(h.h11) / 2.0 + h.h11 * C(h.h02) / 2.0 + h.h30 / 6.0) +
             g.g02 / 2.0 * (C(h.h03) / 3.0 + C(h.h11) * C(h.h02)) + g.g30 * h.h11 / 2.0 +
             g.g21 / 2.0 * (h.h20 + C(h.h11)) + g.g12 * C(h.h02) / 2.0 + g.g31 / 6.0 - c1 * h.h20);
    h.h22 = checked_div(4.0, mu + 2.0 * mb, "h22") *
            (g.g20 / 2.0 * (h.h11 * h.h11 + h.h12 + h.h20 * h.h02 / 2.0) +
             g.g11 * (abs2(h.h20) / 4.0 + abs2(h.h11) + abs2(h.h02) / 4.0) +
             g.g21 / 2.0 * (2.0 * h.h11 + C(h.h20) / 2.0) +
             g.g02 / 2.0 * (C(h.h20) * C(h.h02) / 2.0 + C(h.h11) * C(h.h11) + C(h.h12)) +
             g.g30 * h.h02 / 4.0 + g.g12 / 2.0 * (2.0 * C(h.h11) + h.h20 / 2.0) + g.g03 * C(h.h02) / 4.0 +
             g.g22 / 4.0 - 2.0 * h.h11 * c1.real());
    h.h13 = checked_div(2.0, mb, "h13") *
            (g.g20 / 2.0 * (h.h11 * h.h02 + h.h03 / 3.0) +
             g.g11 * (C(h.h30) / 6.0 + h.h12 / 2.0 + h.h11 * C(h.h20) / 2.0 + C(h.h11) * h.h02 / 2.0) +
             g.g02 / 2.0 * (C(h21) + C(h.h11) * C(h.h20)) + g.g21 * h.h02 / 2.0 +
             g.g12 * (h.h11 + C(h.h20)) / 2.0 + g.g03 * C(h.h11) / 2.0 + g.g13 / 6.0 - C(c1) * h.h02);
    h.h04 = checked_div(24.0, 4.0 * mb - mu, "h04") *
            (g.g20 * h.h02 * h.h02 / 8.0 + g.g11 * (h.h03 / 6.0 + h.h02 * C(h.h20) / 4.0) +
             g.g02 / 2.0 * (C(h.h20) * C(h.h20) / 4.0 + C(h.h30) / 3.0) + g.g12 * h.h02 / 4.0 +
             g.g03 * C(h.h20) / 4.0 + g.g04 / 24.0);

    nf.c2 = g.g20 / 2.0 * (h.h20 * h.h12 / 2.0 + h.h22 / 2.0 + h.h30 * h.h02 / 6.0) +
            g.g11 * (C(h.h22) / 4.0 + h.h11 * C(h.h12) / 2.0 + h.h02 * C(h.h03) / 12.0 +
                     h.h30 * C(h.h20) / 12.0 + h.h12 * C(h.h02) / 4.0 + h.h31 / 6.0) +
            g.g02 / 2.0 * (C(h.h20) * C(h.h03) / 6.0 + C(h.h11) * C(h.h12) + C(h.h13) / 3.0) +
            g.g30 / 6.0 * (3.0 * h.h11 * h.h11 + 3.0 * h.h12 / 2.0 + 3.0 * h.h20 * h.h02 / 2.0) +
            g.g21 / 2.0 * (abs2(h.h20) / 2.0 + 2.0 * abs2(h.h11) + h.h20 * h.h11 + abs2(h.h02) / 2.0) +
            g.g12 / 2.0 * (h.h30 / 6.0 + C(h.h11) * C(h.h11) + C(h.h11) * h.h20 + h.h11 * C(h.h02) +
                           C(h.h12) + C(h.h02) * C(h.h20) / 2.0) +
            g.g03 / 6.0 * (C(h.h03) / 2.0 + 3.0 * C(h.h11) * C(h.h02)) + g.g40 * h.h02 / 12.0 +
            g.g31 / 6.0 * (3.0 * h.h11 + C(h.h20) / 2.0) + g.g22 / 4.0 * (2.0 * C(h.h11) + h.h20) +
            g.g13 * C(h.h02) / 4.0 + g.g32 / 12.0;
    return nf;
}

double criticality_constant(const CanardExpansion& e) {
    return e.a01 * e.a20 * e.b20 - e.a01 * e.a30 * e.b10 + e.a11 * e.a20 * e.b10;
}

FirstLyapunov first_lyapunov(const CanardExpansion& e, double epsilon) {
    FirstLyapunov out;
    out.A = criticality_constant(e);
    const double beta0 = std::sqrt(-e.a01 * e.b10);
    out.L1 = -e.a01 * out.A * std::sqrt(epsilon) / (4.0 * beta0 * e.b10);
    return out;
}

double first_lyapunov_pipeline(const CanardExpansion& e, double epsilon) {
    const BlowupChart ch = blowup_chart(e, epsilon, 0.0);
    const NormalFormCoeffs nf = g_coefficients(ch);
    const double beta = ch.beta();
    const cplx i(0.0, 1.0);
    return (i * nf.g.g20 * nf.g.g11 + ch.beta0 * nf.g.g21).real() / (2.0 * beta * beta);
}

double theta_bautin(double u_m, double eta, double ds) {
    const double u = u_m;
    const double num = u * ((-1.0 + ds) * u * u * u + (-5.0 * ds + 5.0) * u * u - eta * (-1.0 + ds) * u -
                            6.0 * ds * eta);
    const double den = (5.0 * ds - 5.0) * u * u * u + (-1.0 + ds) * u * u + 6.0 * ds * eta * u -
                       eta * (-1.0 + ds);
    if (std::abs(den) < 1e-14) {
        throw NumericalError("theta_B denominator vanishes");
    }
    return -num / den;
}

SecondLyapunov second_lyapunov(const CanardExpansion& e, double epsilon, double locus_tol) {
    SecondLyapunov out;
    out.A = criticality_constant(e);
    const double a01 = e.a01, a11 = e.a11, a20 = e.a20, a30 = e.a30, a40 = e.a40, a50 = e.a50, a21 = e.a21;
    const double b10 = e.b10, b20 = e.b20, b11 = e.b11, b21 = e.b21;
    const double beta0 = std::sqrt(-a01 * b10);
    const double bracket =
        18.0 * a11 * a11 * a11 * a20 * b10 * b10 + (27.0 * a20 * b20 - 2.0 * a30 * b10) * a01 * a11 * a11 * b10 +
        (7.0 * a30 * b10 * b20 - 27.0 * b20 * b20 * a20 - 10.0 * b10 * b10 * a40) * a01 * a01 * a11 +
        2.0 * (10.0 * a40 * b20 - 3.0 * a50 * b10) * a01 * a01 * a01 * b10 +
        (48.0 * b20 * a20 * a20 * b11 + 36.0 * a21 * a30 * b10 * b10 - 30.0 * a20 * a20 * b21 * b10) * a01 * a01;
    out.B = std::pow(a01, 4) * b10 / (144.0 * std::pow(beta0, 7)) * bracket;
    out.L2 = out.B * std::pow(epsilon, 1.5);
    out.on_locus = std::abs(out.A) <= locus_tol;
    if (!out.on_locus) {
        std::ostringstream msg;
        msg << "second Lyapunov coefficient evaluated off the Bautin locus (|A| = " << std::abs(out.A)
            << " > " << locus_tol << ")";
        out.warning = msg.str();
    }
    return out;
}

double l2_compact(const NormalFormCoeffs& nf, double beta) {
    if (beta == 0.0) {
        throw NumericalError("compact L2 formula needs beta != 0");
    }
    const GCoefficients& g = nf.g;
    auto C = [](cplx z) { return std::conj(z); };
    const double b = beta;
    double t = g.g32.real() / b;
    t += (g.g20 * C(g.g31) - g.g11 * (4.0 * g.g31 + 3.0 * C(g.g22)) - g.g02 * (g.g40 + C(g.g13)) / 3.0 -
          g.g30 * g.g12)
             .imag() /
         (b * b);
    t += ((g.g20 * (C(g.g11) * (3.0 * g.g12 - C(g.g30)) + g.g02 * (C(g.g12) - g.g30 / 3.0) +
                    C(g.g02) * g.g03 / 3.0) +
           g.g11 * (C(g.g02) * (5.0 / 3.0 * C(g.g30) + 3.0 * g.g12) + g.g02 * C(g.g03) / 3.0 -
                    4.0 * g.g11 * g.g30))
              .real() +
          3.0 * (g.g20 * g.g11).imag() * g.g21.imag()) /
         (b * b * b);
    t += ((g.g11 * C(g.g02) * (C(g.g20) * C(g.g20) - 3.0 * C(g.g20) * g.g11 - 4.0 * g.g11 * g.g11)).imag() +
          (g.g20 * g.g11).imag() * (3.0 * (g.g20 * g.g11).real() - 2.0 * std::norm(g.g02))) /
         (b * b * b * b);
    return t / 12.0;
}

double second_lyapunov_pipeline(const CanardExpansion& e, double epsilon) {
    const BlowupChart ch = blowup_chart(e, epsilon, 0.0);
    const NormalFormCoeffs nf = h_and_c(g_coefficients(ch), ch.mu);
    return nf.c2.real() / ch.beta();
}

Thresholds thresholds(const CanardExpansion& e, double epsilon) {
    if (e.a20 == 0.0) {
        throw NumericalError("maximal canard formula needs a20 != 0");
    }
    const double A = criticality_constant(e);
    Thresholds t;
    t.delta_H = e.delta_star;
    t.delta_C = e.delta_star -
                e.b10 / (2.0 * std::pow(e.a20, 3) * e.v_m * (e.u_m * e.u_m + e.eta)) * A * epsilon;
    return t;
}

std::string to_string(Criticality c) {
    switch (c) {
        case Criticality::supercritical: return "supercritical";
        case Criticality::subcritical: return "subcritical";
        case Criticality::degenerate: return "degenerate";
    }
    return "?";
}

Criticality classify_hopf(double A, double tol) {
    if (std::abs(A) < tol) return Criticality::degenerate;
    return A < 0.0 ? Criticality::supercritical : Criticality::subcritical;
}

BautinFamily model_bautin_family(double eta, double epsilon, FoldKind kind) {
    auto chart_at = [eta, epsilon, kind](double delta, double theta) {
        const auto folds = fold_points(theta, eta);
        const FoldPoint* fold = nullptr;
        for (const auto& f : folds) {
            if (f.kind == kind) fold = &f;
        }
        if (fold == nullptr) {
            throw NumericalError("Bautin family: requested fold disappears at theta = " + std::to_string(theta));
        }
        const double ds = canard_delta(fold->u, eta);
        const CanardExpansion e = expansion_at(fold->u, theta, eta, ds);
        const double r2 = std::sqrt(epsilon);
        return blowup_chart(e, epsilon, (delta - ds) / r2);
    };
    BautinFamily fam;
    fam.alpha = [chart_at](double delta, double theta) { return chart_at(delta, theta).alpha(); };
    fam.l1 = [chart_at](double delta, double theta) {
        const BlowupChart ch = chart_at(delta, theta);
        const NormalFormCoeffs nf = h_and_c(g_coefficients(ch), ch.mu);
        return nf.c1.real() / ch.beta();
    };
    return fam;
}

double bautin_transversality(const BautinFamily& fam, double delta_H, double theta_B, double step) {
    if (!(step > 0.0)) {
        throw ValidationError("finite-difference step must be positive");
    }
    const double h = step;
    auto central = [h](const std::function<double(double, double)>& fn, double d, double t, bool wrt_delta) {
        if (wrt_delta) return (fn(d + h, t) - fn(d - h, t)) / (2.0 * h);
        return (fn(d, t + h) - fn(d, t - h)) / (2.0 * h);
    };
    const double ad = central(fam.alpha, delta_H, theta_B, true);
    const double at = central(fam.alpha, delta_H, theta_B, false);
    const double ld = central(fam.l1, delta_H, theta_B, true);
    const double lt = central(fam.l1, delta_H, theta_B, false);
    return ad * lt - at * ld;
}

}  // namespace canard

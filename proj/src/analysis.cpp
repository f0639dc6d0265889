#include "canard/analysis.hpp"

#include <functional>

#include "canard/errors.hpp"
#include "canard/manifold.hpp"
#include "canard/model.hpp"
#include "canard/normal_form.hpp"

namespace canard {

namespace {

void guarded(Report& r, const std::string& key, const std::function<void()>& body) {
    try {
        body();
    } catch (const Error& e) {
        r.add(key, std::string("unavailable: ") + e.what());
    }
}

}  // namespace

Report analyze(const Params& p, double transversality_step) {
    p.validate();
    Report r;
    r.add("delta", p.delta);
    r.add("theta", p.theta);
    r.add("eta", p.eta);
    r.add("epsilon", p.epsilon);
    r.add("transcritical_threshold", transcritical_threshold(p.eta));

    const auto eqs = equilibria(p);
    for (const auto& e : eqs) {
        const std::string k = to_string(e.kind);
        r.add(k + ".u", e.u);
        r.add(k + ".v", e.v);
        r.add(k + ".stability", to_string(e.stability));
        if (e.branch) r.add(k + ".branch", to_string(*e.branch));
    }

    const RegionReport region = classify_region(p.theta, p.eta);
    r.add("region", to_string(region.region));
    r.add("fold_count", region.numeric_root_count);
    r.add("Gamma", region.gamma);
    r.add("Lambda1", region.lambda1);
    r.add("Lambda2", region.lambda2);

    const auto folds = fold_points(p.theta, p.eta);
    for (std::size_t i = 0; i < folds.size(); ++i) {
        const std::string k = "fold" + std::to_string(i + 1);
        r.add(k + ".u", folds[i].u);
        r.add(k + ".v", folds[i].v);
        r.add(k + ".kind", to_string(folds[i].kind));
        r.add(k + ".degenerate", folds[i].degenerate);
    }
    if (folds.size() != 2) {
        r.add("canard_analysis", "skipped: fewer-than-two-folds");
        return r;
    }

    for (const auto& f : folds) {
        const std::string k = f.kind == FoldKind::local_min ? "P" : "Q";
        const double ds = canard_delta(f.u, p.eta);
        r.add(k + ".delta_star", ds);
        guarded(r, k + ".hopf", [&] {
            const CanardExpansion e = taylor_coefficients(f, p.theta, p.eta, ds);
            const FirstLyapunov l1 = first_lyapunov(e, p.epsilon);
            const Thresholds th = thresholds(e, p.epsilon);
            const std::pair<const char*, double> coeffs[] = {
                {"a01", e.a01}, {"a20", e.a20}, {"a11", e.a11}, {"a30", e.a30}, {"a21", e.a21}, {"a40", e.a40},
                {"a50", e.a50}, {"b10", e.b10}, {"b20", e.b20}, {"b11", e.b11}, {"b21", e.b21}};
            for (const auto& [name, value] : coeffs) r.add(k + "." + name, value);
            r.add(k + ".A", l1.A);
            r.add(k + ".L1", l1.L1);
            r.add(k + ".criticality", to_string(classify_hopf(l1.A)));
            r.add(k + ".delta_H", th.delta_H);
            r.add(k + ".delta_C", th.delta_C);
        });
    }

    const FoldPoint& P = folds.front();
    const double ds = canard_delta(P.u, p.eta);
    guarded(r, "bautin", [&] {
        const double tb = theta_bautin(P.u, p.eta, ds);
        r.add("theta_B", tb);
        const SecondLyapunov l2 = second_lyapunov(expansion_at(P.u, tb, p.eta, ds), p.epsilon);
        r.add("B", l2.B);
        r.add("L2", l2.L2);
        if (!l2.warning.empty()) r.add("B.warning", l2.warning);
        guarded(r, "bautin_transversality", [&] {
            const BautinFamily fam = model_bautin_family(p.eta, p.epsilon, FoldKind::local_min);
            const auto fb = fold_points(tb, p.eta);
            if (fb.size() != 2) throw ValidationError("fewer than two folds at theta_B");
            const double dhb = canard_delta(fb.front().u, p.eta);
            r.add("bautin_transversality", bautin_transversality(fam, dhb, tb, transversality_step));
        });
    });
    return r;
}

}  // namespace canard

#pragma once

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <string>

#include "canard/errors.hpp"

namespace canard::detail {

// Root of fn on [lo, hi]; fn(lo) and fn(hi) must differ in sign (or vanish).
template <class Fn>
double bracketed_root(Fn&& fn, double lo, double hi, const std::string& what,
                      double abs_tol = 0.0) {
    double flo = fn(lo);
    double fhi = fn(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        throw NumericalError("bracket failure in " + what + ": no sign change on [" +
                             std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    std::uintmax_t iterations = 200;
    auto tol = [abs_tol](double a, double b) {
        return std::abs(b - a) <= std::max(abs_tol, 4.0 * 2.220446049250313e-16 * std::max(std::abs(a), std::abs(b)));
    };
    auto r = boost::math::tools::toms748_solve(fn, lo, hi, flo, fhi, tol, iterations);
    const double a = r.first;
    const double b = r.second;
    return std::abs(fn(a)) <= std::abs(fn(b)) ? a : b;
}

}  // namespace canard::detail

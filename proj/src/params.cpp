#include "canard/params.hpp"

#include <cmath>
#include <sstream>

#include "canard/errors.hpp"

namespace canard {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << "parameter '" << name << "' must be a finite positive number (got " << value << ")";
        throw ValidationError(msg.str());
    }
}

}  // namespace

void Params::validate() const {
    require_positive(delta, "delta");
    require_positive(theta, "theta");
    require_positive(eta, "eta");
    require_positive(epsilon, "epsilon");
    if (!(epsilon < 1.0)) {
        throw ValidationError("parameter 'epsilon' must be < 1");
    }
}

std::vector<std::string> Params::advisories() const {
    std::vector<std::string> notes;
    if (epsilon >= 0.1) {
        notes.push_back("epsilon >= 0.1: slow-fast asymptotics may be inaccurate");
    }
    if (theta >= 1.0) {
        notes.push_back("theta >= 1: outside the unit square used for the model's nominal range");
    }
    if (eta >= 1.0) {
        notes.push_back("eta >= 1: outside the unit square used for the model's nominal range");
    }
    return notes;
}

void DimensionalParams::validate() const {
    require_positive(r, "r");
    require_positive(K, "K");
    require_positive(m, "m");
    require_positive(p, "p");
    require_positive(q, "q");
    require_positive(c, "c");
    require_positive(d, "d");
}

}  // namespace canard

#include "invpend/bound_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace invpend {

bool BoundSetSpec::satisfies_invariants(double G, double F_norm) const {
    if (!(a > 0.0 && a < 1.0 && b > 0.0)) {
        return false;
    }
    if (dim == 1) {
        return G * a - F_norm * std::sqrt(1.0 - a * a) > 0.0 &&
               b * b > (1.0 + a) * F_norm / (1.0 - a);
    }
    const double om = 1.0 - a;
    return G * a * std::sqrt(1.0 + a) - (1.0 + a) * F_norm * std::sqrt(om) > 0.0 &&
           b * b * b * b > 16.0 * F_norm * F_norm / (om * om * om) && b * b > F_norm;
}

void BoundSetSpec::validate() const {
    check_dim(dim);
    if (!(a > 0.0 && a < 1.0)) {
        throw std::invalid_argument("bound set: a must lie in (0, 1)");
    }
    if (!(b > 0.0) || !std::isfinite(b)) {
        throw std::invalid_argument("bound set: b must be positive and finite");
    }
}

Containment check_containment(const Trajectory& orbit, const BoundSetSpec& spec, int samples) {
    spec.validate();
    Containment out{spec, 0.0, -std::numeric_limits<double>::infinity(), false};
    auto visit = [&](const PhaseState& s) {
        out.max_abs_x = std::max(out.max_abs_x, s.x.norm());
        out.max_cone = std::max(out.max_cone, spec.n(s));
    };
    for (std::size_t i = 0; i < orbit.size(); ++i) {
        visit(orbit.state(i));
    }
    const double t0 = orbit.t_begin();
    const double t1 = orbit.t_end();
    for (int k = 0; k <= samples; ++k) {
        visit(orbit.dense_eval(t0 + (t1 - t0) * k / std::max(samples, 1)));
    }
    out.inside = out.max_abs_x <= spec.a && out.max_cone <= 0.0;
    return out;
}

}  // namespace invpend

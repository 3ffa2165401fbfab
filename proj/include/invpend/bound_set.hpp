#pragma once

#include "invpend/integrator.hpp"
#include "invpend/types.hpp"

namespace invpend {

/// The set {|x| <= a} intersected with {b|x| + |p| <= b} in (x, p) space.
struct BoundSetSpec {
    double a = 0.5;
    double b = 1.0;
    int dim = 1;

    /// m_a = (|x|^2 - a^2)/2; <= 0 inside the cylinder.
    double m(const PhaseState& s) const { return 0.5 * (s.x.squaredNorm() - a * a); }
    /// n_b = b|x| + |p| - b; <= 0 inside the cone.
    double n(const PhaseState& s) const { return b * s.x.norm() + s.p.norm() - b; }
    bool contains(const PhaseState& s) const { return m(s) <= 0.0 && n(s) <= 0.0; }

    /// Strict analytic conditions from the lemmas for the given ||F|| and G:
    /// linear  G a - ||F|| sqrt(1-a^2) > 0 and b^2 > (1+a) ||F|| / (1-a);
    /// planar  G a sqrt(1+a) - (1+a) ||F|| sqrt(1-a) > 0, b^4 > 16 ||F||^2 / (1-a)^3,
    ///         b^2 > ||F||.
    bool satisfies_invariants(double G, double F_norm) const;

    void validate() const;
};

struct Containment {
    BoundSetSpec spec;
    double max_abs_x = 0.0;
    /// max over the orbit of b|x| + |p| - b (<= 0 when inside the cone).
    double max_cone = 0.0;
    bool inside = false;
};

/// Samples the trajectory's nodes plus `samples` uniformly spaced dense-output
/// points and reports the worst |x| and cone value.
Containment check_containment(const Trajectory& orbit, const BoundSetSpec& spec,
                              int samples = 4000);

}  // namespace invpend

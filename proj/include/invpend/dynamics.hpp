#pragma once

#include "invpend/forcing.hpp"
#include "invpend/types.hpp"

namespace invpend {

/// Rescaled gravity G = g/l, homotopy parameter lambda, and dimension.
struct ModelParams {
    double G = 9.81;
    double lambda = 1.0;
    int dim = 1;

    void validate() const;
    ModelParams with_lambda(double l) const {
        ModelParams out = *this;
        out.lambda = l;
        return out;
    }
};

/// States with |x| >= 1 - kSingularityGuard are rejected by the right-hand sides.
inline constexpr double kSingularityGuard = 1e-12;

struct Derivative {
    Vec xdot;
    Vec pdot;
};

/// Linear carriage: x' = p, p' = (G sqrt(1-x^2) - p^2/(1-x^2)) x - lambda (1-x^2) F(t).
Derivative rhs_linear(double t, const PhaseState& s, const ModelParams& params,
                      const PeriodicSignal& F);

/// Planar carriage: x' = p, p' = R x + Phi with
/// R = G sqrt(1-|x|^2) - (x.p)^2/(1-|x|^2) - |p|^2 and Phi = lambda ((x.F) x - F).
Derivative rhs_planar(double t, const PhaseState& s, const ModelParams& params,
                      const PeriodicSignal& F);

/// Dispatches on params.dim.
Derivative rhs(double t, const PhaseState& s, const ModelParams& params, const PeriodicSignal& F);

/// The scalar and vector pieces of p' = R x + Phi and their partial derivatives.
///
/// Valid for d = 1 too, where the planar formulas collapse to the linear
/// equation (R = G sqrt(1-x^2) - p^2/(1-x^2), Phi = -lambda (1-x^2) F).
struct PendulumTerms {
    double R = 0.0;
    RowVec dR_dx;
    RowVec dR_dp;
    Vec Phi;
    Vec dPhi_dt;
    DimMat dPhi_dx;
};

PendulumTerms pendulum_terms(double t, const PhaseState& s, const ModelParams& params,
                             const PeriodicSignal& F);

enum class JacobianMode { Analytic, FiniteDifference };

/// d(x', p')/d(x, p), a 2d x 2d matrix.
StateMat jacobian(double t, const PhaseState& s, const ModelParams& params, const PeriodicSignal& F,
                  JacobianMode mode = JacobianMode::Analytic);

/// Partial derivative of (x', p') with respect to t (only Phi depends on t).
StateVec time_derivative(double t, const PhaseState& s, const ModelParams& params,
                         const PeriodicSignal& F);

struct HeightReadout {
    double y;
};

/// y = sqrt(1 - |x|^2); a negative radicand below 1e-14 in magnitude is clamped to 0.
HeightReadout height(const PhaseState& s);

/// Throws SingularityError when |x| >= 1 - kSingularityGuard.
void check_regular(const PhaseState& s);

}  // namespace invpend

#pragma once

#include "invpend/bound_set.hpp"
#include "invpend/dynamics.hpp"
#include "invpend/forcing.hpp"
#include "invpend/integrator.hpp"
#include "invpend/parallel.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace invpend {

struct ContinuationConfig {
    double lambda_step_init = 0.1;
    double lambda_step_min = 1e-4;
    double newton_tol = 1e-10;
    int newton_max_iters = 25;
    double fd_step = 1e-7;
    /// Jacobian used by the Newton corrector.
    enum class Jacobian { FiniteDifference, Variational } jacobian = Jacobian::Variational;
    /// Condition number of P' - I above which Newton gives up.
    double max_condition = 1e12;

    void validate() const;
};

struct LambdaNode {
    double lambda;
    PhaseState fixed_point;
    double residual;
};

struct PeriodicOrbitResult {
    PhaseState fixed_point;
    double residual = 0.0;  // |P(z) - z|
    double lambda = 1.0;
    std::vector<LambdaNode> lambda_path;
    Trajectory orbit;
    std::optional<Containment> containment;
    StateMat monodromy;  // DP at the fixed point
    int newton_iterations = 0;
};

/// P(z) = Psi(0, T, z). Throws FallError if the trajectory falls first.
PhaseState poincare_map(const PhaseState& z, const ModelParams& params, const PeriodicSignal& F,
                        const IntegratorConfig& cfg);

enum class PoincareJacobianMode { FiniteDifference, Variational };

/// DP(z). FiniteDifference: central differences with step fd_step (1 + |z|),
/// one column pair per task (OpenMP under Execution::Parallel).
/// Variational: integrates Y' = Dw(t, z(t)) Y with Y(0) = I alongside the orbit.
StateMat poincare_jacobian(const PhaseState& z, const ModelParams& params, const PeriodicSignal& F,
                           const IntegratorConfig& cfg, PoincareJacobianMode mode,
                           double fd_step = 1e-7, Execution exec = Execution::Parallel);

/// Newton iteration on P(z) - z = 0 from z0 at fixed lambda.
///
/// Throws NewtonFailure (ill-conditioned or no convergence) or FallError.
/// After reaching newton_tol it keeps iterating while the residual still
/// drops by at least half, up to three extra steps.
PeriodicOrbitResult newton_correct(const PhaseState& z0, const ModelParams& params,
                                   const PeriodicSignal& F, const IntegratorConfig& cfg,
                                   const ContinuationConfig& ccfg);

/// Natural-parameter continuation from the lambda = 0 equilibrium at the
/// origin to lambda = 1 with a zeroth-order predictor. Steps halve on any
/// Newton failure (including a fall) and grow by 1.5 on success. With
/// identically zero forcing lambda has no effect and a single step is taken.
///
/// Throws ContinuationStuck when the step drops below lambda_step_min.
PeriodicOrbitResult continue_in_lambda(const ModelParams& params_at_zero, const PeriodicSignal& F,
                                       const IntegratorConfig& cfg,
                                       const ContinuationConfig& ccfg,
                                       const std::optional<BoundSetSpec>& bound_set = std::nullopt);

/// JSON document with fixed point, residual, lambda path, monodromy and its
/// eigenvalues, and containment (when present).
void write_orbit_json(std::ostream& out, const PeriodicOrbitResult& result);

}  // namespace invpend

#pragma once

#include "invpend/dynamics.hpp"
#include "invpend/forcing.hpp"
#include "invpend/types.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

namespace invpend {

struct IntegratorConfig {
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    double max_step = std::numeric_limits<double>::infinity();
    /// |x| at which the rod counts as fallen.
    double fall_threshold = 1.0 - 1e-6;
    std::size_t max_steps = 1'000'000;

    void validate() const;
};

namespace ode {

using RhsFn = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;
/// Terminal event: integration stops where the value first becomes >= 0.
using EventFn = std::function<double(double t, const Eigen::VectorXd& y)>;

/// Continuous extension of a Dormand-Prince step: y(t0 + s h) from five
/// coefficient vectors.
struct DenseSegment {
    double t0 = 0.0;
    double h = 0.0;
    Eigen::Matrix<double, Eigen::Dynamic, 5> coeffs;

    Eigen::VectorXd eval(double t) const;
};

class DenseSolution {
  public:
    std::vector<double> times;
    std::vector<Eigen::VectorXd> values;
    std::vector<DenseSegment> segments;  // segments[i] spans times[i]..times[i+1]

    double t_begin() const { return times.front(); }
    double t_end() const { return times.back(); }
    /// Interpolated state; t outside the span is clamped.
    Eigen::VectorXd eval(double t) const;
};

struct SolveStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
};

struct SolveResult {
    DenseSolution solution;
    std::optional<double> event_time;
    SolveStats stats;
};

/// Adaptive Dormand-Prince 5(4) from t0 to t1 (either direction).
///
/// A SingularityError thrown by the right-hand side rejects the trial step
/// and shrinks it. The optional terminal event is located by bisection on the
/// step's interpolant to a bracket of 1e-12 (relative to max(1, |t|)); the
/// solution is truncated at the upper end of that bracket.
SolveResult dopri5(const RhsFn& f, double t0, double t1, const Eigen::VectorXd& y0,
                   const IntegratorConfig& cfg, const EventFn* terminal = nullptr);

}  // namespace ode

enum class EventKind { FallPositive, FallNegative, FallPlanar, BoundaryExit };

const char* to_string(EventKind kind);

struct TrajectoryEvent {
    double time;
    EventKind kind;
};

/// Solution of one lambda-system over [t0, t1] (or up to the first fall).
/// Immutable once built.
class Trajectory {
  public:
    Trajectory(ode::DenseSolution solution, int dim, std::vector<TrajectoryEvent> events,
               ode::SolveStats stats = {});

    int dim() const { return dim_; }
    const std::vector<double>& t_nodes() const { return solution_.times; }
    std::size_t size() const { return solution_.times.size(); }
    PhaseState state(std::size_t i) const { return PhaseState::unpack(solution_.values[i]); }
    PhaseState dense_eval(double t) const { return PhaseState::unpack(solution_.eval(t)); }
    PhaseState final_state() const { return state(size() - 1); }
    double t_begin() const { return solution_.t_begin(); }
    double t_end() const { return solution_.t_end(); }

    const std::vector<TrajectoryEvent>& events() const { return events_; }
    std::optional<TrajectoryEvent> fall_event() const;
    bool fell() const { return fall_event().has_value(); }
    const ode::SolveStats& stats() const { return stats_; }

    /// Columns t,x1[,x2],p1[,p2],y at every node, 17 significant digits.
    void write_csv(std::ostream& out) const;

  private:
    ode::DenseSolution solution_;
    int dim_;
    std::vector<TrajectoryEvent> events_;
    ode::SolveStats stats_;
};

struct EvolveOptions {
    /// Optional region monitor e(s) <= 0; each crossing to e > 0 is recorded
    /// as a BoundaryExit event (non-terminal).
    std::function<double(const PhaseState&)> exit_region;
};

/// Evolution operator: the solution through s0 at t0, on [t0, t1], stopped at
/// the first time |x| reaches cfg.fall_threshold.
Trajectory evolve(double t0, double t1, const PhaseState& s0, const ModelParams& params,
                  const PeriodicSignal& F, const IntegratorConfig& cfg,
                  const EvolveOptions& options = {});

/// |Psi(T, 2T, z) - Psi(0, T, z)|, or nullopt when either leg falls.
std::optional<double> shift_periodicity_check(const PhaseState& z, const ModelParams& params,
                                              const PeriodicSignal& F,
                                              const IntegratorConfig& cfg);

/// Writes the CSV header matching Trajectory::write_csv.
void write_trajectory_header(std::ostream& out, int dim);

}  // namespace invpend

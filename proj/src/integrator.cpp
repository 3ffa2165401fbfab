#include "invpend/integrator.hpp"

#include "invpend/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace invpend {

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
        throw std::invalid_argument("integrator: tolerances must be positive");
    }
    if (!(max_step > 0.0)) {
        throw std::invalid_argument("integrator: max_step must be positive");
    }
    if (!(fall_threshold > 0.0 && fall_threshold < 1.0)) {
        throw std::invalid_argument("integrator: fall_threshold must lie in (0, 1)");
    }
    if (max_steps == 0) {
        throw std::invalid_argument("integrator: max_steps must be positive");
    }
}

namespace ode {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer, Norsett & Wanner, dopri5 contd5).
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

double scaled_rms(const Eigen::VectorXd& v, const Eigen::VectorXd& ya, const Eigen::VectorXd& yb,
                  const IntegratorConfig& cfg) {
    const auto n = v.size();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(ya[i]), std::abs(yb[i]));
        const double r = v[i] / sc;
        acc += r * r;
    }
    return std::sqrt(acc / double(n));
}

class Stepper {
  public:
    Stepper(const RhsFn& f, std::size_t n) : f_(f), k2(n), k3(n), k4(n), k5(n), k6(n), tmp(n) {}

    // One trial step from (t, y) with slope k1; writes y_new, k7 = f(t+h, y_new)
    // and the error estimate. Returns false if the right-hand side was singular.
    bool attempt(double t, double h, const Eigen::VectorXd& y, const Eigen::VectorXd& k1,
                 Eigen::VectorXd& y_new, Eigen::VectorXd& k7, Eigen::VectorXd& err,
                 SolveStats& stats) {
        try {
            tmp = y + h * a21 * k1;
            eval(t + c2 * h, tmp, k2, stats);
            tmp = y + h * (a31 * k1 + a32 * k2);
            eval(t + c3 * h, tmp, k3, stats);
            tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
            eval(t + c4 * h, tmp, k4, stats);
            tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            eval(t + c5 * h, tmp, k5, stats);
            tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            eval(t + h, tmp, k6, stats);
            y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
            eval(t + h, y_new, k7, stats);
        } catch (const SingularityError&) {
            return false;
        }
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        return y_new.allFinite() && err.allFinite();
    }

    DenseSegment dense(double t, double h, const Eigen::VectorXd& y, const Eigen::VectorXd& y_new,
                       const Eigen::VectorXd& k1, const Eigen::VectorXd& k7) const {
        DenseSegment seg;
        seg.t0 = t;
        seg.h = h;
        seg.coeffs.resize(y.size(), 5);
        const Eigen::VectorXd ydiff = y_new - y;
        const Eigen::VectorXd bspl = h * k1 - ydiff;
        seg.coeffs.col(0) = y;
        seg.coeffs.col(1) = ydiff;
        seg.coeffs.col(2) = bspl;
        seg.coeffs.col(3) = ydiff - h * k7 - bspl;
        seg.coeffs.col(4) = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        return seg;
    }

    void eval(double t, const Eigen::VectorXd& y, Eigen::VectorXd& out, SolveStats& stats) {
        ++stats.rhs_evals;
        f_(t, y, out);
    }

  private:
    const RhsFn& f_;
    Eigen::VectorXd k2, k3, k4, k5, k6, tmp;
};

double initial_step(const RhsFn& f, double t0, double span, const Eigen::VectorXd& y0,
                    const Eigen::VectorXd& f0, const IntegratorConfig& cfg, SolveStats& stats) {
    const double d0 = scaled_rms(y0, y0, y0, cfg);
    const double d1n = scaled_rms(f0, y0, y0, cfg);
    double h0 = (d0 < 1e-10 || d1n < 1e-10) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min({h0, std::abs(span), cfg.max_step});
    const double dir = span >= 0.0 ? 1.0 : -1.0;
    Eigen::VectorXd y1 = y0 + dir * h0 * f0;
    Eigen::VectorXd f1(y0.size());
    try {
        ++stats.rhs_evals;
        f(t0 + dir * h0, y1, f1);
    } catch (const SingularityError&) {
        return h0 * 1e-3;
    }
    const double d2 = scaled_rms(Eigen::VectorXd(f1 - f0), y0, y0, cfg) / h0;
    const double dmax = std::max(d1n, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    return std::min({100.0 * h0, h1, std::abs(span), cfg.max_step});
}

}  // namespace

Eigen::VectorXd DenseSegment::eval(double t) const {
    const double s = h == 0.0 ? 0.0 : (t - t0) / h;
    const double s1 = 1.0 - s;
    return coeffs.col(0) +
           s * (coeffs.col(1) + s1 * (coeffs.col(2) + s * (coeffs.col(3) + s1 * coeffs.col(4))));
}

Eigen::VectorXd DenseSolution::eval(double t) const {
    if (segments.empty()) {
        return values.front();
    }
    const bool forward = times.back() >= times.front();
    if (forward ? t <= times.front() : t >= times.front()) {
        return values.front();
    }
    if (forward ? t >= times.back() : t <= times.back()) {
        return values.back();
    }
    std::size_t i = 0;
    if (forward) {
        auto it = std::upper_bound(times.begin(), times.end(), t);
        i = std::size_t(it - times.begin()) - 1;
    } else {
        auto it = std::upper_bound(times.begin(), times.end(), t, std::greater<double>());
        i = std::size_t(it - times.begin()) - 1;
    }
    i = std::min(i, segments.size() - 1);
    return segments[i].eval(t);
}

SolveResult dopri5(const RhsFn& f, double t0, double t1, const Eigen::VectorXd& y0,
                   const IntegratorConfig& cfg, const EventFn* terminal) {
    cfg.validate();
    SolveResult result;
    auto& sol = result.solution;
    auto& stats = result.stats;
    sol.times.push_back(t0);
    sol.values.push_back(y0);
    const double span = t1 - t0;
    if (span == 0.0) {
        return result;
    }
    const double dir = span > 0.0 ? 1.0 : -1.0;
    const std::size_t n = std::size_t(y0.size());

    Eigen::VectorXd k1(n), k7(n), y_new(n), err(n);
    Stepper stepper(f, n);
    stepper.eval(t0, y0, k1, stats);

    double t = t0;
    Eigen::VectorXd y = y0;
    double g_prev = terminal ? (*terminal)(t0, y0) : -1.0;
    double h = initial_step(f, t0, span, y0, k1, cfg, stats);
    bool last_rejected = false;

    while (dir * (t1 - t) > 0.0) {
        if (stats.accepted + stats.rejected >= cfg.max_steps) {
            throw StepBudgetError("integrator: step budget of " + std::to_string(cfg.max_steps) +
                                  " exceeded at t = " + std::to_string(t));
        }
        const double remaining = std::abs(t1 - t);
        h = std::min({h, cfg.max_step, remaining});
        // Avoid a sliver of a final step.
        if (remaining - h < 1e-12 * std::max(1.0, std::abs(t1))) {
            h = remaining;
        }
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            throw StepSizeUnderflow("integrator: step size underflow at t = " + std::to_string(t));
        }
        const double hs = dir * h;
        const bool regular = stepper.attempt(t, hs, y, k1, y_new, k7, err, stats);
        if (!regular) {
            ++stats.rejected;
            h *= 0.25;
            last_rejected = true;
            continue;
        }
        const double e = scaled_rms(err, y, y_new, cfg);
        if (e > 1.0) {
            ++stats.rejected;
            h *= std::max(0.2, 0.9 * std::pow(e, -0.2));
            last_rejected = true;
            continue;
        }

        ++stats.accepted;
        const double t_new = (h == remaining) ? t1 : t + hs;
        DenseSegment seg = stepper.dense(t, hs, y, y_new, k1, k7);

        if (terminal) {
            const double g_new = (*terminal)(t_new, y_new);
            if (g_prev < 0.0 && g_new >= 0.0) {
                double lo = t;
                double hi = t_new;
                const double width = 1e-12 * std::max(1.0, std::abs(t_new));
                for (int it = 0; it < 200 && std::abs(hi - lo) > width; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if ((*terminal)(mid, seg.eval(mid)) >= 0.0) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                sol.segments.push_back(seg);
                sol.times.push_back(hi);
                sol.values.push_back(seg.eval(hi));
                result.event_time = hi;
                return result;
            }
            g_prev = g_new;
        }

        sol.segments.push_back(std::move(seg));
        sol.times.push_back(t_new);
        sol.values.push_back(y_new);
        t = t_new;
        y = y_new;
        k1 = k7;

        double factor = e == 0.0 ? 10.0 : 0.9 * std::pow(e, -0.2);
        factor = std::clamp(factor, 0.2, 10.0);
        if (last_rejected) {
            factor = std::min(factor, 1.0);
        }
        h *= factor;
        last_rejected = false;
    }
    return result;
}

}  // namespace ode

const char* to_string(EventKind kind) {
    switch (kind) {
    case EventKind::FallPositive:
        return "FallPositive";
    case EventKind::FallNegative:
        return "FallNegative";
    case EventKind::FallPlanar:
        return "FallPlanar";
    case EventKind::BoundaryExit:
        return "BoundaryExit";
    }
    return "?";
}

Trajectory::Trajectory(ode::DenseSolution solution, int dim, std::vector<TrajectoryEvent> events,
                       ode::SolveStats stats)
    : solution_(std::move(solution)), dim_(dim), events_(std::move(events)), stats_(stats) {}

std::optional<TrajectoryEvent> Trajectory::fall_event() const {
    for (const auto& e : events_) {
        if (e.kind != EventKind::BoundaryExit) {
            return e;
        }
    }
    return std::nullopt;
}

void write_trajectory_header(std::ostream& out, int dim) {
    out << "t";
    for (int i = 1; i <= dim; ++i) {
        out << ",x" << i;
    }
    for (int i = 1; i <= dim; ++i) {
        out << ",p" << i;
    }
    out << ",y\n";
}

void Trajectory::write_csv(std::ostream& out) const {
    const auto old_precision = out.precision(17);
    write_trajectory_header(out, dim_);
    for (std::size_t i = 0; i < size(); ++i) {
        const PhaseState s = state(i);
        out << solution_.times[i];
        for (int j = 0; j < dim_; ++j) {
            out << ',' << s.x[j];
        }
        for (int j = 0; j < dim_; ++j) {
            out << ',' << s.p[j];
        }
        out << ',' << height(s).y << '\n';
    }
    out.precision(old_precision);
}

Trajectory evolve(double t0, double t1, const PhaseState& s0, const ModelParams& params,
                  const PeriodicSignal& F, const IntegratorConfig& cfg,
                  const EvolveOptions& options) {
    params.validate();
    cfg.validate();
    if (s0.dim() != params.dim) {
        throw std::invalid_argument("evolve: state dimension does not match params");
    }
    if (!(s0.x.norm() < cfg.fall_threshold)) {
        throw std::invalid_argument("evolve: initial |x| must be below the fall threshold");
    }
    const int d = params.dim;
    const ode::RhsFn f = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const auto der = rhs(t, PhaseState::unpack(y), params, F);
        dy.resize(2 * d);
        dy << der.xdot, der.pdot;
    };
    const double threshold = cfg.fall_threshold;
    const ode::EventFn fall = [d, threshold](double, const Eigen::VectorXd& y) {
        return y.head(d).norm() - threshold;
    };
    auto result = ode::dopri5(f, t0, t1, Eigen::VectorXd(s0.packed()), cfg, &fall);

    std::vector<TrajectoryEvent> events;
    const auto& sol = result.solution;
    if (options.exit_region) {
        // Check step ends and three interior points per step; locate each
        // outward crossing by bisection on the interpolant.
        double prev = options.exit_region(PhaseState::unpack(sol.values.front()));
        for (const auto& seg : sol.segments) {
            for (int k = 1; k <= 4; ++k) {
                const double tk = seg.t0 + seg.h * (k / 4.0);
                const double val = options.exit_region(PhaseState::unpack(seg.eval(tk)));
                if (prev <= 0.0 && val > 0.0) {
                    double lo = seg.t0 + seg.h * ((k - 1) / 4.0);
                    double hi = tk;
                    for (int it = 0; it < 60; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        if (options.exit_region(PhaseState::unpack(seg.eval(mid))) > 0.0) {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    events.push_back({hi, EventKind::BoundaryExit});
                }
                prev = val;
            }
        }
    }
    if (result.event_time) {
        const PhaseState end = PhaseState::unpack(sol.values.back());
        EventKind kind = EventKind::FallPlanar;
        if (d == 1) {
            kind = end.x[0] > 0.0 ? EventKind::FallPositive : EventKind::FallNegative;
        }
        events.push_back({*result.event_time, kind});
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const auto& a, const auto& b) { return a.time < b.time; });
    return Trajectory(std::move(result.solution), d, std::move(events), result.stats);
}

std::optional<double> shift_periodicity_check(const PhaseState& z, const ModelParams& params,
                                              const PeriodicSignal& F,
                                              const IntegratorConfig& cfg) {
    const double T = F.period();
    const Trajectory first = evolve(0.0, T, z, params, F, cfg);
    const Trajectory shifted = evolve(T, 2.0 * T, z, params, F, cfg);
    if (first.fell() || shifted.fell()) {
        return std::nullopt;
    }
    return distance(first.final_state(), shifted.final_state());
}

}  // namespace invpend

#include "invpend/poincare.hpp"

#include "invpend/bounds.hpp"
#include "invpend/errors.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace invpend {

void ContinuationConfig::validate() const {
    if (!(lambda_step_min > 0.0 && lambda_step_min <= lambda_step_init && lambda_step_init <= 1.0)) {
        throw std::invalid_argument("continuation: need 0 < step_min <= step_init <= 1");
    }
    if (!(newton_tol > 0.0) || newton_max_iters <= 0 || !(fd_step > 0.0) ||
        !(max_condition > 1.0)) {
        throw std::invalid_argument("continuation: invalid Newton settings");
    }
}

PhaseState poincare_map(const PhaseState& z, const ModelParams& params, const PeriodicSignal& F,
                        const IntegratorConfig& cfg) {
    const Trajectory traj = evolve(0.0, F.period(), z, params, F, cfg);
    if (const auto fall = traj.fall_event()) {
        std::ostringstream msg;
        msg << "trajectory falls at t = " << fall->time << " before the period ends";
        throw FallError(msg.str(), fall->time);
    }
    return traj.final_state();
}

namespace {

StateMat variational_jacobian(const PhaseState& z, const ModelParams& params,
                              const PeriodicSignal& F, const IntegratorConfig& cfg) {
    const int d = params.dim;
    const int n = 2 * d;
    const ode::RhsFn f = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const PhaseState s = PhaseState::unpack(y.head(n));
        const auto der = rhs(t, s, params, F);
        const StateMat J = jacobian(t, s, params, F);
        dy.resize(n + n * n);
        dy.head(d) = der.xdot;
        dy.segment(d, d) = der.pdot;
        const Eigen::Map<const Eigen::MatrixXd> Y(y.data() + n, n, n);
        Eigen::Map<Eigen::MatrixXd> dY(dy.data() + n, n, n);
        dY.noalias() = J * Y;
    };
    const double threshold = cfg.fall_threshold;
    const ode::EventFn fall = [d, threshold](double, const Eigen::VectorXd& y) {
        return y.head(d).norm() - threshold;
    };
    Eigen::VectorXd y0(n + n * n);
    y0.head(n) = z.packed();
    Eigen::Map<Eigen::MatrixXd>(y0.data() + n, n, n).setIdentity();
    const auto result = ode::dopri5(f, 0.0, F.period(), y0, cfg, &fall);
    if (result.event_time) {
        throw FallError("variational integration: trajectory falls", *result.event_time);
    }
    const Eigen::VectorXd& yT = result.solution.values.back();
    return Eigen::Map<const Eigen::MatrixXd>(yT.data() + n, n, n);
}

StateMat fd_poincare_jacobian(const PhaseState& z, const ModelParams& params,
                              const PeriodicSignal& F, const IntegratorConfig& cfg, double fd_step,
                              Execution exec) {
    const int n = 2 * params.dim;
    const StateVec y = z.packed();
    const double h = fd_step * (1.0 + y.norm());
    StateMat M(n, n);
    ExceptionSlot slot;
    // Each column needs two independent integrations.
#pragma omp parallel for schedule(static) if (exec == Execution::Parallel)
    for (int j = 0; j < n; ++j) {
        slot.run([&] {
            StateVec yp = y;
            StateVec ym = y;
            yp[j] += h;
            ym[j] -= h;
            const StateVec fp = poincare_map(PhaseState::unpack(yp), params, F, cfg).packed();
            const StateVec fm = poincare_map(PhaseState::unpack(ym), params, F, cfg).packed();
            M.col(j) = (fp - fm) / (2.0 * h);
        });
    }
    slot.rethrow();
    return M;
}

StateMat corrector_jacobian(const PhaseState& z, const ModelParams& params,
                            const PeriodicSignal& F, const IntegratorConfig& cfg,
                            const ContinuationConfig& ccfg) {
    const auto mode = ccfg.jacobian == ContinuationConfig::Jacobian::Variational
                          ? PoincareJacobianMode::Variational
                          : PoincareJacobianMode::FiniteDifference;
    return poincare_jacobian(z, params, F, cfg, mode, ccfg.fd_step);
}

}  // namespace

StateMat poincare_jacobian(const PhaseState& z, const ModelParams& params, const PeriodicSignal& F,
                           const IntegratorConfig& cfg, PoincareJacobianMode mode, double fd_step,
                           Execution exec) {
    params.validate();
    if (mode == PoincareJacobianMode::Variational) {
        return variational_jacobian(z, params, F, cfg);
    }
    return fd_poincare_jacobian(z, params, F, cfg, fd_step, exec);
}

PeriodicOrbitResult newton_correct(const PhaseState& z0, const ModelParams& params,
                                   const PeriodicSignal& F, const IntegratorConfig& cfg,
                                   const ContinuationConfig& ccfg) {
    params.validate();
    ccfg.validate();
    const int n = 2 * params.dim;
    const double T = F.period();

    PhaseState z = z0;
    Trajectory traj = evolve(0.0, T, z, params, F, cfg);
    if (const auto fall = traj.fall_event()) {
        throw FallError("newton: initial guess falls", fall->time);
    }
    StateVec r = traj.final_state().packed() - z.packed();
    double res = r.norm();

    int iterations = 0;
    int polish = 0;
    while (true) {
        if (res < ccfg.newton_tol) {
            if (polish >= 3) {
                break;
            }
            ++polish;
        } else if (iterations >= ccfg.newton_max_iters) {
            std::ostringstream msg;
            msg << "newton: no convergence after " << iterations << " iterations (residual "
                << res << ")";
            throw NewtonFailure(NewtonFailure::Kind::NoConvergence, msg.str());
        }

        const StateMat M = corrector_jacobian(z, params, F, cfg, ccfg);
        const Eigen::MatrixXd A = M - StateMat::Identity(n, n);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                                      : std::numeric_limits<double>::infinity();
        if (!(cond <= ccfg.max_condition)) {
            std::ostringstream msg;
            msg << "newton: P' - I is ill-conditioned (condition " << cond << ")";
            throw NewtonFailure(NewtonFailure::Kind::IllConditioned, msg.str());
        }
        const Eigen::VectorXd step = svd.solve(Eigen::VectorXd(-r));
        ++iterations;

        // Damped update: halve on a fall or on residual growth.
        bool accepted = false;
        double scale = 1.0;
        for (int k = 0; k < 8 && !accepted; ++k, scale *= 0.5) {
            const PhaseState trial = PhaseState::unpack(Eigen::VectorXd(z.packed() + scale * step));
            if (!(trial.x.norm() < cfg.fall_threshold)) {
                continue;
            }
            Trajectory trial_traj = evolve(0.0, T, trial, params, F, cfg);
            if (trial_traj.fell()) {
                continue;
            }
            const StateVec trial_r = trial_traj.final_state().packed() - trial.packed();
            const double trial_res = trial_r.norm();
            const bool polishing = res < ccfg.newton_tol;
            if (trial_res < (polishing ? 0.5 * res : res)) {
                z = trial;
                traj = std::move(trial_traj);
                r = trial_r;
                res = trial_res;
                accepted = true;
            } else if (polishing) {
                break;
            }
        }
        if (!accepted) {
            if (res < ccfg.newton_tol) {
                break;
            }
            throw NewtonFailure(NewtonFailure::Kind::NoConvergence,
                                "newton: damped step failed to make progress");
        }
    }

    PeriodicOrbitResult out{z,   res, params.lambda, {}, std::move(traj), std::nullopt,
                            corrector_jacobian(z, params, F, cfg, ccfg), iterations};
    return out;
}

PeriodicOrbitResult continue_in_lambda(const ModelParams& params_at_zero, const PeriodicSignal& F,
                                       const IntegratorConfig& cfg,
                                       const ContinuationConfig& ccfg,
                                       const std::optional<BoundSetSpec>& bound_set) {
    params_at_zero.validate();
    ccfg.validate();
    const ModelParams base = params_at_zero.with_lambda(0.0);
    if (degree_sign(base) == 0) {
        throw std::invalid_argument("continuation: degree of the autonomous field vanishes");
    }

    PhaseState z = PhaseState::origin(base.dim);
    const double r0 = distance(poincare_map(z, base, F, cfg), z);
    std::vector<LambdaNode> path{{0.0, z, r0}};

    std::optional<PeriodicOrbitResult> last;
    if (F.is_zero()) {
        last = newton_correct(z, base.with_lambda(1.0), F, cfg, ccfg);
        path.push_back({1.0, last->fixed_point, last->residual});
    } else {
        double lambda = 0.0;
        double step = ccfg.lambda_step_init;
        while (lambda < 1.0) {
            const double trial = std::min(1.0, lambda + step);
            try {
                auto res = newton_correct(z, base.with_lambda(trial), F, cfg, ccfg);
                lambda = trial;
                z = res.fixed_point;
                path.push_back({lambda, z, res.residual});
                last = std::move(res);
                step = std::min(1.0, step * 1.5);
            } catch (const NewtonFailure&) {
                step *= 0.5;
            } catch (const FallError&) {
                step *= 0.5;
            } catch (const StepSizeUnderflow&) {
                step *= 0.5;
            }
            if (step < ccfg.lambda_step_min) {
                std::ostringstream msg;
                msg << "continuation stuck: lambda step below " << ccfg.lambda_step_min
                    << " after lambda = " << lambda;
                throw ContinuationStuck(msg.str(), lambda);
            }
        }
    }

    PeriodicOrbitResult result = std::move(*last);
    result.lambda_path = std::move(path);
    if (bound_set) {
        result.containment = check_containment(result.orbit, *bound_set);
    }
    return result;
}

void write_orbit_json(std::ostream& out, const PeriodicOrbitResult& result) {
    using nlohmann::json;
    auto vec = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    json j;
    j["lambda"] = result.lambda;
    j["fixed_point"] = {{"x", vec(result.fixed_point.x)}, {"p", vec(result.fixed_point.p)}};
    j["residual"] = result.residual;
    j["newton_iterations"] = result.newton_iterations;
    json path = json::array();
    for (const auto& node : result.lambda_path) {
        path.push_back({{"lambda", node.lambda},
                        {"x", vec(node.fixed_point.x)},
                        {"p", vec(node.fixed_point.p)},
                        {"residual", node.residual}});
    }
    j["lambda_path"] = path;
    json mono = json::array();
    for (Eigen::Index i = 0; i < result.monodromy.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < result.monodromy.cols(); ++k) {
            row.push_back(result.monodromy(i, k));
        }
        mono.push_back(row);
    }
    j["monodromy"] = mono;
    if (result.monodromy.size() > 0) {
        Eigen::EigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(result.monodromy), false);
        json eig = json::array();
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            eig.push_back({{"re", es.eigenvalues()[i].real()}, {"im", es.eigenvalues()[i].imag()}});
        }
        j["monodromy_eigenvalues"] = eig;
    }
    if (result.containment) {
        const auto& c = *result.containment;
        j["containment"] = {{"a", c.spec.a},
                            {"b", c.spec.b},
                            {"max_abs_x", c.max_abs_x},
                            {"max_cone", c.max_cone},
                            {"inside", c.inside}};
    }
    out << std::setprecision(17) << j.dump(2) << '\n';
}

}  // namespace invpend

#include "invpend/dynamics.hpp"

#include "invpend/errors.hpp"

#include <cmath>
#include <sstream>

namespace invpend {

void ModelParams::validate() const {
    if (!(G > 0.0) || !std::isfinite(G)) {
        throw std::invalid_argument("model params: G must be positive");
    }
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw std::invalid_argument("model params: lambda must lie in [0, 1]");
    }
    check_dim(dim);
}

void check_regular(const PhaseState& s) {
    const double r = s.x.norm();
    if (!(r < 1.0 - kSingularityGuard)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "equation singular at |x| = " << r << " (rod on the floor)";
        throw SingularityError(msg.str(), s);
    }
}

namespace {

void check_shapes(const PhaseState& s, const ModelParams& params, const PeriodicSignal& F) {
    if (s.x.size() != params.dim || s.p.size() != params.dim || F.dim() != params.dim) {
        throw std::invalid_argument("state, params and forcing dimensions disagree");
    }
}

}  // namespace

Derivative rhs_linear(double t, const PhaseState& s, const ModelParams& params,
                      const PeriodicSignal& F) {
    if (params.dim != 1) {
        throw std::invalid_argument("rhs_linear requires dim = 1");
    }
    check_shapes(s, params, F);
    check_regular(s);
    const double x = s.x[0];
    const double p = s.p[0];
    const double u = 1.0 - x * x;
    const double pdot = (params.G * std::sqrt(u) - p * p / u) * x - params.lambda * u * F.eval(t)[0];
    Vec xd(1), pd(1);
    xd << p;
    pd << pdot;
    return {xd, pd};
}

Derivative rhs_planar(double t, const PhaseState& s, const ModelParams& params,
                      const PeriodicSignal& F) {
    if (params.dim != 2) {
        throw std::invalid_argument("rhs_planar requires dim = 2");
    }
    check_shapes(s, params, F);
    check_regular(s);
    const Vec& x = s.x;
    const Vec& p = s.p;
    const double u = 1.0 - x.squaredNorm();
    const double q = x.dot(p);
    const double R = params.G * std::sqrt(u) - q * q / u - p.squaredNorm();
    const Vec f = F.eval(t);
    const Vec phi = params.lambda * (x.dot(f) * x - f);
    return {p, R * x + phi};
}

Derivative rhs(double t, const PhaseState& s, const ModelParams& params, const PeriodicSignal& F) {
    return params.dim == 1 ? rhs_linear(t, s, params, F) : rhs_planar(t, s, params, F);
}

PendulumTerms pendulum_terms(double t, const PhaseState& s, const ModelParams& params,
                             const PeriodicSignal& F) {
    check_shapes(s, params, F);
    check_regular(s);
    const int d = params.dim;
    const Vec& x = s.x;
    const Vec& p = s.p;
    const double u = 1.0 - x.squaredNorm();
    const double root = std::sqrt(u);
    const double q = x.dot(p);
    const Vec f = F.eval(t);
    const Vec fdot = F.eval_derivative(t);

    PendulumTerms out;
    out.R = params.G * root - q * q / u - p.squaredNorm();
    out.dR_dx = -(params.G / root) * x.transpose() - (2.0 * q / u) * p.transpose() -
                (2.0 * q * q / (u * u)) * x.transpose();
    out.dR_dp = -(2.0 * q / u) * x.transpose() - 2.0 * p.transpose();
    out.Phi = params.lambda * (x.dot(f) * x - f);
    out.dPhi_dt = params.lambda * (x.dot(fdot) * x - fdot);
    out.dPhi_dx = params.lambda * (x.dot(f) * DimMat::Identity(d, d) + x * f.transpose());
    return out;
}

namespace {

StateMat analytic_jacobian(double t, const PhaseState& s, const ModelParams& params,
                           const PeriodicSignal& F) {
    const int d = params.dim;
    const PendulumTerms terms = pendulum_terms(t, s, params, F);
    StateMat J = StateMat::Zero(2 * d, 2 * d);
    J.block(0, d, d, d).setIdentity();
    J.block(d, 0, d, d) =
        terms.R * DimMat::Identity(d, d) + s.x * terms.dR_dx + terms.dPhi_dx;
    J.block(d, d, d, d) = s.x * terms.dR_dp;
    return J;
}

StateMat fd_jacobian(double t, const PhaseState& s, const ModelParams& params,
                     const PeriodicSignal& F) {
    const int n = 2 * params.dim;
    const StateVec y = s.packed();
    StateMat J(n, n);
    for (int j = 0; j < n; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(y[j]));
        StateVec yp = y;
        StateVec ym = y;
        yp[j] += h;
        ym[j] -= h;
        const auto fp = rhs(t, PhaseState::unpack(yp), params, F);
        const auto fm = rhs(t, PhaseState::unpack(ym), params, F);
        StateVec col(n);
        col << (fp.xdot - fm.xdot), (fp.pdot - fm.pdot);
        J.col(j) = col / (2.0 * h);
    }
    return J;
}

}  // namespace

StateMat jacobian(double t, const PhaseState& s, const ModelParams& params, const PeriodicSignal& F,
                  JacobianMode mode) {
    return mode == JacobianMode::Analytic ? analytic_jacobian(t, s, params, F)
                                          : fd_jacobian(t, s, params, F);
}

StateVec time_derivative(double t, const PhaseState& s, const ModelParams& params,
                         const PeriodicSignal& F) {
    const int d = params.dim;
    const PendulumTerms terms = pendulum_terms(t, s, params, F);
    StateVec out = StateVec::Zero(2 * d);
    out.tail(d) = terms.dPhi_dt;
    return out;
}

HeightReadout height(const PhaseState& s) {
    const double radicand = 1.0 - s.x.squaredNorm();
    if (radicand < 0.0) {
        if (radicand > -1e-14) {
            return {0.0};
        }
        throw std::invalid_argument("height: |x| exceeds 1");
    }
    return {std::sqrt(radicand)};
}

}  // namespace invpend

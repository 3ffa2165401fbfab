#include "invpend/bounds.hpp"

#include "invpend/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace invpend {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFaceTol = 1e-10;

}  // namespace

double threshold_a_linear(double G, double F_norm) {
    if (!(G > 0.0)) {
        throw std::invalid_argument("threshold_a_linear: G must be positive");
    }
    return F_norm / std::hypot(G, F_norm);
}

double compute_a_linear(double G, double F_norm, double margin) {
    const double a_star = threshold_a_linear(G, F_norm);
    return a_star + margin * (1.0 - a_star);
}

double threshold_b_linear(double a, double F_norm) {
    if (!(a > 0.0 && a < 1.0)) {
        throw std::invalid_argument("threshold_b_linear: a must lie in (0, 1)");
    }
    return std::sqrt((1.0 + a) * F_norm / (1.0 - a));
}

double compute_b_linear(double a, double F_norm, double margin) {
    if (F_norm == 0.0) {
        threshold_b_linear(a, 0.0);
        return margin;
    }
    return threshold_b_linear(a, F_norm) * (1.0 + margin);
}

double threshold_a_planar(double G, double F_norm) {
    if (!(G > 0.0)) {
        throw std::invalid_argument("threshold_a_planar: G must be positive");
    }
    if (F_norm == 0.0) {
        return 0.0;
    }
    const auto f = [&](double a) {
        return G * a * std::sqrt(1.0 + a) - (1.0 + a) * F_norm * std::sqrt(1.0 - a);
    };
    // f(0) < 0 < f(1); scan for the first sign change, then bisect.
    constexpr int kScan = 1000;
    double lo = 0.0;
    double hi = 1.0;
    for (int i = 1; i <= kScan; ++i) {
        const double a = static_cast<double>(i) / kScan;
        if (f(a) >= 0.0) {
            lo = static_cast<double>(i - 1) / kScan;
            hi = a;
            break;
        }
    }
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return hi;
}

double compute_a_planar(double G, double F_norm, double margin) {
    const double a_star = threshold_a_planar(G, F_norm);
    return a_star + margin * (1.0 - a_star);
}

double threshold_b_planar(double a, double F_norm) {
    if (!(a > 0.0 && a < 1.0)) {
        throw std::invalid_argument("threshold_b_planar: a must lie in (0, 1)");
    }
    const double om = 1.0 - a;
    return std::max(std::pow(16.0 * F_norm * F_norm / (om * om * om), 0.25), std::sqrt(F_norm));
}

int degree_sign(const ModelParams& params) {
    params.validate();
    const ModelParams autonomous = params.with_lambda(0.0);
    const PeriodicSignal none = PeriodicSignal::zero(1.0, params.dim);
    const StateMat J = jacobian(0.0, PhaseState::origin(params.dim), autonomous, none);
    const double det = J.determinant();
    return det > 0.0 ? 1 : (det < 0.0 ? -1 : 0);
}

double gate_m(const PhaseState& s) { return s.x.dot(s.p); }

double gate_n(double t, const PhaseState& s, const ModelParams& params, const PeriodicSignal& F,
              double b) {
    const double rx = s.x.norm();
    const double rp = s.p.norm();
    if (rx == 0.0 || rp == 0.0) {
        throw InvalidSample("gate_n: n_b is not differentiable where x = 0 or p = 0");
    }
    const auto k = pendulum_terms(t, s, params, F);
    const double q = s.x.dot(s.p);
    return b * q / rx + (k.R * q + s.p.dot(k.Phi)) / rp;
}

double curvature_check_m(double t, const PhaseState& s, const ModelParams& params,
                         const PeriodicSignal& F, double a) {
    if (std::abs(s.x.norm() - a) > kFaceTol) {
        throw InvalidSample("curvature_check_m: sample is not on |x| = a");
    }
    if (std::abs(gate_m(s)) > kFaceTol) {
        throw InvalidSample("curvature_check_m: sample is not tangent (x^T p != 0)");
    }
    const auto k = pendulum_terms(t, s, params, F);
    return s.p.squaredNorm() + k.R * s.x.squaredNorm() + s.x.dot(k.Phi);
}

double curvature_check_n(double t, const PhaseState& s, const ModelParams& params,
                         const PeriodicSignal& F, double b, double gate_tol) {
    const double rx = s.x.norm();
    const double rp = s.p.norm();
    if (rx == 0.0) {
        throw InvalidSample("curvature_check_n: x = 0 lies on the Z edge");
    }
    if (std::abs(b * rx + rp - b) > kFaceTol * std::max(1.0, b)) {
        throw InvalidSample("curvature_check_n: sample is not on n_b = 0");
    }
    if (std::abs(gate_n(t, s, params, F, b)) > gate_tol) {
        throw InvalidSample("curvature_check_n: sample fails the tangency gate");
    }
    const Vec& x = s.x;
    const Vec& p = s.p;
    const auto k = pendulum_terms(t, s, params, F);
    const double q = x.dot(p);
    const Vec w = k.R * x + k.Phi;

    double det_terms = 0.0;
    if (params.dim == 2) {
        const double det_xp = x[0] * p[1] - x[1] * p[0];
        const double det_pw = p[0] * w[1] - p[1] * w[0];
        det_terms = b * det_xp * det_xp / (rx * rx * rx) + det_pw * det_pw / (rp * rp * rp);
    }
    const double r_terms = b * k.R * rx + k.R * rp;
    const double dR_terms = (q / rp) * (k.dR_dx.dot(p) + k.R * k.dR_dp.dot(x));
    const double phi_x = (b / rx) * x.dot(k.Phi);
    const double phi_p = p.dot(k.dPhi_dt + k.dPhi_dx * p) / rp;
    const double phi_r = (q / rp) * k.dR_dp.dot(k.Phi);
    return det_terms + r_terms + dR_terms + phi_x + phi_p + phi_r;
}

namespace {

bool exit_cone_check_with_norm(double t, const Vec& p, const PeriodicSignal& F, double G,
                               double F_norm, std::span<const double> lambda_grid,
                               const IntegratorConfig& cfg) {
    const double b = p.norm();
    if (!(b * b > F_norm)) {
        return false;
    }
    const int d = static_cast<int>(p.size());
    const PhaseState start(Vec::Zero(d), p);
    const double span = 1e-3 * F.period();
    const BoundSetSpec cone{0.5, b, d};
    for (const double lambda : lambda_grid) {
        const ModelParams params{G, lambda, d};
        const Trajectory traj = evolve(t, t + span, start, params, F, cfg);
        bool left = false;
        for (int i = 1; i <= 16 && !left; ++i) {
            left = cone.n(traj.dense_eval(t + span * i / 16.0)) > 0.0;
        }
        if (!left) {
            return false;
        }
    }
    return true;
}

}  // namespace

bool exit_cone_check(double t, const Vec& p, const PeriodicSignal& F, double G,
                     std::span<const double> lambda_grid, const IntegratorConfig& cfg) {
    return exit_cone_check_with_norm(t, p, F, G, forcing_norm(F), lambda_grid, cfg);
}

std::vector<double> default_lambda_grid(int points) {
    if (points < 2) {
        throw std::invalid_argument("lambda grid needs at least two points");
    }
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i) {
        grid[i] = static_cast<double>(i) / (points - 1);
    }
    grid.back() = 1.0;
    return grid;
}

const char* to_string(Face face) {
    switch (face) {
        case Face::Gamma: return "gamma";
        case Face::Delta: return "delta";
        case Face::Z: return "z";
    }
    return "?";
}

const char* to_string(SampleCheck check) {
    switch (check) {
        case SampleCheck::Curvature: return "curvature";
        case SampleCheck::Orientation: return "orientation";
        case SampleCheck::ExitCone: return "exit_cone";
        case SampleCheck::SpotCheck: return "spot_check";
    }
    return "?";
}

double forcing_norm(const PeriodicSignal& F) { return sup_norms(F, 4096).value; }

namespace {

/// Per-work-item summary; merged serially in index order so the result does
/// not depend on scheduling.
struct Accum {
    std::size_t samples = 0;
    std::size_t tangent = 0;
    double min_value = kInf;
    std::optional<BoundarySample> worst;
    double max_xtp = -kInf;
    std::size_t failures = 0;

    void add(const BoundarySample& s, bool is_tangent) {
        ++samples;
        tangent += is_tangent ? 1 : 0;
        if (s.value < min_value) {
            min_value = s.value;
            worst = s;
        }
    }
    void merge(const Accum& o) {
        samples += o.samples;
        tangent += o.tangent;
        if (o.min_value < min_value) {
            min_value = o.min_value;
            worst = o.worst;
        }
        max_xtp = std::max(max_xtp, o.max_xtp);
        failures += o.failures;
    }
};

template <class Fn>
Accum run_items(int count, Execution exec, Fn&& work) {
    std::vector<Accum> parts(static_cast<std::size_t>(count));
    ExceptionSlot slot;
#pragma omp parallel for schedule(dynamic) if (exec == Execution::Parallel)
    for (int i = 0; i < count; ++i) {
        slot.run([&] { parts[i] = work(i); });
    }
    slot.rethrow();
    Accum total;
    for (const auto& part : parts) {
        total.merge(part);
    }
    return total;
}

Vec unit(double angle) {
    Vec v(2);
    v << std::cos(angle), std::sin(angle);
    return v;
}

Vec scalar(double value) {
    Vec v(1);
    v << value;
    return v;
}

struct Context {
    const BoundSetSpec& spec;
    double G;
    const PeriodicSignal& F;
    double F_norm;
    std::span<const double> lambdas;
    const VerifyConfig& cfg;
    std::vector<double> times;
    double gate_tol;
};

// |x| = a face. The planar face is sampled at its tangencies x^T p = 0;
// elsewhere on it the flow crosses transversally in one direction or the other.
Accum gamma_face(const Context& c) {
    const int N = c.cfg.samples_per_face;
    const int d = c.spec.dim;
    const double a = c.spec.a;
    const double p_max = c.spec.b * (1.0 - a);
    const int nt = static_cast<int>(c.times.size());
    return run_items(nt, c.cfg.exec, [&](int it) {
        Accum acc;
        const double t = c.times[it];
        auto visit = [&](const PhaseState& s) {
            const double g = gate_m(s);
            for (const double lambda : c.lambdas) {
                const ModelParams params{c.G, lambda, d};
                BoundarySample sample{Face::Gamma, SampleCheck::Curvature, t, lambda, s, g, 0.0};
                if (std::abs(g) <= c.gate_tol) {
                    sample.value = curvature_check_m(t, s, params, c.F, a);
                    acc.add(sample, true);
                } else {
                    ++acc.samples;
                }
            }
        };
        if (d == 1) {
            for (const double sx : {a, -a}) {
                for (int k = 0; k <= 2 * N; ++k) {
                    const double p = k == N ? 0.0 : p_max * (k - N) / N;
                    visit(PhaseState(scalar(sx), scalar(p)));
                }
            }
        } else {
            for (int j = 0; j < 2 * N; ++j) {
                const double theta = kTwoPi * j / (2 * N);
                const Vec x = a * unit(theta);
                const Vec tangent = unit(theta + 0.5 * std::numbers::pi);
                for (int k = 0; k <= 2 * N; ++k) {
                    visit(PhaseState(x, p_max * (k - N) / N * tangent));
                }
            }
        }
        return acc;
    });
}

// Linear n_b = 0 face: the four sides of the rhombus. Sides with x p > 0 must
// be exits, sides with x p < 0 entrances.
Accum delta_face_linear(const Context& c) {
    const int N = c.cfg.samples_per_face;
    const double a = c.spec.a;
    const double b = c.spec.b;
    const int nt = static_cast<int>(c.times.size());
    return run_items(nt, c.cfg.exec, [&](int it) {
        Accum acc;
        const double t = c.times[it];
        for (const double sx : {1.0, -1.0}) {
            for (const double sp : {1.0, -1.0}) {
                for (int k = 1; k <= 2 * N; ++k) {
                    const double rho = a * k / (2 * N);
                    const PhaseState s(scalar(sx * rho), scalar(sp * b * (1.0 - rho)));
                    for (const double lambda : c.lambdas) {
                        const ModelParams params{c.G, lambda, 1};
                        const double g = gate_n(t, s, params, c.F, b);
                        acc.add({Face::Delta, SampleCheck::Orientation, t, lambda, s, g, sx * sp * g},
                                false);
                    }
                }
            }
        }
        return acc;
    });
}

// Planar n_b = 0 face: lines over the direction psi of p relative to x. Grid
// points that pass the gate and bisected sign changes of (D n_b) v give the
// tangent samples.
Accum delta_face_planar(const Context& c) {
    const int N = c.cfg.samples_per_face;
    const double a = c.spec.a;
    const double b = c.spec.b;
    const int nt = static_cast<int>(c.times.size());
    const int ntheta = 2 * N;
    const int npsi = 4 * N;
    return run_items(nt * N * ntheta, c.cfg.exec, [&](int item) {
        Accum acc;
        const int it = item / (N * ntheta);
        const int ir = (item / ntheta) % N;
        const int ith = item % ntheta;
        const double t = c.times[it];
        const double rho = a * (ir + 1) / N;
        const double theta = kTwoPi * ith / ntheta;
        const Vec x = rho * unit(theta);
        const double pr = b * (1.0 - rho);
        auto state = [&](double psi) { return PhaseState(x, pr * unit(theta + psi)); };

        for (const double lambda : c.lambdas) {
            const ModelParams params{c.G, lambda, 2};
            auto g_of = [&](double psi) { return gate_n(t, state(psi), params, c.F, b); };
            auto tangent_sample = [&](double psi, double g) {
                const PhaseState s = state(psi);
                const double value = curvature_check_n(t, s, params, c.F, b, c.gate_tol);
                acc.add({Face::Delta, SampleCheck::Curvature, t, lambda, s, g, value}, true);
                const double xtp = std::abs(s.x.dot(s.p)) - 4.0 * c.F_norm * s.x.norm() / b;
                acc.max_xtp = std::max(acc.max_xtp, xtp);
            };
            std::vector<double> g(npsi);
            for (int k = 0; k < npsi; ++k) {
                g[k] = g_of(kTwoPi * k / npsi);
            }
            for (int k = 0; k < npsi; ++k) {
                const double psi = kTwoPi * k / npsi;
                if (std::abs(g[k]) <= c.gate_tol) {
                    tangent_sample(psi, g[k]);
                } else {
                    ++acc.samples;
                }
                const double g_next = g[(k + 1) % npsi];
                if (std::abs(g[k]) > c.gate_tol && std::abs(g_next) > c.gate_tol &&
                    (g[k] < 0.0) != (g_next < 0.0)) {
                    double lo = psi;
                    double hi = kTwoPi * (k + 1) / npsi;
                    double g_lo = g[k];
                    double mid = 0.5 * (lo + hi);
                    double g_mid = g_of(mid);
                    for (int iter = 0; iter < 200 && std::abs(g_mid) > 0.5 * c.gate_tol; ++iter) {
                        if ((g_mid < 0.0) == (g_lo < 0.0)) {
                            lo = mid;
                            g_lo = g_mid;
                        } else {
                            hi = mid;
                        }
                        mid = 0.5 * (lo + hi);
                        g_mid = g_of(mid);
                    }
                    tangent_sample(mid, g_mid);
                }
            }
        }
        return acc;
    });
}

// The Z edge x = 0, |p| = b where n_b has a corner.
Accum z_edge(const Context& c) {
    const int N = c.cfg.samples_per_face;
    const int d = c.spec.dim;
    const double b = c.spec.b;
    std::vector<Vec> momenta;
    if (d == 1) {
        momenta = {scalar(b), scalar(-b)};
    } else {
        for (int k = 0; k < 4 * N; ++k) {
            momenta.push_back(b * unit(kTwoPi * k / (4 * N)));
        }
    }
    const int nt = static_cast<int>(c.times.size());
    const int np = static_cast<int>(momenta.size());
    return run_items(nt * np, c.cfg.exec, [&](int item) {
        Accum acc;
        const double t = c.times[item / np];
        const Vec& p = momenta[item % np];
        const bool ok =
            exit_cone_check_with_norm(t, p, c.F, c.G, c.F_norm, c.lambdas, c.cfg.integrator);
        const double margin = b * b - c.F_norm;
        acc.add({Face::Z, SampleCheck::ExitCone, t, c.lambdas.back(), PhaseState(Vec::Zero(d), p),
                 0.0, ok ? margin : std::min(margin, 0.0)},
                false);
        return acc;
    });
}

// Random boundary points confirmed by short integrations in both directions:
// a valid boundary point leaves the set for some small positive or negative
// time.
Accum spot_checks(const Context& c) {
    const int d = c.spec.dim;
    const double a = c.spec.a;
    const double b = c.spec.b;
    const double T = c.F.period();
    std::mt19937_64 rng(c.cfg.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<BoundarySample> samples;
    for (int i = 0; i < c.cfg.spot_checks; ++i) {
        BoundarySample s;
        s.check = SampleCheck::SpotCheck;
        s.t = T * unif(rng);
        s.lambda = c.lambdas[static_cast<std::size_t>(unif(rng) * c.lambdas.size()) %
                             c.lambdas.size()];
        const bool on_gamma = unif(rng) < 0.5;
        s.face = on_gamma ? Face::Gamma : Face::Delta;
        if (d == 1) {
            const double sign_x = unif(rng) < 0.5 ? -1.0 : 1.0;
            const double sign_p = unif(rng) < 0.5 ? -1.0 : 1.0;
            if (on_gamma) {
                const double p = b * (1.0 - a) * (2.0 * unif(rng) - 1.0);
                s.state = PhaseState(scalar(sign_x * a), scalar(p));
            } else {
                const double rho = a * (0.01 + 0.99 * unif(rng));
                s.state = PhaseState(scalar(sign_x * rho), scalar(sign_p * b * (1.0 - rho)));
            }
        } else {
            const double theta = kTwoPi * unif(rng);
            const double psi = kTwoPi * unif(rng);
            if (on_gamma) {
                const double r = b * (1.0 - a) * std::sqrt(unif(rng));
                s.state = PhaseState(a * unit(theta), r * unit(psi));
            } else {
                const double rho = a * (0.01 + 0.99 * unif(rng));
                s.state = PhaseState(rho * unit(theta), b * (1.0 - rho) * unit(theta + psi));
            }
        }
        samples.push_back(std::move(s));
    }

    const int count = static_cast<int>(samples.size());
    return run_items(count, c.cfg.exec, [&](int i) {
        Accum acc;
        BoundarySample s = samples[i];
        const ModelParams params{c.G, s.lambda, d};
        bool leaves = false;
        double eps = 1e-3 * T;
        for (int k = 0; k < 5 && !leaves; ++k, eps *= 0.25) {
            for (const double dir : {1.0, -1.0}) {
                const Trajectory traj =
                    evolve(s.t, s.t + dir * eps, s.state, params, c.F, c.cfg.integrator);
                if (!c.spec.contains(traj.final_state())) {
                    leaves = true;
                    break;
                }
            }
        }
        s.value = leaves ? 0.0 : -1.0;
        acc.failures += leaves ? 0 : 1;
        acc.add(s, false);
        return acc;
    });
}

}  // namespace

BoundSetCertificate verify_bound_set(const BoundSetSpec& spec, double G, const PeriodicSignal& F,
                                     std::span<const double> lambda_grid,
                                     const VerifyConfig& cfg) {
    spec.validate();
    cfg.integrator.validate();
    if (!(G > 0.0)) {
        throw std::invalid_argument("verify_bound_set: G must be positive");
    }
    if (F.dim() != spec.dim) {
        throw std::invalid_argument("verify_bound_set: forcing dimension does not match the set");
    }
    if (lambda_grid.empty()) {
        throw std::invalid_argument("verify_bound_set: empty lambda grid");
    }
    if (cfg.samples_per_face < 1) {
        throw std::invalid_argument("verify_bound_set: samples_per_face must be positive");
    }

    const double F_norm = forcing_norm(F);
    const int N = cfg.samples_per_face;
    const double T = F.period();
    double phase = 0.0;
    if (cfg.seed != 0) {
        std::mt19937_64 jitter(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
        phase = std::uniform_real_distribution<double>(0.0, 1.0)(jitter);
    }
    std::vector<double> times(2 * N);
    for (int i = 0; i < 2 * N; ++i) {
        times[i] = T * (i + phase) / (2 * N);
    }
    const Context ctx{spec,  G,     F, F_norm, lambda_grid, cfg, std::move(times),
                      cfg.gate_rel * spec.b * (1.0 + F_norm + G)};

    const Accum gamma = gamma_face(ctx);
    const Accum delta = spec.dim == 1 ? delta_face_linear(ctx) : delta_face_planar(ctx);
    const Accum z = z_edge(ctx);
    const Accum spots = spot_checks(ctx);

    BoundSetCertificate cert;
    cert.spec = spec;
    cert.G = G;
    cert.F_norm = F_norm;
    cert.lambda_grid.assign(lambda_grid.begin(), lambda_grid.end());
    cert.samples_per_face = N;
    cert.boundary_samples = gamma.samples + delta.samples + z.samples;
    cert.tangent_samples_gamma = gamma.tangent;
    cert.tangent_samples_delta = delta.tangent;
    cert.z_samples = z.samples;
    cert.min_margin_gamma = gamma.min_value;
    cert.min_margin_delta = delta.min_value;
    cert.corner_ok = z.min_value > 0.0;
    cert.max_xtp_excess = delta.max_xtp;
    cert.spot_checks = spots.samples;
    cert.spot_failures = spots.failures;
    cert.worst_gamma = gamma.worst;
    cert.worst_delta = delta.worst;
    cert.verified = cert.min_margin_gamma > 0.0 && cert.min_margin_delta > 0.0 &&
                    cert.corner_ok && cert.spot_failures == 0;

    if (!cert.verified) {
        if (!(cert.min_margin_gamma > 0.0)) {
            cert.failing = gamma.worst;
        } else if (!(cert.min_margin_delta > 0.0)) {
            cert.failing = delta.worst;
        } else if (!cert.corner_ok) {
            cert.failing = z.worst;
        } else {
            cert.failing = spots.worst;
        }
    }
    return cert;
}

double compute_b_planar(double a, const PeriodicSignal& F, double G,
                        std::span<const double> lambda_grid, const VerifyConfig& cfg, double cap,
                        double floor) {
    const double F_norm = forcing_norm(F);
    double b = F_norm == 0.0 ? floor : 1.05 * threshold_b_planar(a, F_norm);
    std::optional<BoundSetCertificate> last;
    while (b <= cap) {
        last = verify_bound_set(BoundSetSpec{a, b, 2}, G, F, lambda_grid, cfg);
        if (last->verified) {
            return b;
        }
        b *= 2.0;
    }
    std::ostringstream msg;
    msg << "no verified bound set with b <= " << cap << " (a = " << a << ", ||F|| = " << F_norm;
    if (last) {
        msg << "; last margins gamma = " << last->min_margin_gamma
            << ", delta = " << last->min_margin_delta << ", corner_ok = " << last->corner_ok;
    }
    msg << ")";
    throw VerificationFailure(msg.str());
}

namespace {

nlohmann::json sample_json(const std::optional<BoundarySample>& s) {
    if (!s) {
        return nullptr;
    }
    auto vec = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    return {{"face", to_string(s->face)},
            {"check", to_string(s->check)},
            {"t", s->t},
            {"lambda", s->lambda},
            {"x", vec(s->state.x)},
            {"p", vec(s->state.p)},
            {"gate", s->gate},
            {"value", s->value}};
}

nlohmann::json finite_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

void write_certificate_json(std::ostream& out, const BoundSetCertificate& cert) {
    nlohmann::json j;
    j["spec"] = {{"a", cert.spec.a}, {"b", cert.spec.b}, {"dim", cert.spec.dim}};
    j["G"] = cert.G;
    j["F_norm"] = cert.F_norm;
    j["lambda_grid"] = cert.lambda_grid;
    j["samples_per_face"] = cert.samples_per_face;
    j["boundary_samples"] = cert.boundary_samples;
    j["tangent_samples_gamma"] = cert.tangent_samples_gamma;
    j["tangent_samples_delta"] = cert.tangent_samples_delta;
    j["z_samples"] = cert.z_samples;
    j["min_margin_gamma"] = finite_or_null(cert.min_margin_gamma);
    j["min_margin_delta"] = finite_or_null(cert.min_margin_delta);
    j["corner_ok"] = cert.corner_ok;
    j["max_xtp_excess"] = finite_or_null(cert.max_xtp_excess);
    j["spot_checks"] = cert.spot_checks;
    j["spot_failures"] = cert.spot_failures;
    j["verified"] = cert.verified;
    j["worst_gamma"] = sample_json(cert.worst_gamma);
    j["worst_delta"] = sample_json(cert.worst_delta);
    j["failing"] = sample_json(cert.failing);
    out << std::setprecision(17) << j.dump(2) << '\n';
}

}  // namespace invpend

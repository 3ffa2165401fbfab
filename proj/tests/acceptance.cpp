// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include "invpend/bounds.hpp"
#include "invpend/commands.hpp"
#include "invpend/config.hpp"
#include "invpend/poincare.hpp"
#include "invpend/whitney.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace invpend;
namespace fs = std::filesystem;

namespace {

constexpr double kG = 9.81;
constexpr double kPi = std::numbers::pi;

// Tolerances and limits.
constexpr double kDegreeSeconds = 1.0;
constexpr double kUnforcedTol = 1e-12;
constexpr double kUnforcedSeconds = 5.0;
constexpr double kResidualTol = 1e-8;
constexpr double kReturnTol = 3e-8;
constexpr double kLinearSeconds = 60.0;
constexpr double kPlanarSeconds = 300.0;
constexpr double kRotationTol = 1e-6;
constexpr double kMarginDrift = 0.10;
constexpr double kXtpSlack = 1e-9;
constexpr double kJacobianRel = 1e-4;
constexpr double kExpmTol = 1e-6;
constexpr double kWhitneySeconds = 60.0;
constexpr double kWhitneyBound = 0.999;
constexpr double kOrderFactor = 16.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

Vec v1(double a) {
    Vec v(1);
    v << a;
    return v;
}

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

IntegratorConfig tight() {
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-14;
    return cfg;
}

PeriodicSignal linear_forcing() { return make_fourier_forcing(1.0, 1, {v1(2.0)}, {}); }

PeriodicSignal planar_forcing(double angle = 0.0) {
    // (1.5 cos 2 pi t, 1.5 sin 2 pi t) rotated by `angle`.
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return make_fourier_forcing(1.0, 2, {1.5 * v2(c, s)}, {1.5 * v2(-s, c)});
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Shared results so expensive runs happen once.
struct OrbitRun {
    PeriodicOrbitResult orbit;
    BoundSetSpec spec;
    double seconds = 0.0;
};

OrbitRun solve_linear() {
    const auto t0 = std::chrono::steady_clock::now();
    const PeriodicSignal F = linear_forcing();
    const double a = compute_a_linear(kG, 2.0, 0.5);
    const double b = compute_b_linear(a, 2.0, 0.5);
    const BoundSetSpec spec{a, b, 1};
    auto orbit = continue_in_lambda({kG, 0.0, 1}, F, tight(), {}, spec);
    return {std::move(orbit), spec, seconds_since(t0)};
}

OrbitRun solve_planar(double angle, std::optional<BoundSetSpec> spec_in = std::nullopt) {
    const auto t0 = std::chrono::steady_clock::now();
    const PeriodicSignal F = planar_forcing(angle);
    BoundSetSpec spec;
    if (spec_in) {
        spec = *spec_in;
    } else {
        const double a = compute_a_planar(kG, 1.5, 0.5);
        const double b = compute_b_planar(a, F, kG, default_lambda_grid(), VerifyConfig{});
        spec = {a, b, 2};
    }
    auto orbit = continue_in_lambda({kG, 0.0, 2}, F, tight(), {}, spec);
    return {std::move(orbit), spec, seconds_since(t0)};
}

bool returns_periodically(const OrbitRun& run, const PeriodicSignal& F, std::string& detail) {
    const PhaseState& z = run.orbit.fixed_point;
    const Trajectory three = evolve(0.0, 3.0 * F.period(), z, {kG, 1.0, z.dim()}, F, tight());
    if (three.fell()) {
        detail += " re-integration fell";
        return false;
    }
    double worst = 0.0;
    for (int k = 1; k <= 3; ++k) {
        worst = std::max(worst, distance(three.dense_eval(k * F.period()), z));
    }
    detail += " return " + fmt("%.2e", worst);
    return worst < kReturnTol;
}

bool orbit_criteria(const OrbitRun& run, const PeriodicSignal& F, double limit, std::string& detail) {
    const auto& o = run.orbit;
    const bool converged = o.lambda == 1.0 && o.residual < kResidualTol;
    detail = "residual " + fmt("%.2e", o.residual) + ", lambda nodes " +
             std::to_string(o.lambda_path.size());
    const bool back = returns_periodically(run, F, detail);
    const auto& c = *o.containment;
    detail += ", max|x| " + fmt("%.4f", c.max_abs_x) + " <= a " + fmt("%.4f", run.spec.a) +
              ", max cone " + fmt("%.3f", c.max_cone) + " (b " + fmt("%.4f", run.spec.b) + ")";
    detail += ", " + fmt("%.2f s", run.seconds);
    return converged && back && c.inside && run.seconds < limit;
}

Outcome degree_signs() {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path configs = fs::path(INVPEND_SOURCE_DIR) / "configs";
    const fs::path out = fs::temp_directory_path() / "invpend_acceptance" / "degree";
    int signs[2] = {0, 0};
    const char* files[2] = {"linear.json", "planar.json"};
    for (int i = 0; i < 2; ++i) {
        RunConfig cfg = load_config(configs / files[i]);
        cfg.output_dir = out / files[i];
        std::ostringstream so, se;
        if (cmd_degree(cfg, CommandIo{so, se, false}) != kExitOk) {
            return {false, "cmd_degree failed"};
        }
        const std::string text = so.str();
        const auto pos = text.find("degree = ");
        signs[i] = pos == std::string::npos ? 0 : std::stoi(text.substr(pos + 9));
    }
    const double secs = seconds_since(t0);
    return {signs[0] == -1 && signs[1] == 1 && secs < kDegreeSeconds,
            "linear " + std::to_string(signs[0]) + ", planar " + std::to_string(signs[1]) + ", " +
                fmt("%.3f s", secs)};
}

Outcome unforced_fixed_point() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst_z = 0.0;
    double worst_res = 0.0;
    for (int dim : {1, 2}) {
        const auto r = continue_in_lambda({kG, 0.0, dim}, PeriodicSignal::zero(1.0, dim), tight(), {});
        worst_z = std::max(worst_z, norm(r.fixed_point));
        worst_res = std::max(worst_res, r.residual);
    }
    const double secs = seconds_since(t0);
    return {worst_z < kUnforcedTol && worst_res < kUnforcedTol && secs < kUnforcedSeconds,
            "|z| " + fmt("%.1e", worst_z) + ", residual " + fmt("%.1e", worst_res) + ", " +
                fmt("%.3f s", secs)};
}

Outcome linear_orbit(const OrbitRun& run) {
    std::string detail;
    const bool ok = orbit_criteria(run, linear_forcing(), kLinearSeconds, detail);
    return {ok, detail};
}

Outcome planar_orbit(const OrbitRun& run) {
    std::string detail;
    bool ok = orbit_criteria(run, planar_forcing(), kPlanarSeconds, detail);
    const OrbitRun rotated = solve_planar(kPi / 2.0, run.spec);
    const PhaseState& z = run.orbit.fixed_point;
    const PhaseState expected(v2(-z.x[1], z.x[0]), v2(-z.p[1], z.p[0]));
    const double diff = distance(rotated.orbit.fixed_point, expected);
    detail += ", rotation " + fmt("%.2e", diff);
    ok = ok && diff < kRotationTol && run.seconds + rotated.seconds < kPlanarSeconds;
    return {ok, detail};
}

struct CertPair {
    BoundSetCertificate base;
    BoundSetCertificate dense;
};

CertPair certify(const BoundSetSpec& spec, const PeriodicSignal& F) {
    const auto grid = default_lambda_grid();
    VerifyConfig cfg;
    VerifyConfig dense = cfg;
    dense.samples_per_face = 2 * cfg.samples_per_face;
    return {verify_bound_set(spec, kG, F, grid, cfg), verify_bound_set(spec, kG, F, grid, dense)};
}

bool certificate_ok(const CertPair& c, const char* name, std::string& detail) {
    auto drift = [](double a, double b) { return std::abs(b - a) / std::abs(a); };
    const double dg = drift(c.base.min_margin_gamma, c.dense.min_margin_gamma);
    const double dd = drift(c.base.min_margin_delta, c.dense.min_margin_delta);
    detail += std::string(detail.empty() ? "" : "; ") + name + " margins " +
              fmt("%.4g", c.base.min_margin_gamma) + "/" + fmt("%.4g", c.base.min_margin_delta) +
              " drift " + fmt("%.1f%%", 100 * std::max(dg, dd));
    auto good = [](const BoundSetCertificate& x) {
        return x.verified && x.min_margin_gamma > 0.0 && x.min_margin_delta > 0.0 && x.corner_ok &&
               x.spot_failures == 0;
    };
    return good(c.base) && good(c.dense) && dg <= kMarginDrift && dd <= kMarginDrift;
}

Outcome certificates(const CertPair& lin, const CertPair& pl) {
    std::string detail;
    const bool a = certificate_ok(lin, "linear", detail);
    const bool b = certificate_ok(pl, "planar", detail);
    return {a && b, detail};
}

Outcome xtp_property(const CertPair& pl) {
    const double worst = std::max(pl.base.max_xtp_excess, pl.dense.max_xtp_excess);
    const bool nonvacuous = pl.base.tangent_samples_delta > 0 && pl.dense.tangent_samples_delta > 0;
    return {worst <= kXtpSlack && nonvacuous,
            "max(|x^T p| - 4||F|||x|/b) " + fmt("%.4f", worst) + " over " +
                std::to_string(pl.base.tangent_samples_delta + pl.dense.tangent_samples_delta) +
                " tangent samples"};
}

// Entrywise relative difference with a floor of 1e-3 times the largest entry,
// so entries that vanish by symmetry are compared on the matrix scale.
double jacobian_rel_diff(const StateMat& A, const StateMat& B) {
    const double floor = 1e-3 * A.cwiseAbs().maxCoeff();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            worst = std::max(worst, oracle::rel_diff(A(i, j), B(i, j), floor));
        }
    }
    return worst;
}

Outcome jacobians(const OrbitRun& lin, const OrbitRun& pl) {
    double worst = 0.0;
    const std::pair<const OrbitRun*, PeriodicSignal> runs[] = {{&lin, linear_forcing()},
                                                               {&pl, planar_forcing()}};
    for (const auto& [run, F] : runs) {
        const PhaseState& z = run->orbit.fixed_point;
        const ModelParams params{kG, 1.0, z.dim()};
        const StateMat var = poincare_jacobian(z, params, F, tight(), PoincareJacobianMode::Variational);
        const StateMat fd =
            poincare_jacobian(z, params, F, tight(), PoincareJacobianMode::FiniteDifference);
        worst = std::max(worst, jacobian_rel_diff(var, fd));
    }

    const auto e = oracle::linearized_flow(1.0, 1.0);
    StateMat expm(2, 2);
    expm << e[0], e[1], e[2], e[3];
    const auto zero = PeriodicSignal::zero(1.0, 1);
    double expm_err = 0.0;
    for (auto mode : {PoincareJacobianMode::Variational, PoincareJacobianMode::FiniteDifference}) {
        const StateMat J = poincare_jacobian(PhaseState::origin(1), {1.0, 0.0, 1}, zero, tight(), mode);
        expm_err = std::max(expm_err, (J - expm).cwiseAbs().maxCoeff());
    }
    return {worst < kJacobianRel && expm_err < kExpmTol,
            "fd vs variational " + fmt("%.2e", worst) + ", vs exp (cosh 1, sinh 1) " +
                fmt("%.2e", expm_err)};
}

Outcome whitney() {
    const auto t0 = std::chrono::steady_clock::now();
    const JourneySpec journey{make_fourier_forcing(2.0 * kPi, 1, {}, {v1(0.5)}), 10.0, kG};
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-11;
    cfg.abs_tol = 1e-14;
    const BisectionResult r = bisect_survivor(journey, cfg, 60);

    // Bracket invariant from the log: every step starts from endpoints whose
    // recorded classes are FallsNegative (left) and FallsPositive (right).
    bool invariant = r.transcript.size() >= 2 &&
                     r.transcript[0].mid_class == FallClass::FallsNegative &&
                     r.transcript[1].mid_class == FallClass::FallsPositive;
    double l = r.transcript[0].l;
    double rr = r.transcript[0].r;
    for (std::size_t i = 2; i < r.transcript.size() && invariant; ++i) {
        const auto& s = r.transcript[i];
        invariant = s.l == l && s.r == rr && s.l < s.mid && s.mid < s.r;
        if (s.mid_class == FallClass::FallsNegative) {
            l = s.mid;
        } else if (s.mid_class == FallClass::FallsPositive) {
            rr = s.mid;
        }
    }

    IntegratorConfig check;
    check.rel_tol = 1e-12;
    check.abs_tol = 1e-15;
    const Trajectory traj = evolve(0.0, journey.t_end, PhaseState::linear(r.best_x0, 0.0),
                                   {kG, 1.0, 1}, journey.F, check);
    double max_x = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        max_x = std::max(max_x, std::abs(traj.state(i).x[0]));
    }
    for (int k = 0; k <= 20000; ++k) {
        max_x = std::max(max_x, std::abs(traj.dense_eval(journey.t_end * k / 20000.0).x[0]));
    }
    const bool survives = !traj.fell() && traj.t_end() == journey.t_end && max_x < kWhitneyBound;
    const double secs = seconds_since(t0);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "x0 = %.17g (%s after %d steps), re-integrated max|x| %.4f, %.2f s",
                  r.best_x0, to_string(r.best_class), r.transcript.back().step, max_x, secs);
    return {invariant && survives && secs < kWhitneySeconds, buf};
}

// Upper bound on |y(1) - exp(A) y0| for the unforced linear system with G = 1
// from (x0, 0): variation of constants with |e^{A t}| = e^t and the
// nonlinearity g = x (sqrt(1-x^2) - 1) - p^2 x / (1-x^2) bounded along
// |x| <= X(s) = (1+eta) x0 cosh s, |p| <= P(s) = (1+eta) x0 sinh s.
double nonlinearity_bound(double x0) {
    const double eta = 0.01;
    auto g = [&](double s) {
        const double X = (1 + eta) * x0 * std::cosh(s);
        const double P = (1 + eta) * x0 * std::sinh(s);
        return X * X * X / (2.0 * std::sqrt(1 - X * X)) + P * P * X / (1 - X * X);
    };
    // Upper Riemann sum: e^{1-s} decreases and g increases on [0, 1].
    const int n = 4000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double s0 = double(i) / n;
        const double s1 = double(i + 1) / n;
        sum += std::exp(1.0 - s0) * g(s1) / n;
    }
    // The bootstrap |y - y_lin| <= eta x0 must hold for the bound on X, P.
    return sum <= eta * x0 ? sum : std::numeric_limits<double>::infinity();
}

Outcome integrator_order() {
    const double x0 = 1e-3;
    const auto zero = PeriodicSignal::zero(1.0, 1);
    const double delta = nonlinearity_bound(x0);
    auto error_at = [&](double rel) {
        IntegratorConfig cfg;
        cfg.rel_tol = rel;
        cfg.abs_tol = rel * x0;
        const PhaseState s = evolve(0.0, 1.0, PhaseState::linear(x0, 0.0), {1.0, 1.0, 1}, zero, cfg)
                                 .final_state();
        return std::hypot(s.x[0] - x0 * std::cosh(1.0), s.p[0] - x0 * std::sinh(1.0));
    };
    const double loose = error_at(1e-3);
    const double strict = error_at(1e-5);
    // Worst case over the unknown split between integrator and nonlinearity error.
    const double ratio = (loose - delta) / (strict + delta);
    return {ratio >= kOrderFactor,
            "error " + fmt("%.3e", loose) + " -> " + fmt("%.3e", strict) + ", nonlinearity <= " +
                fmt("%.2e", delta) + ", certified ratio " + fmt("%.1f", ratio)};
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](const char* name, const std::function<Outcome()>& fn) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s  %-28s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    };

    std::optional<OrbitRun> lin;
    std::optional<OrbitRun> pl;
    std::optional<CertPair> lin_cert;
    std::optional<CertPair> pl_cert;

    report("degree signs", degree_signs);
    report("unforced fixed point", unforced_fixed_point);
    report("linear periodic orbit", [&] {
        lin = solve_linear();
        return linear_orbit(*lin);
    });
    report("planar periodic orbit", [&] {
        pl = solve_planar(0.0);
        return planar_orbit(*pl);
    });
    report("bound-set certificates", [&] {
        const PeriodicSignal Fl = linear_forcing();
        const double nl = forcing_norm(Fl);
        const double a = compute_a_linear(kG, nl, 0.5);
        lin_cert = certify({a, compute_b_linear(a, nl, 0.5), 1}, Fl);
        const PeriodicSignal Fp = planar_forcing();
        const double ap = compute_a_planar(kG, forcing_norm(Fp), 0.5);
        const double bp = compute_b_planar(ap, Fp, kG, default_lambda_grid(), VerifyConfig{});
        pl_cert = certify({ap, bp, 2}, Fp);
        return certificates(*lin_cert, *pl_cert);
    });
    report("xtp bound on cone face", [&] {
        if (!pl_cert) {
            return Outcome{false, "no planar certificate"};
        }
        return xtp_property(*pl_cert);
    });
    report("jacobian cross-validation", [&] {
        if (!lin || !pl) {
            return Outcome{false, "periodic orbits unavailable"};
        }
        return jacobians(*lin, *pl);
    });
    report("whitney bisection", whitney);
    report("integrator order", integrator_order);

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}

#include "invpend/commands.hpp"

#include "invpend/bounds.hpp"
#include "invpend/errors.hpp"
#include "invpend/whitney.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace invpend {

namespace {

using nlohmann::json;

std::vector<double> to_list(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json state_json(const PhaseState& s) { return {{"x", to_list(s.x)}, {"p", to_list(s.p)}}; }

std::ofstream open_output(const RunConfig& config, const char* name) {
    std::filesystem::create_directories(config.output_dir);
    const auto path = config.output_dir / name;
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

void write_json(const RunConfig& config, const char* name, const json& doc) {
    auto out = open_output(config, name);
    out << std::setprecision(17) << doc.dump(2) << '\n';
}

const char* problem_name(const RunConfig& config) {
    return config.problem == Problem::Linear ? "linear" : "planar";
}

struct BoundsOutcome {
    std::optional<BoundSetCertificate> certificate;
    bool analytic_invariants = false;
    std::string failure;
};

BoundsOutcome run_bounds(const RunConfig& config, const ProblemSetup& setup, const CommandIo& io) {
    const auto& bc = config.bounds;
    const double F_norm = forcing_norm(setup.F);
    const std::vector<double> grid = default_lambda_grid(bc.lambda_points);
    VerifyConfig vc;
    vc.samples_per_face = bc.samples_per_face;
    vc.spot_checks = bc.spot_checks;
    vc.seed = config.seed;
    vc.integrator = config.integrator;

    BoundsOutcome outcome;
    double a = 0.0;
    double b = 0.0;
    if (setup.dim == 1) {
        a = bc.a ? *bc.a : compute_a_linear(setup.G, F_norm, bc.a_margin);
        b = bc.b ? *bc.b : compute_b_linear(a, F_norm, bc.b_margin);
    } else {
        a = bc.a ? *bc.a : compute_a_planar(setup.G, F_norm, bc.a_margin);
        if (bc.b) {
            b = *bc.b;
        } else {
            try {
                b = compute_b_planar(a, setup.F, setup.G, grid, vc, bc.b_cap);
            } catch (const VerificationFailure& e) {
                outcome.failure = e.what();
                return outcome;
            }
        }
    }
    const BoundSetSpec spec{a, b, setup.dim};
    outcome.analytic_invariants = spec.satisfies_invariants(setup.G, F_norm);
    if (io.verbose) {
        io.out << "bound set: a = " << a << ", b = " << b << ", ||F|| = " << F_norm
               << (outcome.analytic_invariants ? "" : " (analytic sufficient conditions not met)")
               << '\n';
    }
    outcome.certificate = verify_bound_set(spec, setup.G, setup.F, grid, vc);
    {
        auto out = open_output(config, "certificate.json");
        write_certificate_json(out, *outcome.certificate);
    }
    const auto& cert = *outcome.certificate;
    if (!cert.verified) {
        std::ostringstream msg;
        msg << "bound set not verified (min margin gamma " << cert.min_margin_gamma << ", delta "
            << cert.min_margin_delta << ", corner_ok " << cert.corner_ok << ", spot failures "
            << cert.spot_failures << ")";
        if (cert.failing) {
            msg << "; failing " << to_string(cert.failing->face) << " sample at t = "
                << cert.failing->t << ", lambda = " << cert.failing->lambda;
        }
        outcome.failure = msg.str();
    }
    return outcome;
}

json bounds_summary(const BoundsOutcome& outcome) {
    if (!outcome.certificate) {
        return {{"verified", false}, {"error", outcome.failure}};
    }
    const auto& c = *outcome.certificate;
    return {{"a", c.spec.a},
            {"b", c.spec.b},
            {"F_norm", c.F_norm},
            {"analytic_invariants", outcome.analytic_invariants},
            {"verified", c.verified}};
}

}  // namespace

int cmd_verify_bounds(const RunConfig& config, const CommandIo& io) {
    const ProblemSetup setup = build_problem(config);
    const BoundsOutcome outcome = run_bounds(config, setup, io);
    if (!outcome.failure.empty()) {
        io.err << outcome.failure << '\n';
        return kExitVerification;
    }
    io.out << "bound set verified: a = " << outcome.certificate->spec.a
           << ", b = " << outcome.certificate->spec.b << '\n';
    return kExitOk;
}

int cmd_solve_periodic(const RunConfig& config, const CommandIo& io) {
    const ProblemSetup setup = build_problem(config);
    const BoundsOutcome outcome = run_bounds(config, setup, io);
    json result;
    result["problem"] = problem_name(config);
    result["G"] = setup.G;
    result["period"] = setup.F.period();
    result["bound_set"] = bounds_summary(outcome);
    if (!outcome.failure.empty()) {
        result["status"] = "verification_failed";
        write_json(config, "result.json", result);
        io.err << outcome.failure << '\n';
        return kExitVerification;
    }

    const ModelParams params{setup.G, 0.0, setup.dim};
    std::optional<PeriodicOrbitResult> orbit;
    try {
        orbit = continue_in_lambda(params, setup.F, config.integrator, config.continuation,
                                   outcome.certificate->spec);
    } catch (const ContinuationStuck& e) {
        result["status"] = "continuation_failed";
        result["error"] = e.what();
        result["last_good_lambda"] = e.last_good_lambda();
        write_json(config, "result.json", result);
        io.err << e.what() << '\n';
        return kExitContinuation;
    } catch (const std::runtime_error& e) {
        result["status"] = "continuation_failed";
        result["error"] = e.what();
        write_json(config, "result.json", result);
        io.err << "continuation failed: " << e.what() << '\n';
        return kExitContinuation;
    }

    {
        auto out = open_output(config, "orbit.csv");
        orbit->orbit.write_csv(out);
    }
    std::ostringstream orbit_doc;
    write_orbit_json(orbit_doc, *orbit);
    result["orbit"] = json::parse(orbit_doc.str());
    const bool inside = orbit->containment && orbit->containment->inside;
    result["status"] = inside ? "ok" : "containment_failed";
    write_json(config, "result.json", result);

    io.out << "periodic orbit: z = (" << orbit->fixed_point.packed().transpose() << "), residual "
           << orbit->residual << ", lambda nodes " << orbit->lambda_path.size() << '\n';
    if (!inside) {
        io.err << "orbit leaves the verified bound set\n";
        return kExitVerification;
    }
    return kExitOk;
}

int cmd_whitney(const RunConfig& config, const CommandIo& io) {
    const ProblemSetup setup = build_problem(config);
    const JourneySpec journey{setup.F, config.journey.t_end, setup.G};
    json result;
    result["problem"] = problem_name(config);
    result["t_end"] = journey.t_end;

    if (setup.dim == 2) {
        const PlanarGridResult grid = planar_grid_search(journey, config.integrator,
                                                         config.journey.grid_resolution,
                                                         config.journey.bracket);
        {
            auto out = open_output(config, "transcript.csv");
            out << std::setprecision(17) << "x1,x2,survives,fall_time\n";
            for (const auto& p : grid.points) {
                out << p.x0[0] << ',' << p.x0[1] << ',' << (p.survives ? 1 : 0) << ','
                    << p.fall_time << '\n';
            }
        }
        const auto& best = grid.points.at(grid.best);
        result["grid_points"] = grid.points.size();
        result["survivors"] = grid.survivors;
        result["best_x0"] = to_list(best.x0);
        result["best_fall_time"] = best.fall_time;
        write_json(config, "result.json", result);
        io.out << "grid search: " << grid.survivors << " of " << grid.points.size()
               << " release points survive\n";
        return kExitOk;
    }

    try {
        const BisectionResult r =
            bisect_survivor(journey, config.integrator, config.journey.depth, config.journey.bracket);
        {
            auto out = open_output(config, "transcript.csv");
            write_transcript_csv(out, r);
        }
        result["l"] = r.l;
        result["r"] = r.r;
        result["best_x0"] = r.best_x0;
        result["best_class"] = to_string(r.best_class);
        result["steps"] = r.transcript.back().step;
        result["last_fall_time"] = r.transcript.back().fall_time;
        write_json(config, "result.json", result);
        io.out << std::setprecision(17) << "release point x0 = " << r.best_x0 << " ("
               << to_string(r.best_class) << "), bracket [" << r.l << ", " << r.r << "]\n";
        return kExitOk;
    } catch (const NoBracket& e) {
        result["error"] = e.what();
        result["left_class"] = to_string(e.left());
        result["right_class"] = to_string(e.right());
        write_json(config, "result.json", result);
        io.err << e.what() << '\n';
        return kExitNoBracket;
    }
}

int cmd_simulate(const RunConfig& config, const CommandIo& io) {
    const ProblemSetup setup = build_problem(config);
    const PhaseState start = config.initial_state.value_or(PhaseState::origin(setup.dim));
    const double t1 = config.t1.value_or(config.t0 + setup.F.period());
    const ModelParams params{setup.G, 1.0, setup.dim};
    const Trajectory traj = evolve(config.t0, t1, start, params, setup.F, config.integrator);
    {
        auto out = open_output(config, "trajectory.csv");
        traj.write_csv(out);
    }
    json result;
    result["problem"] = problem_name(config);
    result["t0"] = config.t0;
    result["t1"] = t1;
    result["initial_state"] = state_json(start);
    result["final_time"] = traj.t_end();
    result["final_state"] = state_json(traj.final_state());
    result["steps"] = traj.stats().accepted;
    if (const auto fall = traj.fall_event()) {
        result["fell"] = true;
        result["fall_time"] = fall->time;
        result["fall_kind"] = to_string(fall->kind);
        io.out << "rod falls at t = " << fall->time << '\n';
    } else {
        result["fell"] = false;
        io.out << "no fall on [" << config.t0 << ", " << t1 << "]\n";
    }
    write_json(config, "result.json", result);
    return kExitOk;
}

int cmd_degree(const RunConfig& config, const CommandIo& io) {
    const ProblemSetup setup = build_problem(config);
    const ModelParams params{setup.G, 0.0, setup.dim};
    const PeriodicSignal none = PeriodicSignal::zero(1.0, setup.dim);
    const double det = jacobian(0.0, PhaseState::origin(setup.dim), params, none).determinant();
    const int sign = degree_sign(params);
    io.out << "sign det Dw0(0,0) = " << sign << "\ndegree = " << sign << '\n';
    if (io.verbose) {
        io.out << "det Dw0(0,0) = " << det << '\n';
    }
    write_json(config, "result.json",
               {{"problem", problem_name(config)}, {"G", setup.G}, {"det", det},
                {"sign", sign}, {"degree", sign}});
    return kExitOk;
}

}  // namespace invpend

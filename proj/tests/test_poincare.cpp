#include "invpend/errors.hpp"
#include "invpend/poincare.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <json.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace invpend;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

IntegratorConfig tight() {
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-14;
    return cfg;
}

PeriodicSignal cosine(double amplitude) {
    Vec c(1);
    c << amplitude;
    return make_fourier_forcing(1.0, 1, {c}, {});
}

PeriodicSignal circle(double amplitude) {
    Vec c(2), s(2);
    c << amplitude, 0.0;
    s << 0.0, amplitude;
    return make_fourier_forcing(1.0, 2, {c}, {s});
}

double max_abs_entry_diff(const StateMat& A, const StateMat& B) {
    return (A - B).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("Poincare Jacobian at the unforced equilibrium is the matrix exponential",
          "[poincare]") {
    const auto F = PeriodicSignal::zero(1.0, 1);
    const ModelParams params{1.0, 0.0, 1};
    const auto e = oracle::linearized_flow(1.0, 1.0);
    StateMat expm(2, 2);
    expm << e[0], e[1], e[2], e[3];
    CHECK(expm(0, 0) == Approx(std::cosh(1.0)));
    CHECK(expm(0, 1) == Approx(std::sinh(1.0)));

    const StateMat var = poincare_jacobian(PhaseState::origin(1), params, F, tight(),
                                           PoincareJacobianMode::Variational);
    const StateMat fd = poincare_jacobian(PhaseState::origin(1), params, F, tight(),
                                          PoincareJacobianMode::FiniteDifference);
    CHECK(max_abs_entry_diff(var, expm) < 1e-10);
    CHECK(max_abs_entry_diff(fd, expm) < 1e-6);
}

TEST_CASE("small states follow the linearized flow", "[poincare]") {
    const auto F = PeriodicSignal::zero(1.0, 1);
    const ModelParams params{1.0, 0.0, 1};
    const auto e = oracle::linearized_flow(1.0, 1.0);
    const PhaseState z = PhaseState::linear(1e-5, -2e-5);
    const PhaseState Pz = poincare_map(z, params, F, tight());
    // The neglected terms are cubic in |z|.
    CHECK(Pz.x[0] == Approx(e[0] * 1e-5 - e[1] * 2e-5).margin(1e-13));
    CHECK(Pz.p[0] == Approx(e[2] * 1e-5 - e[3] * 2e-5).margin(1e-13));
}

TEST_CASE("planar Jacobian at the equilibrium decouples into two linear blocks", "[poincare]") {
    const auto F = PeriodicSignal::zero(1.0, 2);
    const StateMat J = poincare_jacobian(PhaseState::origin(2), {1.0, 0.0, 2}, F, tight(),
                                         PoincareJacobianMode::Variational);
    const auto e = oracle::linearized_flow(1.0, 1.0);
    for (int i = 0; i < 2; ++i) {
        CHECK(J(i, i) == Approx(e[0]).epsilon(1e-10));
        CHECK(J(i, i + 2) == Approx(e[1]).epsilon(1e-10));
        CHECK(J(i + 2, i) == Approx(e[2]).epsilon(1e-10));
        CHECK(J(i + 2, i + 2) == Approx(e[3]).epsilon(1e-10));
        CHECK(std::abs(J(i, 1 - i)) < 1e-12);
        CHECK(std::abs(J(i, 3 - i)) < 1e-12);
    }
}

TEST_CASE("Poincare map of the autonomous flow commutes with the flow", "[poincare]") {
    const auto F = PeriodicSignal::zero(1.0, 1);
    const ModelParams params{1.0, 0.0, 1};
    const PhaseState z = PhaseState::linear(0.01, 0.003);
    const PhaseState a = evolve(0.0, 0.3, poincare_map(z, params, F, tight()), params, F, tight())
                             .final_state();
    const PhaseState b =
        poincare_map(evolve(0.0, 0.3, z, params, F, tight()).final_state(), params, F, tight());
    CHECK(distance(a, b) < 1e-11);
}

TEST_CASE("Jacobian modes agree away from the equilibrium", "[poincare]") {
    const auto F = circle(0.5);
    const ModelParams params{9.81, 1.0, 2};
    const PhaseState z = PhaseState::planar(0.02, -0.01, 0.05, 0.0);
    const StateMat var =
        poincare_jacobian(z, params, F, tight(), PoincareJacobianMode::Variational);
    const StateMat fd =
        poincare_jacobian(z, params, F, tight(), PoincareJacobianMode::FiniteDifference);
    const StateMat fd_serial = poincare_jacobian(z, params, F, tight(),
                                                 PoincareJacobianMode::FiniteDifference, 1e-7,
                                                 Execution::Serial);
    CHECK(max_abs_entry_diff(fd, fd_serial) == 0.0);
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            CHECK(std::abs(var(r, c) - fd(r, c)) <= 1e-5 * std::max(1.0, std::abs(var(r, c))));
        }
    }
}

TEST_CASE("Poincare map reports a fall", "[poincare]") {
    const auto F = PeriodicSignal::zero(1.0, 1);
    CHECK_THROWS_AS(poincare_map(PhaseState::linear(0.9, 0.0), {9.81, 1.0, 1}, F, tight()),
                    FallError);
}

TEST_CASE("Newton finds the small forced orbit", "[poincare]") {
    const auto F = cosine(0.05);
    const ModelParams params{9.81, 1.0, 1};
    ContinuationConfig ccfg;
    const auto res = newton_correct(PhaseState::origin(1), params, F, tight(), ccfg);
    CHECK(res.residual < 1e-10);
    double max_x = 0.0;
    for (std::size_t i = 0; i < res.orbit.size(); ++i) {
        max_x = std::max(max_x, std::abs(res.orbit.state(i).x[0]));
    }
    CHECK(max_x < 0.05);

    // Independent re-check with fixed-step RK4.
    oracle::LinearRk4 rk{9.81, 1.0, [](double t) { return 0.05 * std::cos(2 * kPi * t); }};
    const auto run = rk.run(0.0, 1.0, {res.fixed_point.x[0], res.fixed_point.p[0]}, 1e-4, 0.9);
    CHECK(std::abs(run.y[0] - res.fixed_point.x[0]) < 1e-6);
    CHECK(std::abs(run.y[1] - res.fixed_point.p[0]) < 1e-6);

    // Starting on the fixed point changes nothing.
    const auto again = newton_correct(res.fixed_point, params, F, tight(), ccfg);
    CHECK(distance(again.fixed_point, res.fixed_point) < 1e-12);
    CHECK(again.newton_iterations <= 3);
}

TEST_CASE("unforced continuation takes one step and stays at the origin", "[poincare]") {
    for (int dim : {1, 2}) {
        const auto F = PeriodicSignal::zero(1.0, dim);
        const auto res = continue_in_lambda({9.81, 0.0, dim}, F, tight(), {});
        REQUIRE(res.lambda_path.size() == 2);
        CHECK(res.lambda_path.front().lambda == 0.0);
        CHECK(res.lambda_path.back().lambda == 1.0);
        CHECK(norm(res.fixed_point) < 1e-12);
        CHECK(res.residual < 1e-12);
    }
}

TEST_CASE("orbit scales linearly with small forcing amplitude", "[poincare]") {
    const auto small = continue_in_lambda({9.81, 0.0, 1}, cosine(0.01), tight(), {});
    const auto twice = continue_in_lambda({9.81, 0.0, 1}, cosine(0.02), tight(), {});
    const double ratio = norm(twice.fixed_point) / norm(small.fixed_point);
    CHECK(ratio > 2.0 / 1.2);
    CHECK(ratio < 2.0 * 1.2);
}

TEST_CASE("every node on the lambda path is a fixed point", "[poincare]") {
    const auto F = cosine(1.0);
    const auto res = continue_in_lambda({9.81, 0.0, 1}, F, tight(), {});
    REQUIRE(res.lambda_path.size() >= 2);
    CHECK(res.lambda_path.back().lambda == 1.0);
    double prev = -1.0;
    for (const auto& node : res.lambda_path) {
        CHECK(node.lambda > prev);
        prev = node.lambda;
        const ModelParams p{9.81, node.lambda, 1};
        CHECK(distance(poincare_map(node.fixed_point, p, F, tight()), node.fixed_point) < 1e-9);
    }
}

TEST_CASE("continuation gets stuck under violent forcing", "[poincare]") {
    ContinuationConfig ccfg;
    ccfg.lambda_step_init = 0.5;
    ccfg.lambda_step_min = 0.4;
    try {
        continue_in_lambda({9.81, 0.0, 1}, cosine(400.0), tight(), ccfg);
        FAIL("expected ContinuationStuck");
    } catch (const ContinuationStuck& e) {
        CHECK(e.last_good_lambda() == 0.0);
    }
}

TEST_CASE("ill-conditioned corrector is reported", "[poincare]") {
    ContinuationConfig ccfg;
    ccfg.max_condition = 1.5;
    try {
        newton_correct(PhaseState::origin(1), {9.81, 1.0, 1}, cosine(0.5), tight(), ccfg);
        FAIL("expected NewtonFailure");
    } catch (const NewtonFailure& e) {
        CHECK(e.kind() == NewtonFailure::Kind::IllConditioned);
    }
}

TEST_CASE("continuation settings are validated", "[poincare]") {
    ContinuationConfig ccfg;
    ccfg.lambda_step_init = 0.0;
    CHECK_THROWS_AS(ccfg.validate(), std::invalid_argument);
    ccfg = {};
    ccfg.max_condition = 1.0;
    CHECK_THROWS_AS(ccfg.validate(), std::invalid_argument);
}

TEST_CASE("orbit JSON carries the fixed point and lambda path", "[poincare]") {
    const auto res = continue_in_lambda({9.81, 0.0, 1}, cosine(0.2), tight(), {},
                                        BoundSetSpec{0.5, 3.0, 1});
    std::stringstream out;
    write_orbit_json(out, res);
    const auto j = nlohmann::json::parse(out.str());
    CHECK(j.at("lambda").get<double>() == 1.0);
    CHECK(j.at("residual").get<double>() < 1e-8);
    CHECK(j.at("fixed_point").at("x").size() == 1);
    CHECK(j.at("lambda_path").size() == res.lambda_path.size());
    CHECK(j.at("monodromy").size() == 2);
    CHECK(j.at("monodromy_eigenvalues").size() == 2);
    CHECK(j.at("containment").at("inside").get<bool>());
}

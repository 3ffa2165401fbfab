#pragma once

#include "invpend/bound_set.hpp"
#include "invpend/dynamics.hpp"
#include "invpend/forcing.hpp"
#include "invpend/integrator.hpp"
#include "invpend/parallel.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace invpend {

// ---------------------------------------------------------------------------
// Bound-set constants
// ---------------------------------------------------------------------------

/// Smallest a with G a = ||F|| sqrt(1 - a^2), i.e. ||F|| / sqrt(G^2 + ||F||^2).
double threshold_a_linear(double G, double F_norm);
/// threshold + margin (1 - threshold).
double compute_a_linear(double G, double F_norm, double margin = 0.5);

/// sqrt((1 + a) ||F|| / (1 - a)).
double threshold_b_linear(double a, double F_norm);
/// threshold (1 + margin); `margin` itself when ||F|| = 0.
double compute_b_linear(double a, double F_norm, double margin = 0.5);

/// Smallest root in (0, 1) of G a sqrt(1+a) = (1+a) ||F|| sqrt(1-a), by
/// bisection to 1e-12 (0 when ||F|| = 0).
double threshold_a_planar(double G, double F_norm);
double compute_a_planar(double G, double F_norm, double margin = 0.5);

/// max((16 ||F||^2 / (1-a)^3)^(1/4), sqrt(||F||)).
double threshold_b_planar(double a, double F_norm);

/// sign det (Dw_0)(0, 0): -1 for the linear problem, +1 for the planar one.
/// Equals the Brouwer degree of w_0 on the interior of the bound set since the
/// origin is the only zero of w_0 there.
int degree_sign(const ModelParams& params);

// ---------------------------------------------------------------------------
// Boundary conditions
// ---------------------------------------------------------------------------

/// (D m_a) v = x^T p.
double gate_m(const PhaseState& s);

/// (D n_b) v evaluated term by term:
/// (b/|x| + G sqrt(1-|x|^2)/|p| - (x^T p)^2/(|p|(1-|x|^2)) - |p|) x^T p
///   + lambda ((x^T F) (x^T p) - F^T p) / |p|.
double gate_n(double t, const PhaseState& s, const ModelParams& params, const PeriodicSignal& F,
              double b);

/// v^T (D^2 m_a) v + (D m_a)(D v) v = |p|^2 + R |x|^2 + x^T Phi on the face
/// |x| = a at a tangency x^T p = 0. Throws InvalidSample off the face.
double curvature_check_m(double t, const PhaseState& s, const ModelParams& params,
                         const PeriodicSignal& F, double a);

/// v^T (D^2 n_b) v + (D n_b)(D v) v on the face n_b = 0, summed term by term:
/// both squared-determinant terms (zero for d = 1), b R |x| + R |p|, the
/// dR/dx, dR/dp terms, (b/|x|) x^T Phi, p^T (dPhi/dt + dPhi/dx p)/|p| and
/// (x^T p/|p|) (dR/dp) Phi.
///
/// Throws InvalidSample when n_b != 0, when x = 0 (Z edge) or when
/// |(D n_b) v| exceeds gate_tol.
double curvature_check_n(double t, const PhaseState& s, const ModelParams& params,
                         const PeriodicSignal& F, double b, double gate_tol);

/// Z-edge exit condition at (t, 0, p) with |p| = b: b^2 > ||F|| and, for every
/// lambda in the grid, a forward integration leaves {n_b <= 0} within 1e-3 T.
bool exit_cone_check(double t, const Vec& p, const PeriodicSignal& F, double G,
                     std::span<const double> lambda_grid, const IntegratorConfig& cfg);

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

std::vector<double> default_lambda_grid(int points = 21);

struct VerifyConfig {
    /// Base resolution of each face coordinate (time uses 2N, angles 2N or 4N).
    int samples_per_face = 8;
    /// Samples with |(De) v| <= gate_rel * b (1 + ||F|| + G) count as tangent.
    double gate_rel = 1e-6;
    int spot_checks = 50;
    std::uint64_t seed = 0;
    IntegratorConfig integrator{};
    Execution exec = Execution::Parallel;
};

enum class Face { Gamma, Delta, Z };
const char* to_string(Face face);

enum class SampleCheck {
    Curvature,    // tangent sample, value = curvature expression
    Orientation,  // linear cone face, value = oriented (D n_b) v
    ExitCone,     // Z edge, value = b^2 - ||F||
    SpotCheck     // integration confirmation, value = -1 on failure
};
const char* to_string(SampleCheck check);

struct BoundarySample {
    Face face = Face::Gamma;
    SampleCheck check = SampleCheck::Curvature;
    double t = 0.0;
    double lambda = 0.0;
    PhaseState state;
    double gate = 0.0;
    double value = 0.0;
};

struct BoundSetCertificate {
    BoundSetSpec spec;
    double G = 0.0;
    double F_norm = 0.0;
    std::vector<double> lambda_grid;
    int samples_per_face = 0;
    std::size_t boundary_samples = 0;
    std::size_t tangent_samples_gamma = 0;
    std::size_t tangent_samples_delta = 0;
    std::size_t z_samples = 0;
    /// Worst curvature value at tangencies on |x| = a.
    double min_margin_gamma = 0.0;
    /// Worst value on the n_b = 0 face: curvature at tangencies (planar) or
    /// the oriented (D n_b) v of the cone sides (linear).
    double min_margin_delta = 0.0;
    bool corner_ok = false;
    /// max over tangent n_b-face samples of |x^T p| - 4 ||F|| |x| / b.
    double max_xtp_excess = 0.0;
    std::size_t spot_checks = 0;
    std::size_t spot_failures = 0;
    bool verified = false;
    std::optional<BoundarySample> worst_gamma;
    std::optional<BoundarySample> worst_delta;
    std::optional<BoundarySample> failing;
};

/// Samples both faces and the Z edge over t in [0, T) and the lambda grid and
/// checks the boundary conditions that make the set a bound set for every
/// lambda. Tangent samples are found both by the gate and by bisection on
/// sign changes of (De) v along each face line.
BoundSetCertificate verify_bound_set(const BoundSetSpec& spec, double G, const PeriodicSignal& F,
                                     std::span<const double> lambda_grid,
                                     const VerifyConfig& cfg);

/// Starts from 1.05 threshold_b_planar (or `floor` for zero forcing) and
/// doubles b until verify_bound_set passes. Throws VerificationFailure past `cap`.
double compute_b_planar(double a, const PeriodicSignal& F, double G,
                        std::span<const double> lambda_grid, const VerifyConfig& cfg,
                        double cap = 1e6, double floor = 1.0);

void write_certificate_json(std::ostream& out, const BoundSetCertificate& cert);

/// ||F|| as used throughout bound-set work: sup_norms on 4096 points (1% margin).
double forcing_norm(const PeriodicSignal& F);

}  // namespace invpend

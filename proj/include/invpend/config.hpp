#pragma once

#include "invpend/forcing.hpp"
#include "invpend/integrator.hpp"
#include "invpend/poincare.hpp"
#include "invpend/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace invpend {

/// Malformed or out-of-range run configuration.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ForcingConfig {
    enum class Kind { Zero, Fourier, PathCsv } kind = Kind::Zero;
    /// Harmonic k+1 coefficients of the carriage acceleration f'' (before division by l).
    std::vector<Vec> cos;
    std::vector<Vec> sin;
    /// Carriage path f samples; resolved against the config file's directory.
    std::filesystem::path path;
};

struct BoundsConfig {
    double a_margin = 0.5;
    double b_margin = 0.5;
    std::optional<double> a;
    std::optional<double> b;
    int samples_per_face = 8;
    int lambda_points = 21;
    int spot_checks = 50;
    double b_cap = 1e6;
};

struct JourneyConfig {
    double t_end = 10.0;
    int depth = 60;
    double bracket = 0.999;
    /// Planar grid-search resolution per axis.
    int grid_resolution = 21;
};

/// One run, fully defaulted. Key names match the JSON schema in the README.
struct RunConfig {
    Problem problem = Problem::Linear;
    double gravity = 9.81;
    double rod_length = 1.0;
    double period = 1.0;
    ForcingConfig forcing;
    IntegratorConfig integrator;
    ContinuationConfig continuation;
    BoundsConfig bounds;
    JourneyConfig journey;
    std::optional<PhaseState> initial_state;
    double t0 = 0.0;
    std::optional<double> t1;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 0;

    int dim() const { return dimension_of(problem); }
    void validate() const;
};

/// Throws ConfigError on unknown keys, wrong types or invalid values.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& file);

/// The rescaled problem a config describes.
struct ProblemSetup {
    PeriodicSignal F;
    double G;
    int dim;
};

ProblemSetup build_problem(const RunConfig& config);

}  // namespace invpend

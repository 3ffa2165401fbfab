#include "invpend/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace invpend {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
        throw ConfigError(where + ": expected an object");
    }
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& item : obj.items()) {
        if (!keys.count(item.key())) {
            throw ConfigError(where + ": unknown key '" + item.key() + "'");
        }
    }
}

double get_number(const json& obj, const char* key, const std::string& where, double fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
        throw ConfigError(where + "." + key + ": expected a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        throw ConfigError(where + "." + key + ": must be finite");
    }
    return d;
}

int get_int(const json& obj, const char* key, const std::string& where, int fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
        throw ConfigError(where + "." + key + ": expected an integer");
    }
    return v.get<int>();
}

Vec get_vector(const json& v, int dim, const std::string& where) {
    Vec out(dim);
    if (v.is_number() && dim == 1) {
        out << v.get<double>();
        return out;
    }
    if (!v.is_array() || static_cast<int>(v.size()) != dim) {
        throw ConfigError(where + ": expected " + std::to_string(dim) + " component(s)");
    }
    for (int i = 0; i < dim; ++i) {
        if (!v[i].is_number()) {
            throw ConfigError(where + ": components must be numbers");
        }
        out[i] = v[i].get<double>();
    }
    return out;
}

std::vector<Vec> get_coeffs(const json& obj, const char* key, int dim, const std::string& where) {
    std::vector<Vec> out;
    if (!obj.contains(key)) {
        return out;
    }
    const json& list = obj.at(key);
    if (!list.is_array()) {
        throw ConfigError(where + "." + key + ": expected a list of coefficients");
    }
    for (std::size_t k = 0; k < list.size(); ++k) {
        out.push_back(get_vector(list[k], dim, where + "." + key + "[" + std::to_string(k) + "]"));
    }
    return out;
}

void parse_forcing(const json& f, const std::filesystem::path& base_dir, int dim,
                   ForcingConfig& out) {
    reject_unknown(f, "forcing", {"type", "cos", "sin", "path"});
    const bool has_fourier = f.contains("cos") || f.contains("sin");
    const bool has_path = f.contains("path");
    if (has_fourier && has_path) {
        throw ConfigError("forcing: give either Fourier coefficients or a path, not both");
    }
    std::string type = has_path ? "path_csv" : (has_fourier ? "fourier" : "zero");
    if (f.contains("type")) {
        if (!f.at("type").is_string()) {
            throw ConfigError("forcing.type: expected a string");
        }
        type = f.at("type").get<std::string>();
    }
    if (type == "zero") {
        if (has_fourier || has_path) {
            throw ConfigError("forcing: type 'zero' takes no coefficients or path");
        }
        out.kind = ForcingConfig::Kind::Zero;
    } else if (type == "fourier") {
        if (has_path) {
            throw ConfigError("forcing: type 'fourier' does not take a path");
        }
        out.kind = ForcingConfig::Kind::Fourier;
        out.cos = get_coeffs(f, "cos", dim, "forcing");
        out.sin = get_coeffs(f, "sin", dim, "forcing");
    } else if (type == "path_csv") {
        if (!has_path || !f.at("path").is_string()) {
            throw ConfigError("forcing: type 'path_csv' needs a string 'path'");
        }
        if (has_fourier) {
            throw ConfigError("forcing: type 'path_csv' does not take coefficients");
        }
        out.kind = ForcingConfig::Kind::PathCsv;
        std::filesystem::path p = f.at("path").get<std::string>();
        out.path = p.is_absolute() ? p : base_dir / p;
    } else {
        throw ConfigError("forcing.type: expected 'zero', 'fourier' or 'path_csv'");
    }
}

void parse_integrator(const json& j, IntegratorConfig& cfg) {
    reject_unknown(j, "integrator",
                   {"rel_tol", "abs_tol", "max_step", "fall_threshold", "max_steps"});
    cfg.rel_tol = get_number(j, "rel_tol", "integrator", cfg.rel_tol);
    cfg.abs_tol = get_number(j, "abs_tol", "integrator", cfg.abs_tol);
    cfg.max_step = get_number(j, "max_step", "integrator", cfg.max_step);
    cfg.fall_threshold = get_number(j, "fall_threshold", "integrator", cfg.fall_threshold);
    const int steps = get_int(j, "max_steps", "integrator", static_cast<int>(cfg.max_steps));
    if (steps <= 0) {
        throw ConfigError("integrator.max_steps: must be positive");
    }
    cfg.max_steps = static_cast<std::size_t>(steps);
}

void parse_continuation(const json& j, ContinuationConfig& cfg) {
    reject_unknown(j, "continuation",
                   {"lambda_step_init", "lambda_step_min", "newton_tol", "newton_max_iters",
                    "fd_step", "jacobian", "max_condition"});
    cfg.lambda_step_init = get_number(j, "lambda_step_init", "continuation", cfg.lambda_step_init);
    cfg.lambda_step_min = get_number(j, "lambda_step_min", "continuation", cfg.lambda_step_min);
    cfg.newton_tol = get_number(j, "newton_tol", "continuation", cfg.newton_tol);
    cfg.newton_max_iters = get_int(j, "newton_max_iters", "continuation", cfg.newton_max_iters);
    cfg.fd_step = get_number(j, "fd_step", "continuation", cfg.fd_step);
    cfg.max_condition = get_number(j, "max_condition", "continuation", cfg.max_condition);
    if (j.contains("jacobian")) {
        const json& v = j.at("jacobian");
        const std::string mode = v.is_string() ? v.get<std::string>() : "";
        if (mode == "variational") {
            cfg.jacobian = ContinuationConfig::Jacobian::Variational;
        } else if (mode == "finite_difference") {
            cfg.jacobian = ContinuationConfig::Jacobian::FiniteDifference;
        } else {
            throw ConfigError("continuation.jacobian: expected 'variational' or 'finite_difference'");
        }
    }
}

void parse_bounds(const json& j, BoundsConfig& cfg) {
    reject_unknown(j, "bounds",
                   {"a_margin", "b_margin", "a", "b", "samples_per_face", "lambda_points",
                    "spot_checks", "b_cap"});
    cfg.a_margin = get_number(j, "a_margin", "bounds", cfg.a_margin);
    cfg.b_margin = get_number(j, "b_margin", "bounds", cfg.b_margin);
    if (j.contains("a")) {
        cfg.a = get_number(j, "a", "bounds", 0.0);
    }
    if (j.contains("b")) {
        cfg.b = get_number(j, "b", "bounds", 0.0);
    }
    cfg.samples_per_face = get_int(j, "samples_per_face", "bounds", cfg.samples_per_face);
    cfg.lambda_points = get_int(j, "lambda_points", "bounds", cfg.lambda_points);
    cfg.spot_checks = get_int(j, "spot_checks", "bounds", cfg.spot_checks);
    cfg.b_cap = get_number(j, "b_cap", "bounds", cfg.b_cap);
}

void parse_journey(const json& j, JourneyConfig& cfg) {
    reject_unknown(j, "journey", {"t_end", "depth", "bracket", "grid_resolution"});
    cfg.t_end = get_number(j, "t_end", "journey", cfg.t_end);
    cfg.depth = get_int(j, "depth", "journey", cfg.depth);
    cfg.bracket = get_number(j, "bracket", "journey", cfg.bracket);
    cfg.grid_resolution = get_int(j, "grid_resolution", "journey", cfg.grid_resolution);
}

}  // namespace

void RunConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ConfigError(std::string(name) + ": must be positive");
        }
    };
    positive(gravity, "gravity");
    positive(rod_length, "rod_length");
    positive(period, "period");
    try {
        integrator.validate();
        continuation.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(bounds.a_margin > 0.0 && bounds.a_margin < 1.0)) {
        throw ConfigError("bounds.a_margin: must lie in (0, 1)");
    }
    if (!(bounds.b_margin > 0.0)) {
        throw ConfigError("bounds.b_margin: must be positive");
    }
    if (bounds.a && !(*bounds.a > 0.0 && *bounds.a < 1.0)) {
        throw ConfigError("bounds.a: must lie in (0, 1)");
    }
    if (bounds.b && !(*bounds.b > 0.0)) {
        throw ConfigError("bounds.b: must be positive");
    }
    if (bounds.samples_per_face < 1 || bounds.samples_per_face > 256) {
        throw ConfigError("bounds.samples_per_face: must lie in [1, 256]");
    }
    if (bounds.lambda_points < 2 || bounds.lambda_points > 1001) {
        throw ConfigError("bounds.lambda_points: must lie in [2, 1001]");
    }
    if (bounds.spot_checks < 0) {
        throw ConfigError("bounds.spot_checks: must be nonnegative");
    }
    positive(bounds.b_cap, "bounds.b_cap");
    positive(journey.t_end, "journey.t_end");
    if (journey.depth < 0 || journey.depth > 200) {
        throw ConfigError("journey.depth: must lie in [0, 200]");
    }
    if (!(journey.bracket > 0.0 && journey.bracket < integrator.fall_threshold)) {
        throw ConfigError("journey.bracket: must lie in (0, fall_threshold)");
    }
    if (journey.grid_resolution < 1 || journey.grid_resolution > 1000) {
        throw ConfigError("journey.grid_resolution: must lie in [1, 1000]");
    }
    if (initial_state) {
        if (initial_state->dim() != dim()) {
            throw ConfigError("initial_state: dimension does not match the problem");
        }
        if (!(initial_state->x.norm() < integrator.fall_threshold)) {
            throw ConfigError("initial_state: |x| must be below the fall threshold");
        }
    }
    if (t1 && !std::isfinite(*t1)) {
        throw ConfigError("t1: must be finite");
    }
}

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    reject_unknown(doc, "config",
                   {"problem", "gravity", "rod_length", "period", "forcing", "integrator",
                    "continuation", "bounds", "journey", "initial_state", "t0", "t1",
                    "output_dir", "seed"});
    RunConfig cfg;
    if (doc.contains("problem")) {
        const json& v = doc.at("problem");
        const std::string name = v.is_string() ? v.get<std::string>() : "";
        if (name == "linear") {
            cfg.problem = Problem::Linear;
        } else if (name == "planar") {
            cfg.problem = Problem::Planar;
        } else {
            throw ConfigError("problem: expected 'linear' or 'planar'");
        }
    }
    cfg.gravity = get_number(doc, "gravity", "config", cfg.gravity);
    cfg.rod_length = get_number(doc, "rod_length", "config", cfg.rod_length);
    cfg.period = get_number(doc, "period", "config", cfg.period);
    if (doc.contains("forcing")) {
        parse_forcing(doc.at("forcing"), base_dir, cfg.dim(), cfg.forcing);
    }
    if (doc.contains("integrator")) {
        parse_integrator(doc.at("integrator"), cfg.integrator);
    }
    if (doc.contains("continuation")) {
        parse_continuation(doc.at("continuation"), cfg.continuation);
    }
    if (doc.contains("bounds")) {
        parse_bounds(doc.at("bounds"), cfg.bounds);
    }
    if (doc.contains("journey")) {
        parse_journey(doc.at("journey"), cfg.journey);
    }
    if (doc.contains("initial_state")) {
        const json& s = doc.at("initial_state");
        reject_unknown(s, "initial_state", {"x", "p"});
        const Vec x = s.contains("x") ? get_vector(s.at("x"), cfg.dim(), "initial_state.x")
                                      : Vec(Vec::Zero(cfg.dim()));
        const Vec p = s.contains("p") ? get_vector(s.at("p"), cfg.dim(), "initial_state.p")
                                      : Vec(Vec::Zero(cfg.dim()));
        cfg.initial_state = PhaseState(x, p);
    }
    cfg.t0 = get_number(doc, "t0", "config", cfg.t0);
    if (doc.contains("t1")) {
        cfg.t1 = get_number(doc, "t1", "config", 0.0);
    }
    if (doc.contains("output_dir")) {
        if (!doc.at("output_dir").is_string()) {
            throw ConfigError("output_dir: expected a string");
        }
        std::filesystem::path p = doc.at("output_dir").get<std::string>();
        cfg.output_dir = p.is_absolute() ? p : base_dir / p;
    }
    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_unsigned()) {
            throw ConfigError("seed: expected a nonnegative integer");
        }
        cfg.seed = doc.at("seed").get<std::uint64_t>();
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("cannot open config file " + file.string());
    }
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + file.string() + ": " + e.what());
    }
    return parse_config(doc, file.parent_path());
}

ProblemSetup build_problem(const RunConfig& config) {
    const int dim = config.dim();
    switch (config.forcing.kind) {
        case ForcingConfig::Kind::Zero:
            return {PeriodicSignal::zero(config.period, dim), config.gravity / config.rod_length, dim};
        case ForcingConfig::Kind::Fourier: {
            auto scale = [&](std::vector<Vec> coeffs) {
                for (auto& c : coeffs) {
                    c /= config.rod_length;
                }
                return coeffs;
            };
            return {make_fourier_forcing(config.period, dim, scale(config.forcing.cos),
                                         scale(config.forcing.sin)),
                    config.gravity / config.rod_length, dim};
        }
        case ForcingConfig::Kind::PathCsv: {
            try {
                PathSamples samples = read_path_csv_file(config.forcing.path.string(),
                                                         config.rod_length);
                if (samples.dim() != dim) {
                    throw ConfigError("forcing.path: column count does not match the problem");
                }
                IngestedPath ingested = ingest_path(samples, config.gravity);
                return {ingested.forcing, ingested.G, dim};
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                throw ConfigError(std::string("forcing.path: ") + e.what());
            }
        }
    }
    throw ConfigError("forcing: unsupported kind");
}

}  // namespace invpend

#include "invpend/forcing.hpp"

#include "invpend/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>

namespace invpend {

namespace {

class ZeroSource final : public SignalSource {
  public:
    explicit ZeroSource(int dim) : dim_(dim) {}
    Vec value(double) const override { return Vec::Zero(dim_); }
    Vec derivative(double) const override { return Vec::Zero(dim_); }
    std::pair<double, double> sup_bounds() const override { return {0.0, 0.0}; }

  private:
    int dim_;
};

class FourierSource final : public SignalSource {
  public:
    FourierSource(double period, int dim, std::vector<Vec> cos_c, std::vector<Vec> sin_c)
        : omega_(2.0 * std::numbers::pi / period), dim_(dim), cos_(std::move(cos_c)),
          sin_(std::move(sin_c)) {
        compute_bounds(period);
    }

    Vec value(double tau) const override {
        Vec out = Vec::Zero(dim_);
        for (std::size_t k = 0; k < cos_.size(); ++k) {
            out += cos_[k] * std::cos(omega_ * double(k + 1) * tau);
        }
        for (std::size_t k = 0; k < sin_.size(); ++k) {
            out += sin_[k] * std::sin(omega_ * double(k + 1) * tau);
        }
        return out;
    }

    Vec derivative(double tau) const override {
        Vec out = Vec::Zero(dim_);
        for (std::size_t k = 0; k < cos_.size(); ++k) {
            const double w = omega_ * double(k + 1);
            out -= cos_[k] * (w * std::sin(w * tau));
        }
        for (std::size_t k = 0; k < sin_.size(); ++k) {
            const double w = omega_ * double(k + 1);
            out += sin_[k] * (w * std::cos(w * tau));
        }
        return out;
    }

    std::pair<double, double> sup_bounds() const override { return bounds_; }

  private:
    // Bound on |d^n F / dt^n| from the coefficient magnitudes.
    double derivative_bound(int order) const {
        double acc = 0.0;
        const std::size_t n = std::max(cos_.size(), sin_.size());
        for (std::size_t k = 0; k < n; ++k) {
            const double mag = (k < cos_.size() ? cos_[k].norm() : 0.0) +
                               (k < sin_.size() ? sin_[k].norm() : 0.0);
            acc += mag * std::pow(omega_ * double(k + 1), order);
        }
        return acc;
    }

    void compute_bounds(double period) {
        constexpr int kGrid = 4096;
        const double h = period / kGrid;
        double max_f = 0.0;
        double max_df = 0.0;
        for (int i = 0; i < kGrid; ++i) {
            const double tau = i * h;
            max_f = std::max(max_f, value(tau).norm());
            max_df = std::max(max_df, derivative(tau).norm());
        }
        // Near an interior maximum of u.F the first derivative vanishes, so the
        // nearest grid point is at most M2 (h/2)^2 / 2 lower.
        const double curvature_margin = h * h / 8.0;
        bounds_ = {max_f > 0.0 ? max_f + derivative_bound(2) * curvature_margin : 0.0,
                   max_df > 0.0 ? max_df + derivative_bound(3) * curvature_margin : 0.0};
    }

    double omega_;
    int dim_;
    std::vector<Vec> cos_;
    std::vector<Vec> sin_;
    std::pair<double, double> bounds_{0.0, 0.0};
};

/// Second derivative of a periodic cubic spline, scaled by 1/l.
class SplineSource final : public SignalSource {
  public:
    SplineSource(std::vector<double> knots, std::vector<Vec> moments, double inv_length)
        : knots_(std::move(knots)), moments_(std::move(moments)), inv_length_(inv_length) {}

    Vec value(double tau) const override {
        const std::size_t i = segment(tau);
        const double h = knots_[i + 1] - knots_[i];
        const double w = (tau - (knots_[i] - knots_.front())) / h;
        return ((1.0 - w) * moments_[i] + w * moments_[i + 1]) * inv_length_;
    }

    Vec derivative(double tau) const override {
        const std::size_t i = segment(tau);
        const double h = knots_[i + 1] - knots_[i];
        return (moments_[i + 1] - moments_[i]) * (inv_length_ / h);
    }

    std::pair<double, double> sup_bounds() const override {
        // |F| is convex on each segment (norm of an affine map), so its max sits
        // on a knot; dF/dt is constant per segment.
        double max_f = 0.0;
        double max_df = 0.0;
        for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
            max_f = std::max(max_f, moments_[i].norm() * inv_length_);
            const double h = knots_[i + 1] - knots_[i];
            max_df = std::max(max_df, (moments_[i + 1] - moments_[i]).norm() * inv_length_ / h);
        }
        return {max_f, max_df};
    }

  private:
    std::size_t segment(double tau) const {
        const double t = knots_.front() + tau;
        auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
        std::size_t i = it == knots_.begin() ? 0 : std::size_t(it - knots_.begin()) - 1;
        return std::min(i, knots_.size() - 2);
    }

    std::vector<double> knots_;
    std::vector<Vec> moments_;  // closed: moments_.back() == moments_.front()
    double inv_length_;
};

}  // namespace

PeriodicSignal::PeriodicSignal(std::shared_ptr<const SignalSource> source, double period, int dim)
    : source_(std::move(source)), period_(period), dim_(dim) {
    if (!(period > 0.0) || !std::isfinite(period)) {
        throw std::invalid_argument("period must be positive and finite");
    }
    check_dim(dim);
    if (!source_) {
        throw std::invalid_argument("signal source is null");
    }
    std::tie(sup_norm_, sup_norm_derivative_) = source_->sup_bounds();
}

PeriodicSignal PeriodicSignal::zero(double period, int dim) {
    check_dim(dim);
    return {std::make_shared<ZeroSource>(dim), period, dim};
}

double PeriodicSignal::reduce(double t) const {
    double tau = std::fmod(t, period_);
    if (tau < 0.0) {
        tau += period_;
    }
    if (tau >= period_) {
        tau = 0.0;
    }
    return tau;
}

PeriodicSignal make_fourier_forcing(double period, int dim, const std::vector<Vec>& cosine_coeffs,
                                    const std::vector<Vec>& sine_coeffs) {
    if (!(period > 0.0) || !std::isfinite(period)) {
        throw std::invalid_argument("fourier forcing: period must be positive");
    }
    check_dim(dim);
    for (const auto* list : {&cosine_coeffs, &sine_coeffs}) {
        for (const auto& c : *list) {
            if (c.size() != dim) {
                throw std::invalid_argument("fourier forcing: coefficient dimension mismatch");
            }
            if (!c.allFinite()) {
                throw std::invalid_argument("fourier forcing: non-finite coefficient");
            }
        }
    }
    return {std::make_shared<FourierSource>(period, dim, cosine_coeffs, sine_coeffs), period, dim};
}

void PathSamples::validate() const {
    if (times.size() != positions.size()) {
        throw std::invalid_argument("path samples: times and positions differ in length");
    }
    if (times.size() < 8) {
        throw InsufficientData("path samples: at least 8 samples per period are required, got " +
                               std::to_string(times.size()));
    }
    if (!(rod_length > 0.0)) {
        throw std::invalid_argument("path samples: rod length must be positive");
    }
    check_dim(dim());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (positions[i].size() != dim() || !positions[i].allFinite()) {
            throw std::invalid_argument("path samples: malformed position at row " +
                                        std::to_string(i));
        }
        if (i > 0 && !(times[i] > times[i - 1])) {
            throw std::invalid_argument("path samples: times must be strictly increasing");
        }
    }
    double scale = 1.0;
    for (const auto& p : positions) {
        scale = std::max(scale, p.norm());
    }
    if ((positions.back() - positions.front()).norm() > closure_tolerance * scale) {
        throw std::invalid_argument("path samples: first and last positions differ (non-periodic)");
    }
}

IngestedPath ingest_path(const PathSamples& samples, double gravity) {
    samples.validate();
    if (!(gravity > 0.0)) {
        throw std::invalid_argument("gravity must be positive");
    }
    const int dim = samples.dim();
    const auto& t = samples.times;
    const std::size_t n = t.size() - 1;  // distinct knots on the circle

    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) {
        h[i] = t[i + 1] - t[i];
    }

    // Cyclic tridiagonal system for the moments M_i = S''(t_i).
    const auto size = static_cast<Eigen::Index>(n);
    Eigen::SparseMatrix<double> A(size, size);
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(3 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t prev = (i + n - 1) % n;
        const std::size_t next = (i + 1) % n;
        entries.emplace_back(long(i), long(i), 2.0 * (h[prev] + h[i]));
        entries.emplace_back(long(i), long(prev), h[prev]);
        entries.emplace_back(long(i), long(next), h[i]);
    }
    A.setFromTriplets(entries.begin(), entries.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) {
        throw std::runtime_error("ingest_path: spline system factorization failed");
    }

    Eigen::MatrixXd rhs(long(n), dim);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t prev = (i + n - 1) % n;
        const Vec& y_prev = samples.positions[prev];
        const Vec& y_i = samples.positions[i];
        const Vec& y_next = samples.positions[i + 1];  // i + 1 == n wraps via the closure row
        const Vec slope = (y_next - y_i) / h[i] - (y_i - y_prev) / h[prev];
        rhs.row(long(i)) = 6.0 * slope.transpose();
    }
    const Eigen::MatrixXd m = lu.solve(rhs);

    std::vector<Vec> moments(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        moments[i] = m.row(long(i)).transpose();
    }
    moments[n] = moments[0];

    const double period = t.back() - t.front();
    auto source = std::make_shared<SplineSource>(t, std::move(moments), 1.0 / samples.rod_length);
    return {PeriodicSignal(std::move(source), period, dim), gravity / samples.rod_length};
}

SupNorms sup_norms(const PeriodicSignal& signal, int grid_points, double safety_factor) {
    if (grid_points < 64) {
        throw std::invalid_argument("sup_norms: grid_points must be at least 64");
    }
    const double h = signal.period() / grid_points;
    double max_f = 0.0;
    double max_df = 0.0;
    for (int i = 0; i < grid_points; ++i) {
        const double t = i * h;
        max_f = std::max(max_f, signal.eval(t).norm());
        max_df = std::max(max_df, signal.eval_derivative(t).norm());
    }
    return {max_f * safety_factor, max_df * safety_factor};
}

PathSamples read_path_csv(std::istream& in, double rod_length) {
    PathSamples samples;
    samples.rod_length = rod_length;
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("path csv: empty input");
    }
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            header.push_back(cell);
        }
    }
    const bool ok_header = (header.size() == 2 && header[0] == "t" && header[1] == "f1") ||
                           (header.size() == 3 && header[0] == "t" && header[1] == "f1" &&
                            header[2] == "f2");
    if (!ok_header) {
        throw std::invalid_argument("path csv: header must be `t,f1` or `t,f1,f2`");
    }
    const int dim = int(header.size()) - 1;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos) {
                    throw std::invalid_argument(cell);
                }
            } catch (const std::exception&) {
                throw std::invalid_argument("path csv: bad number on line " + std::to_string(row));
            }
        }
        if (int(values.size()) != dim + 1) {
            throw std::invalid_argument("path csv: wrong column count on line " +
                                        std::to_string(row));
        }
        samples.times.push_back(values[0]);
        Vec f(dim);
        for (int j = 0; j < dim; ++j) {
            f[j] = values[std::size_t(j) + 1];
        }
        samples.positions.push_back(f);
    }
    return samples;
}

PathSamples read_path_csv_file(const std::string& path, double rod_length) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open path csv: " + path);
    }
    return read_path_csv(in, rod_length);
}

}  // namespace invpend

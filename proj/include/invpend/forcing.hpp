#pragma once

#include "invpend/types.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace invpend {

/// Backend of a PeriodicSignal. Arguments are already reduced to [0, period).
class SignalSource {
  public:
    virtual ~SignalSource() = default;
    virtual Vec value(double tau) const = 0;
    virtual Vec derivative(double tau) const = 0;
    /// Upper bounds on (max |F|, max |dF/dt|) over one period.
    virtual std::pair<double, double> sup_bounds() const = 0;
};

/// T-periodic forcing F(t) in R^d (rescaled carriage acceleration f''/l).
///
/// Immutable after construction; copies share the backend, so a signal can be
/// evaluated from many threads at once.
class PeriodicSignal {
  public:
    PeriodicSignal(std::shared_ptr<const SignalSource> source, double period, int dim);

    static PeriodicSignal zero(double period, int dim);

    double period() const { return period_; }
    int dim() const { return dim_; }

    Vec eval(double t) const { return source_->value(reduce(t)); }
    Vec eval_derivative(double t) const { return source_->derivative(reduce(t)); }

    double sup_norm() const { return sup_norm_; }
    double sup_norm_derivative() const { return sup_norm_derivative_; }
    bool is_zero() const { return sup_norm_ == 0.0 && sup_norm_derivative_ == 0.0; }

    /// t mod period in [0, period); exact multiples map to 0.
    double reduce(double t) const;

  private:
    std::shared_ptr<const SignalSource> source_;
    double period_;
    int dim_;
    double sup_norm_ = 0.0;
    double sup_norm_derivative_ = 0.0;
};

/// F(t) = sum_k c_k cos(2 pi (k+1) t / T) + s_k sin(2 pi (k+1) t / T).
///
/// Entry k of either list multiplies harmonic k+1; there is no constant term,
/// matching the zero mean of the second derivative of a periodic path. Sup
/// norms are the maximum over 4096 grid points per period plus the
/// curvature bound M2 h^2 / 8, which makes them rigorous upper bounds.
PeriodicSignal make_fourier_forcing(double period, int dim, const std::vector<Vec>& cosine_coeffs,
                                    const std::vector<Vec>& sine_coeffs);

/// Sampled carriage path f over one period.
struct PathSamples {
    std::vector<double> times;
    std::vector<Vec> positions;
    double rod_length = 1.0;
    /// Allowed mismatch between first and last position.
    double closure_tolerance = 1e-9;

    int dim() const { return positions.empty() ? 0 : static_cast<int>(positions.front().size()); }
    void validate() const;
};

struct IngestedPath {
    PeriodicSignal forcing;
    double G;
};

/// Periodic cubic spline through the path; F = S''/l, dF/dt = S'''/l
/// (piecewise constant), G = gravity / l.
IngestedPath ingest_path(const PathSamples& samples, double gravity);

struct SupNorms {
    double value;
    double derivative;
};

inline constexpr double kSupNormSafetyFactor = 1.01;

/// Grid maxima of |F| and |dF/dt| over one period, times safety_factor.
SupNorms sup_norms(const PeriodicSignal& signal, int grid_points,
                   double safety_factor = kSupNormSafetyFactor);

/// Reads `t,f1[,f2]` CSV (header required).
PathSamples read_path_csv(std::istream& in, double rod_length);
PathSamples read_path_csv_file(const std::string& path, double rod_length);

}  // namespace invpend

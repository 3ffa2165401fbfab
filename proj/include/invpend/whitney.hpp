#pragma once

#include "invpend/forcing.hpp"
#include "invpend/integrator.hpp"
#include "invpend/parallel.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace invpend {

/// A finite journey: the carriage acceleration is known on [0, t_end]. F need
/// not have period t_end; only its restriction to the journey is used.
struct JourneySpec {
    PeriodicSignal F;
    double t_end;
    double G;

    void validate() const;
};

enum class FallClass { FallsNegative, FallsPositive, Survives };
const char* to_string(FallClass c);

struct Classification {
    FallClass fall_class;
    /// Time of the fall, or t_end for a survivor.
    double fall_time;
};

/// Releases the rod at rest relative to the carriage (p = 0) from x0 and
/// reports which side it falls to first, if any. Linear journeys only.
Classification classify(double x0, const JourneySpec& journey, const IntegratorConfig& cfg);

/// Endpoint classes did not bracket a survivor.
class NoBracket : public std::runtime_error {
  public:
    NoBracket(const std::string& what, FallClass left, FallClass right)
        : std::runtime_error(what), left_(left), right_(right) {}
    FallClass left() const { return left_; }
    FallClass right() const { return right_; }

  private:
    FallClass left_;
    FallClass right_;
};

struct BisectionStep {
    int step;
    double l;
    double r;
    double mid;
    FallClass mid_class;
    double fall_time;
};

struct BisectionResult {
    double l;
    double r;
    /// Survives when a classified point survived, else the class of the last midpoint.
    FallClass best_class;
    /// The surviving point when there is one, otherwise (l + r) / 2.
    double best_x0;
    /// Step 0 holds the two endpoint classifications (mid = l, then mid = r).
    std::vector<BisectionStep> transcript;
};

/// Intermediate-value bisection on x0 in [-bracket, bracket]. Keeps the left
/// end falling negative and the right end falling positive; stops at the
/// first survivor, after `depth` halvings, or when the interval can no longer
/// be split in double precision.
BisectionResult bisect_survivor(const JourneySpec& journey, const IntegratorConfig& cfg, int depth,
                                double bracket = 0.999);

/// CSV with columns step,l,r,mid,class,fall_time (17 significant digits).
void write_transcript_csv(std::ostream& out, const BisectionResult& result);

struct PlanarGridPoint {
    Vec x0;
    bool survives;
    double fall_time;
};

struct PlanarGridResult {
    std::vector<PlanarGridPoint> points;
    /// Index of the survivor or, failing that, the longest-lived point.
    std::size_t best = 0;
    std::size_t survivors = 0;
};

/// Diagnostic for the planar journey: classifies a resolution x resolution
/// grid of release points (p = 0) inside the disk of the given radius.
/// There is no convergence guarantee.
PlanarGridResult planar_grid_search(const JourneySpec& journey, const IntegratorConfig& cfg,
                                    int resolution, double radius = 0.999,
                                    Execution exec = Execution::Parallel);

}  // namespace invpend

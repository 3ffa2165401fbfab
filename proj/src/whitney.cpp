#include "invpend/whitney.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace invpend {

void JourneySpec::validate() const {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        throw std::invalid_argument("journey: t_end must be positive");
    }
    if (!(G > 0.0)) {
        throw std::invalid_argument("journey: G must be positive");
    }
}

const char* to_string(FallClass c) {
    switch (c) {
        case FallClass::FallsNegative: return "FallsNegative";
        case FallClass::FallsPositive: return "FallsPositive";
        case FallClass::Survives: return "Survives";
    }
    return "?";
}

Classification classify(double x0, const JourneySpec& journey, const IntegratorConfig& cfg) {
    journey.validate();
    if (journey.F.dim() != 1) {
        throw std::invalid_argument("classify: the linear journey needs scalar forcing");
    }
    if (!(std::abs(x0) < 1.0)) {
        throw std::invalid_argument("classify: |x0| must be below 1");
    }
    const ModelParams params{journey.G, 1.0, 1};
    const Trajectory traj =
        evolve(0.0, journey.t_end, PhaseState::linear(x0, 0.0), params, journey.F, cfg);
    if (const auto fall = traj.fall_event()) {
        const FallClass c = fall->kind == EventKind::FallPositive ? FallClass::FallsPositive
                                                                  : FallClass::FallsNegative;
        return {c, fall->time};
    }
    return {FallClass::Survives, journey.t_end};
}

BisectionResult bisect_survivor(const JourneySpec& journey, const IntegratorConfig& cfg, int depth,
                                double bracket) {
    if (depth < 0) {
        throw std::invalid_argument("bisect_survivor: depth must be nonnegative");
    }
    if (!(bracket > 0.0 && bracket < cfg.fall_threshold)) {
        throw std::invalid_argument("bisect_survivor: bracket must lie inside the fall threshold");
    }
    double l = -bracket;
    double r = bracket;
    const Classification cl = classify(l, journey, cfg);
    const Classification cr = classify(r, journey, cfg);

    BisectionResult out{l, r, FallClass::Survives, 0.0, {}};
    out.transcript.push_back({0, l, r, l, cl.fall_class, cl.fall_time});
    out.transcript.push_back({0, l, r, r, cr.fall_class, cr.fall_time});
    if (cl.fall_class == FallClass::Survives) {
        out.best_x0 = l;
        return out;
    }
    if (cr.fall_class == FallClass::Survives) {
        out.best_x0 = r;
        return out;
    }
    if (cl.fall_class != FallClass::FallsNegative || cr.fall_class != FallClass::FallsPositive) {
        std::ostringstream msg;
        msg << "no bracket: x0 = " << l << " is " << to_string(cl.fall_class) << ", x0 = " << r
            << " is " << to_string(cr.fall_class);
        throw NoBracket(msg.str(), cl.fall_class, cr.fall_class);
    }

    FallClass last = cr.fall_class;
    for (int step = 1; step <= depth; ++step) {
        const double mid = 0.5 * (l + r);
        if (!(mid > l && mid < r)) {
            break;
        }
        const Classification c = classify(mid, journey, cfg);
        out.transcript.push_back({step, l, r, mid, c.fall_class, c.fall_time});
        last = c.fall_class;
        if (c.fall_class == FallClass::Survives) {
            out.l = l;
            out.r = r;
            out.best_x0 = mid;
            return out;
        }
        (c.fall_class == FallClass::FallsNegative ? l : r) = mid;
    }
    out.l = l;
    out.r = r;
    out.best_class = last;
    out.best_x0 = 0.5 * (l + r);
    return out;
}

void write_transcript_csv(std::ostream& out, const BisectionResult& result) {
    const auto old_precision = out.precision(17);
    out << "step,l,r,mid,class,fall_time\n";
    for (const auto& s : result.transcript) {
        out << s.step << ',' << s.l << ',' << s.r << ',' << s.mid << ',' << to_string(s.mid_class)
            << ',' << s.fall_time << '\n';
    }
    out.precision(old_precision);
}

PlanarGridResult planar_grid_search(const JourneySpec& journey, const IntegratorConfig& cfg,
                                    int resolution, double radius, Execution exec) {
    journey.validate();
    if (journey.F.dim() != 2) {
        throw std::invalid_argument("planar_grid_search: the planar journey needs 2D forcing");
    }
    if (resolution < 1 || !(radius > 0.0 && radius < cfg.fall_threshold)) {
        throw std::invalid_argument("planar_grid_search: invalid resolution or radius");
    }
    std::vector<Vec> starts;
    for (int i = 0; i < resolution; ++i) {
        for (int j = 0; j < resolution; ++j) {
            Vec x(2);
            x << radius * (2.0 * (i + 0.5) / resolution - 1.0),
                radius * (2.0 * (j + 0.5) / resolution - 1.0);
            if (x.norm() < radius) {
                starts.push_back(x);
            }
        }
    }
    const ModelParams params{journey.G, 1.0, 2};
    const int n = static_cast<int>(starts.size());
    std::vector<PlanarGridPoint> points(starts.size());
    ExceptionSlot slot;
#pragma omp parallel for schedule(dynamic) if (exec == Execution::Parallel)
    for (int k = 0; k < n; ++k) {
        slot.run([&] {
            const Trajectory traj = evolve(0.0, journey.t_end, PhaseState(starts[k], Vec::Zero(2)),
                                           params, journey.F, cfg);
            const auto fall = traj.fall_event();
            points[k] = {starts[k], !fall, fall ? fall->time : journey.t_end};
        });
    }
    slot.rethrow();

    PlanarGridResult out;
    out.points = std::move(points);
    for (std::size_t k = 0; k < out.points.size(); ++k) {
        out.survivors += out.points[k].survives ? 1 : 0;
        if (out.points[k].fall_time > out.points[out.best].fall_time) {
            out.best = k;
        }
    }
    return out;
}

}  // namespace invpend

#pragma once

#include "invpend/config.hpp"

#include <iosfwd>

namespace invpend {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitVerification = 2,
    kExitContinuation = 3,
    kExitNoBracket = 4,
};

/// Where a command reports progress; files go to config.output_dir.
struct CommandIo {
    std::ostream& out;
    std::ostream& err;
    bool verbose = false;
};

/// Bound set, certificate and continuation to lambda = 1. Writes orbit.csv,
/// result.json and certificate.json.
int cmd_solve_periodic(const RunConfig& config, const CommandIo& io);

/// Bound set and certificate only. Writes certificate.json.
int cmd_verify_bounds(const RunConfig& config, const CommandIo& io);

/// Linear: bisection for a surviving release point (transcript.csv,
/// result.json). Planar: grid-search diagnostic (transcript.csv holds the grid).
int cmd_whitney(const RunConfig& config, const CommandIo& io);

/// One trajectory from initial_state over [t0, t1]. Writes trajectory.csv and
/// result.json; a fall is reported, not an error.
int cmd_simulate(const RunConfig& config, const CommandIo& io);

/// Sign of det Dw_0 at the origin, which is the degree of w_0 on the bound set.
int cmd_degree(const RunConfig& config, const CommandIo& io);

}  // namespace invpend

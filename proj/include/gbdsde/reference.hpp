#pragma once

#include "gbdsde/ensemble.hpp"
#include "gbdsde/solver.hpp"

namespace gbdsde::ref {

// Serial twins of the OpenMP kernels, kept for testing and benchmarking.
// They share the scalar node kernel with the parallel paths, so results are
// expected to agree bitwise; only the loop structure differs.

Solution solve_backward_serial(const JumpLattice& lattice, const DriverSpec& driver,
                               const TerminalSpec& terminal,
                               const BrownianPath& bpath, const ClockA& clock);

MeanStdError empirical_bracket_serial(const PathEnsemble& ensemble, std::size_t i,
                                      std::size_t j, double t);

}  // namespace gbdsde::ref

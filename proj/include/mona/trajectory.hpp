#pragma once

#include <vector>

#include "mona/types.hpp"

namespace mona {

/// Result of one fixed-step integration run. Row n of states/derivatives
/// holds x(t_n) and the accepted stage derivative x′(t_n); derivatives are
/// the stages the scheme solved for, never finite differences.
struct Trajectory {
    std::vector<Real> times;
    Matrix states;       // (samples × unknowns)
    Matrix derivatives;  // (samples × unknowns)
    std::vector<int> newton_iterations;  // one entry per step

    bool clamp_activated = false;    // any diode exponent clamp during the run
    std::vector<Index> failed_steps; // tolerant mode: steps kept despite Newton failure
    bool aborted = false;            // strict mode stopped early
    Real abort_time = 0.0;

    [[nodiscard]] Index num_samples() const { return static_cast<Index>(times.size()); }
};

}  // namespace mona

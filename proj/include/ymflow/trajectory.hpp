/// @file trajectory.hpp
/// @brief Plain data recorded along an integrated flow.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ymflow/radial_core.hpp"

namespace ymflow {

enum class TerminalReason { horizon, blowup_stop, numerical_failure };

inline std::string_view to_string(TerminalReason r) {
    switch (r) {
        case TerminalReason::horizon: return "horizon";
        case TerminalReason::blowup_stop: return "blowup_stop";
        case TerminalReason::numerical_failure: return "numerical_failure";
    }
    return "unknown";
}

/// One row of per-step diagnostics. Z and W are NaN when no kernel is attached.
struct TrajectoryRecord {
    double t = 0.0;
    double dt = 0.0;
    double sup_F = 0.0;
    double sup_h = 0.0;
    double energy = 0.0;
    double Z = 0.0;
    double W = 0.0;
};

struct Snapshot {
    double t = 0.0;
    RadialProfile profile;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    std::vector<Snapshot> snapshots;
    double initial_energy = 0.0;
    TerminalReason terminal_reason = TerminalReason::horizon;
};

}  // namespace ymflow

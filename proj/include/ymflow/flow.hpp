/// @file flow.hpp
/// @brief Explicit time integration of the reduced heat equation and
///        blow-up time estimation.
///
/// Stepping is classical RK4 with dt = cfl dr^2 / (1 + dr^2 Lambda), where
/// Lambda = (n-2) sup_j |3h^2 - 6h + 2| / r_j^2 bounds the linearised reaction
/// term. The origin is pinned at h = 0 and the outer node is a Dirichlet wall.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ymflow/errors.hpp"
#include "ymflow/monotonicity.hpp"
#include "ymflow/radial_core.hpp"
#include "ymflow/trajectory.hpp"

namespace ymflow {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Shrinking soliton with singular time T, started at t = 0.
struct SolitonData {
    double T = 1.0;
};

/// h0(r) = 2 r^2 / (r^2 + s^2), interpolating between the vacua 0 and 2.
struct RationalBump {
    double s = 1.0;
};

/// Tabulated h0, linearly interpolated onto the grid and held constant past
/// the last entry.
struct TabulatedData {
    std::vector<double> r;
    std::vector<double> h;
};

using InitialData = std::variant<SolitonData, RationalBump, TabulatedData>;

enum class BoundaryMode {
    frozen,         ///< h(r_max, t) = h0(r_max)
    soliton_trace,  ///< h(r_max, t) = phi(r_max / sqrt(T - t)); soliton data only
};

struct SnapshotRule {
    enum class Kind { geometric, fixed_dt };
    Kind kind = Kind::geometric;
    double factor = 2.0;     ///< snapshot when sup|F| grew by this factor
    double interval = 0.1;   ///< snapshot spacing for fixed_dt
};

struct FlowConfig {
    int n = 5;
    double r_max = 8.0;
    std::size_t grid_points = 800;  ///< number of intervals M; nodes = M + 1
    double cfl = 0.2;
    double t_end = 1.0;
    std::optional<double> blowup_stop;  ///< absolute sup|F| threshold
    double blowup_factor = 1e6;         ///< used when blowup_stop is unset
    double min_dt = 1e-14;
    SnapshotRule snapshots;
    InitialData initial = RationalBump{};
    std::optional<BoundaryMode> boundary;  ///< unset: soliton_trace for soliton data, frozen otherwise
    std::optional<KernelSpec> kernel;      ///< fills the Z and W columns
    std::size_t record_every = 10;
    std::optional<double> origin_kappa;
};

inline BoundaryMode resolved_boundary(const FlowConfig& cfg) {
    if (cfg.boundary) return *cfg.boundary;
    return std::holds_alternative<SolitonData>(cfg.initial) ? BoundaryMode::soliton_trace : BoundaryMode::frozen;
}

inline double grid_spacing(const FlowConfig& cfg) { return cfg.r_max / static_cast<double>(cfg.grid_points); }

inline void validate_config(const FlowConfig& cfg) {
    if (cfg.n < 5) throw InvalidConfig("n must be >= 5");
    if (!(cfg.r_max > 0.0)) throw InvalidConfig("r_max must be positive");
    if (cfg.grid_points < 16) throw InvalidConfig("grid_points must be >= 16");
    if (!(cfg.cfl > 0.0 && cfg.cfl < 1.0)) throw InvalidConfig("cfl must lie in (0, 1)");
    if (!(cfg.t_end > 0.0)) throw InvalidConfig("t_end must be positive");
    if (!(cfg.min_dt > 0.0)) throw InvalidConfig("min_dt must be positive");
    if (cfg.record_every < 1) throw InvalidConfig("record_every must be >= 1");
    if (cfg.snapshots.kind == SnapshotRule::Kind::geometric && !(cfg.snapshots.factor > 1.0))
        throw InvalidConfig("geometric snapshot factor must exceed 1");
    if (cfg.snapshots.kind == SnapshotRule::Kind::fixed_dt && !(cfg.snapshots.interval > 0.0))
        throw InvalidConfig("snapshot interval must be positive");
    if (!cfg.blowup_stop && !(cfg.blowup_factor > 1.0)) throw InvalidConfig("blowup_factor must exceed 1");
    if (const auto* sol = std::get_if<SolitonData>(&cfg.initial)) {
        make_soliton_params(cfg.n);
        if (!(cfg.t_end < sol->T)) throw InvalidConfig("soliton data: t_end must precede T");
    }
    if (const auto* bump = std::get_if<RationalBump>(&cfg.initial)) {
        if (!(bump->s > 0.0)) throw InvalidConfig("rational bump width must be positive");
    }
    if (const auto* tab = std::get_if<TabulatedData>(&cfg.initial)) {
        if (tab->r.size() != tab->h.size() || tab->r.size() < 2)
            throw InvalidConfig("tabulated data needs matching r/h columns with >= 2 rows");
        for (std::size_t j = 1; j < tab->r.size(); ++j)
            if (!(tab->r[j] > tab->r[j - 1])) throw InvalidConfig("tabulated radii must increase");
    }
    if (resolved_boundary(cfg) == BoundaryMode::soliton_trace && !std::holds_alternative<SolitonData>(cfg.initial))
        throw InvalidConfig("soliton_trace boundary requires soliton initial data");
    if (cfg.kernel && cfg.kernel->n != cfg.n) throw InvalidConfig("kernel dimension differs from n");
}

inline double initial_value(const FlowConfig& cfg, double r) {
    return std::visit(
        [&](const auto& data) -> double {
            using D = std::decay_t<decltype(data)>;
            if constexpr (std::is_same_v<D, SolitonData>) {
                return phi_eval(make_soliton_params(cfg.n), r / std::sqrt(data.T)).phi;
            } else if constexpr (std::is_same_v<D, RationalBump>) {
                return 2.0 * r * r / (r * r + data.s * data.s);
            } else {
                if (r <= data.r.front()) return data.h.front();
                if (r >= data.r.back()) return data.h.back();
                const auto it = std::upper_bound(data.r.begin(), data.r.end(), r);
                const auto hi = static_cast<std::size_t>(it - data.r.begin());
                const std::size_t lo = hi - 1;
                const double theta = (r - data.r[lo]) / (data.r[hi] - data.r[lo]);
                return data.h[lo] + theta * (data.h[hi] - data.h[lo]);
            }
        },
        cfg.initial);
}

inline RadialProfile initial_profile(const FlowConfig& cfg) {
    return make_profile(cfg.n, uniform_radii(cfg.r_max, cfg.grid_points),
                        [&](double r) { return initial_value(cfg, r); });
}

/// Outer Dirichlet value at time t.
inline double boundary_value(const FlowConfig& cfg, double t) {
    if (resolved_boundary(cfg) == BoundaryMode::soliton_trace) {
        const auto& sol = std::get<SolitonData>(cfg.initial);
        return phi_eval(make_soliton_params(cfg.n), cfg.r_max / std::sqrt(sol.T - t)).phi;
    }
    return initial_value(cfg, cfg.r_max);
}

// ---------------------------------------------------------------------------
// Stepping
// ---------------------------------------------------------------------------

struct FlowState {
    RadialProfile profile;
    double t = 0.0;
    std::size_t step_index = 0;
    double dt_last = 0.0;
};

inline FlowState initial_state(const FlowConfig& cfg) {
    FlowState s;
    s.profile = initial_profile(cfg);
    s.profile.h.back() = boundary_value(cfg, 0.0);
    return s;
}

/// Stable step size for the current profile, given inv_r[j] = 1/r_j.
inline double stable_dt(const RadialProfile& p, double cfl, std::span<const double> inv_r) {
    const double dr = p.dr();
    double sup = 0.0;
    for (std::size_t j = 1; j < p.size(); ++j) {
        const double h = p.h[j];
        sup = std::max(sup, std::abs(3.0 * h * h - 6.0 * h + 2.0) * inv_r[j] * inv_r[j]);
    }
    const double lambda = static_cast<double>(p.n - 2) * sup;
    return cfl * dr * dr / (1.0 + dr * dr * lambda);
}

inline double stable_dt(const RadialProfile& p, double cfl) {
    return stable_dt(p, cfl, inverse_radii(p.dr(), p.size()));
}

/// RK4 with preallocated stage buffers.
class Stepper {
public:
    Stepper(std::size_t nodes, double dr)
        : inv_r_(ymflow::inverse_radii(dr, nodes)), k1_(nodes), k2_(nodes), k3_(nodes), k4_(nodes), tmp_(nodes) {}

    /// Advances state.profile by dt and reimposes the boundary values. On
    /// NumericalFailure the state is left untouched.
    std::span<const double> inverse_radii() const { return inv_r_; }

    void step(FlowState& state, double dt, double outer_value) {
        auto& h = state.profile.h;
        const int n = state.profile.n;
        const double dr = state.profile.dr();
        const std::size_t m = h.size();
        pde_rhs_into(n, dr, inv_r_, h, k1_);
        for (std::size_t j = 0; j < m; ++j) tmp_[j] = h[j] + 0.5 * dt * k1_[j];
        pde_rhs_into(n, dr, inv_r_, tmp_, k2_);
        for (std::size_t j = 0; j < m; ++j) tmp_[j] = h[j] + 0.5 * dt * k2_[j];
        pde_rhs_into(n, dr, inv_r_, tmp_, k3_);
        for (std::size_t j = 0; j < m; ++j) tmp_[j] = h[j] + dt * k3_[j];
        pde_rhs_into(n, dr, inv_r_, tmp_, k4_);
        for (std::size_t j = 0; j < m; ++j) tmp_[j] = h[j] + dt / 6.0 * (k1_[j] + 2.0 * k2_[j] + 2.0 * k3_[j] + k4_[j]);
        tmp_[0] = 0.0;
        tmp_[m - 1] = outer_value;
        for (double v : tmp_)
            if (!std::isfinite(v)) throw NumericalFailure("non-finite value at t = " + std::to_string(state.t + dt));
        h.swap(tmp_);
        state.t += dt;
        state.dt_last = dt;
        ++state.step_index;
    }

private:
    std::vector<double> inv_r_;
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// One RK4 step of the stable size, clipped so t does not pass t_end.
inline FlowState advance(FlowState state, const FlowConfig& cfg) {
    double dt = stable_dt(state.profile, cfg.cfl);
    if (state.t + dt > cfg.t_end) dt = cfg.t_end - state.t;
    Stepper stepper(state.profile.size(), state.profile.dr());
    stepper.step(state, dt, boundary_value(cfg, state.t + dt));
    return state;
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

inline TrajectoryRecord make_record(const FlowState& s, const FlowConfig& cfg, double sup_F) {
    TrajectoryRecord rec;
    rec.t = s.t;
    rec.dt = s.dt_last;
    rec.sup_F = sup_F;
    double sup_h = 0.0;
    for (double v : s.profile.h) sup_h = std::max(sup_h, std::abs(v));
    rec.sup_h = sup_h;
    rec.energy = energy(s.profile);
    rec.Z = std::numeric_limits<double>::quiet_NaN();
    rec.W = std::numeric_limits<double>::quiet_NaN();
    if (cfg.kernel && s.t < cfg.kernel->T) {
        rec.Z = Z_value(s.profile, *cfg.kernel, s.t);
        if (cfg.kernel->offset == 0.0) rec.W = W_value(s.profile, *cfg.kernel, s.t);
    }
    return rec;
}

/// Integrates until t_end, the blow-up threshold, or a numerical failure.
/// Failures are reported through terminal_reason; the partial trajectory is
/// returned.
inline Trajectory run_flow(const FlowConfig& cfg) {
    validate_config(cfg);
    FlowState state = initial_state(cfg);
    check_origin_regularity(state.profile, cfg.origin_kappa);

    Trajectory traj;
    const double sup_F0 = sup_curvature(state.profile);
    // a relative threshold is meaningless for flat data: only an absolute one applies
    const double stop = cfg.blowup_stop.value_or(sup_F0 > 0.0 ? cfg.blowup_factor * sup_F0
                                                              : std::numeric_limits<double>::infinity());
    if (sup_F0 > 0.0 && !(stop > sup_F0)) throw InvalidConfig("blowup_stop must exceed the initial sup|F|");

    traj.records.push_back(make_record(state, cfg, sup_F0));
    traj.initial_energy = traj.records.front().energy;
    traj.snapshots.push_back({state.t, state.profile});
    double last_snap_F = sup_F0;
    double last_snap_t = state.t;

    Stepper stepper(state.profile.size(), state.profile.dr());
    const AxisNormForm form = axis_norm_form(cfg.n);
    std::optional<TerminalReason> reason;
    double sup_F = sup_F0;
    while (!reason) {
        double dt = stable_dt(state.profile, cfg.cfl, stepper.inverse_radii());
        if (dt < cfg.min_dt) {
            reason = TerminalReason::blowup_stop;
            break;
        }
        bool last = false;
        if (state.t + dt >= cfg.t_end) {
            dt = cfg.t_end - state.t;
            last = true;
        }
        try {
            stepper.step(state, dt, boundary_value(cfg, state.t + dt));
        } catch (const NumericalFailure&) {
            reason = TerminalReason::numerical_failure;
            break;
        }
        if (last) state.t = cfg.t_end;
        sup_F = sup_curvature(state.profile, form);
        if (!std::isfinite(sup_F)) {
            reason = TerminalReason::numerical_failure;
            break;
        }
        if (sup_F >= stop) reason = TerminalReason::blowup_stop;
        if (last) reason = reason.value_or(TerminalReason::horizon);

        bool snap = false;
        if (cfg.snapshots.kind == SnapshotRule::Kind::geometric) {
            snap = sup_F >= cfg.snapshots.factor * last_snap_F;
        } else {
            snap = state.t >= last_snap_t + cfg.snapshots.interval;
        }
        if (snap || reason || state.step_index % cfg.record_every == 0) {
            traj.records.push_back(make_record(state, cfg, sup_F));
        }
        if (snap || reason) {
            traj.snapshots.push_back({state.t, state.profile});
            last_snap_F = sup_F;
            last_snap_t = state.t;
        }
    }
    if (*reason != TerminalReason::horizon || traj.records.back().t != state.t) {
        if (traj.records.back().t != state.t) traj.records.push_back(make_record(state, cfg, sup_F));
        if (traj.snapshots.back().t != state.t) traj.snapshots.push_back({state.t, state.profile});
    }
    traj.terminal_reason = *reason;
    return traj;
}

// ---------------------------------------------------------------------------
// Blow-up time estimation
// ---------------------------------------------------------------------------

struct BlowupDiagnosis {
    double T_hat = 0.0;
    double C_hat = 0.0;
    double fit_residual = 0.0;
    bool rapid_forming = false;
};

struct BlowupFitOptions {
    std::size_t window = 20;
    double growth_factor = 10.0;    ///< minimal sup|F| growth over the trajectory
    double residual_bound = 1e-2;   ///< relative RMS bound for rapid_forming
};

/// Least-squares line through (t, 1/sup|F|) over the last `window` records.
/// T_hat is its root and C_hat = -1/slope. fit_residual is the RMS residual
/// divided by the mean of 1/sup|F| over the window.
inline BlowupDiagnosis detect_blowup(const Trajectory& traj, const BlowupFitOptions& opt = {}) {
    const auto& rec = traj.records;
    const std::size_t k = opt.window;
    if (k < 2 || rec.size() < k) throw NoBlowup("not enough records for the blow-up fit");
    const double first = rec.front().sup_F;
    const double last = rec.back().sup_F;
    if (!(last > 0.0) || !(last >= opt.growth_factor * first)) throw NoBlowup("sup|F| did not grow by the required factor");

    const std::size_t start = rec.size() - k;
    double mt = 0.0;
    double my = 0.0;
    for (std::size_t i = start; i < rec.size(); ++i) {
        mt += rec[i].t;
        my += 1.0 / rec[i].sup_F;
    }
    mt /= static_cast<double>(k);
    my /= static_cast<double>(k);
    double stt = 0.0;
    double sty = 0.0;
    for (std::size_t i = start; i < rec.size(); ++i) {
        const double dt = rec[i].t - mt;
        stt += dt * dt;
        sty += dt * (1.0 / rec[i].sup_F - my);
    }
    if (!(stt > 0.0)) throw NoBlowup("degenerate fit window");
    const double slope = sty / stt;
    if (!(slope < 0.0)) throw NoBlowup("1/sup|F| is not decreasing");
    const double intercept = my - slope * mt;
    double ss = 0.0;
    for (std::size_t i = start; i < rec.size(); ++i) {
        const double res = 1.0 / rec[i].sup_F - (intercept + slope * rec[i].t);
        ss += res * res;
    }
    BlowupDiagnosis d;
    d.T_hat = -intercept / slope;
    d.C_hat = -1.0 / slope;
    d.fit_residual = std::sqrt(ss / static_cast<double>(k)) / my;
    d.rapid_forming = d.fit_residual <= opt.residual_bound && d.T_hat > rec.back().t;
    return d;
}

}  // namespace ymflow

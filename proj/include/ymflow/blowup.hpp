/// @file blowup.hpp
/// @brief Parabolic rescaling of an equivariant blow-up and comparison with the
///        shrinking soliton.
///
/// Under the ansatz the blow-up A(x,t) -> lambda A(lambda x, T + lambda^2 t)
/// acts on the profile as h(r,t) -> h(lambda r, T + lambda^2 t) with no
/// prefactor, since sigma_i is homogeneous of degree one. The equivariant
/// class is already in radial gauge (x^p sigma_p = 0), so profiles are
/// compared directly.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ymflow/errors.hpp"
#include "ymflow/flow.hpp"
#include "ymflow/radial_core.hpp"
#include "ymflow/trajectory.hpp"

namespace ymflow {

inline constexpr double kDefaultWindow = 10.0;

struct RescaleStep {
    double lambda = 0.0;
    RadialProfile profile_rho;
    double distance_sup = 0.0;
    double distance_L2 = 0.0;
    bool skipped = false;
    std::string skip_reason;
};

namespace detail {

/// Index k with snapshots[k].t <= t <= snapshots[k+1].t; times within a
/// relative 1e-12 of a snapshot are snapped onto it.
inline std::pair<std::size_t, double> bracket(const std::vector<Snapshot>& snaps, double t) {
    if (snaps.empty()) throw TimeNotBracketed("trajectory has no snapshots");
    const double tol = 1e-12 * std::max(1.0, std::abs(t));
    for (std::size_t k = 0; k < snaps.size(); ++k) {
        if (std::abs(snaps[k].t - t) <= tol) return {k, 0.0};
    }
    for (std::size_t k = 0; k + 1 < snaps.size(); ++k) {
        if (snaps[k].t < t && t < snaps[k + 1].t) {
            return {k, (t - snaps[k].t) / (snaps[k + 1].t - snaps[k].t)};
        }
    }
    throw TimeNotBracketed("no snapshot pair brackets t = " + std::to_string(t));
}

}  // namespace detail

/// rho -> h(lambda rho, T_hat - lambda^2) on rho_j = j dr / lambda, rho_j <= P.
/// The grid nodes map onto the stored radial nodes, so only the time
/// direction is interpolated (linearly between bracketing snapshots).
inline RadialProfile rescale_profile(const Trajectory& traj, double T_hat, double lambda, double P) {
    if (!(lambda > 0.0)) throw DomainError("rescale_profile: lambda must be positive");
    if (!(P > 0.0)) throw DomainError("rescale_profile: window must be positive");
    const double t_eval = T_hat - lambda * lambda;
    const auto [k, theta] = detail::bracket(traj.snapshots, t_eval);
    const RadialProfile& lo = traj.snapshots[k].profile;
    const RadialProfile& hi = theta > 0.0 ? traj.snapshots[k + 1].profile : lo;
    if (lambda * P > lo.r_max() * (1.0 + 1e-12))
        throw ScaleTooSmall("lambda * P = " + std::to_string(lambda * P) + " exceeds r_max = " +
                            std::to_string(lo.r_max()));
    const double dr = lo.dr();
    const auto count = static_cast<std::size_t>(std::floor(lambda * P / dr * (1.0 + 1e-12)));
    RadialProfile out;
    out.n = lo.n;
    out.radii.resize(count + 1);
    out.h.resize(count + 1);
    for (std::size_t j = 0; j <= count; ++j) {
        out.radii[j] = static_cast<double>(j) * dr / lambda;
        out.h[j] = (1.0 - theta) * lo.h[j] + theta * hi.h[j];
    }
    out.h[0] = 0.0;
    return out;
}

/// (max |h - phi|, (int_0^P (h - phi)^2 rho^{n-1} drho)^{1/2}) over nodes with
/// rho <= P.
inline std::pair<double, double> soliton_distance(const RadialProfile& profile_rho, const SolitonParams& params,
                                                  double P) {
    double sup = 0.0;
    double l2 = 0.0;
    double prev = 0.0;
    for (std::size_t j = 0; j < profile_rho.size(); ++j) {
        const double rho = profile_rho.radii[j];
        if (rho > P * (1.0 + 1e-12)) break;
        const double diff = profile_rho.h[j] - phi_eval(params, rho).phi;
        sup = std::max(sup, std::abs(diff));
        const double g = diff * diff * std::pow(rho, params.n - 1);
        if (j > 0) l2 += 0.5 * (prev + g) * (rho - profile_rho.radii[j - 1]);
        prev = g;
    }
    return {sup, std::sqrt(l2)};
}

/// lambda_i = 2^{-i/2} sqrt(T_hat - t_first), continued while T_hat - lambda^2
/// stays inside the snapshot range.
inline std::vector<double> default_lambdas(const Trajectory& traj, double T_hat, std::size_t max_count = 64) {
    std::vector<double> out;
    if (traj.snapshots.empty()) return out;
    const double t0 = traj.snapshots.front().t;
    const double t1 = traj.snapshots.back().t;
    if (!(T_hat > t0)) return out;
    const double base = std::sqrt(T_hat - t0);
    for (std::size_t i = 0; i < max_count; ++i) {
        const double lambda = base * std::pow(2.0, -0.5 * static_cast<double>(i));
        if (T_hat - lambda * lambda > t1) break;
        out.push_back(lambda);
    }
    return out;
}

struct ConvergenceReport {
    std::vector<RescaleStep> steps;
    bool monotone = false;  ///< distance_sup strictly decreasing over the last three evaluated entries
};

inline ConvergenceReport convergence_report(const Trajectory& traj, const BlowupDiagnosis& diagnosis,
                                            std::span<const double> lambdas, double P = kDefaultWindow) {
    for (std::size_t i = 1; i < lambdas.size(); ++i)
        if (!(lambdas[i] < lambdas[i - 1])) throw DomainError("lambdas must be strictly decreasing");
    if (traj.snapshots.empty()) throw TimeNotBracketed("trajectory has no snapshots");
    const SolitonParams params = make_soliton_params(traj.snapshots.front().profile.n);
    ConvergenceReport report;
    for (double lambda : lambdas) {
        RescaleStep step;
        step.lambda = lambda;
        try {
            step.profile_rho = rescale_profile(traj, diagnosis.T_hat, lambda, P);
            std::tie(step.distance_sup, step.distance_L2) = soliton_distance(step.profile_rho, params, P);
        } catch (const Error& e) {
            step.skipped = true;
            step.skip_reason = e.what();
        }
        report.steps.push_back(std::move(step));
    }
    std::vector<double> evaluated;
    for (const auto& s : report.steps)
        if (!s.skipped) evaluated.push_back(s.distance_sup);
    if (evaluated.size() >= 3) {
        const std::size_t m = evaluated.size();
        report.monotone = evaluated[m - 2] < evaluated[m - 3] && evaluated[m - 1] < evaluated[m - 2];
    }
    return report;
}

struct RapidFormingPoint {
    double t = 0.0;
    double value = 0.0;  ///< (T_hat - t) sup|F|
};

inline std::vector<RapidFormingPoint> rapid_forming_series(const Trajectory& traj, double T_hat) {
    if (!traj.records.empty() && !(T_hat > traj.records.back().t))
        throw TimeOrderError("T_hat must lie beyond the last record");
    std::vector<RapidFormingPoint> out;
    out.reserve(traj.records.size());
    for (const auto& r : traj.records) out.push_back({r.t, (T_hat - r.t) * r.sup_F});
    return out;
}

/// Maximum of the series over the final half of the records.
inline double rapid_forming_constant(std::span<const RapidFormingPoint> series) {
    double c = 0.0;
    for (std::size_t k = series.size() / 2; k < series.size(); ++k) c = std::max(c, series[k].value);
    return c;
}

}  // namespace ymflow

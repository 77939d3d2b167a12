/// @file monotonicity.hpp
/// @brief Backward heat kernel weights and the weighted quantities
///        Z(t) = (T-t)^2 int |F|^2 k  and  W(t) = (T-t) int |div F + (Dk/k).F|^2 k
///        for equivariant profiles on flat R^n.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "ymflow/errors.hpp"
#include "ymflow/radial_core.hpp"
#include "ymflow/trajectory.hpp"

namespace ymflow {

/// Backward heat kernel centred at (X, T) with |X| = offset.
struct KernelSpec {
    int n = 0;
    double T = 0.0;
    double offset = 0.0;
};

inline constexpr unsigned kAngularQuadratureOrder = 64;
inline constexpr double kTailCutoff = 1e-16;

namespace detail {

using AngularRule = boost::math::quadrature::gauss<double, kAngularQuadratureOrder>;

/// Average of exp(-s (1 - cos theta)) over S^{n-1}, theta measured from the
/// kernel centre direction, weight sin^{n-2} theta. Both numerator and
/// normalisation use the same Gauss-Legendre rule on [0, pi].
inline double sphere_average_exp(int n, double s) {
    const int power = n - 2;
    auto weight = [power](double theta) { return std::pow(std::sin(theta), power); };
    const double norm = AngularRule::integrate(weight, 0.0, std::numbers::pi);
    const double num = AngularRule::integrate(
        [&](double theta) { return weight(theta) * std::exp(-s * (1.0 - std::cos(theta))); }, 0.0,
        std::numbers::pi);
    return num / norm;
}

}  // namespace detail

inline double kernel_weight(const KernelSpec& spec, double t, double r) {
    if (!(t < spec.T)) throw TimeOrderError("kernel_weight requires t < T");
    if (!(r >= 0.0)) throw DomainError("kernel_weight requires r >= 0");
    const double tau = spec.T - t;
    const double prefactor = std::pow(4.0 * std::numbers::pi * tau, -0.5 * spec.n);
    const double d = spec.offset;
    if (d == 0.0) return prefactor * std::exp(-r * r / (4.0 * tau));
    // |x - X|^2 = (r - d)^2 + 2 r d (1 - cos theta)
    const double radial = std::exp(-(r - d) * (r - d) / (4.0 * tau));
    if (radial == 0.0) return 0.0;
    return prefactor * radial * detail::sphere_average_exp(spec.n, r * d / (2.0 * tau));
}

inline std::vector<double> kernel_weights(const KernelSpec& spec, double t, std::span<const double> radii) {
    std::vector<double> w(radii.size());
    for (std::size_t j = 0; j < radii.size(); ++j) w[j] = kernel_weight(spec, t, radii[j]);
    return w;
}

/// omega_{n-1} int f k r^{n-1} dr, dropping integrand values below
/// kTailCutoff times the peak.
inline double kernel_integral(int n, std::span<const double> radii, std::span<const double> f,
                              std::span<const double> kernel) {
    std::vector<double> g(radii.size());
    double peak = 0.0;
    for (std::size_t j = 0; j < radii.size(); ++j) {
        g[j] = f[j] * kernel[j];
        peak = std::max(peak, std::abs(g[j] * std::pow(radii[j], n - 1)));
    }
    for (std::size_t j = 0; j < radii.size(); ++j) {
        if (std::abs(g[j] * std::pow(radii[j], n - 1)) < kTailCutoff * peak) g[j] = 0.0;
    }
    return radial_integral(n, radii, g, radii.empty() ? 0.0 : radii.back());
}

/// Z(t) = (T-t)^2 int |F|^2 k dV.
inline double Z_value(const RadialProfile& p, const KernelSpec& spec, double t) {
    if (!(t < spec.T)) throw TimeOrderError("Z_value requires t < T");
    const auto f2 = curvature_norm_sq(p);
    const auto k = kernel_weights(spec, t, p.radii);
    const double tau = spec.T - t;
    return tau * tau * kernel_integral(p.n, p.radii, f2, k);
}

namespace detail {

/// Finite-difference weights (Fornberg) for the derivatives 0..2 at x0.
inline std::array<std::vector<double>, 3> fd_weights(double x0, std::span<const double> x) {
    const std::size_t m = x.size();
    std::vector<std::vector<std::vector<double>>> c(3, std::vector<std::vector<double>>(m, std::vector<double>(m, 0.0)));
    c[0][0][0] = 1.0;
    double c1 = 1.0;
    double c4 = x[0] - x0;
    for (std::size_t i = 1; i < m; ++i) {
        const std::size_t mn = std::min<std::size_t>(i, 2);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k)
                    c[k][i][i] = c1 * (static_cast<double>(k) * c[k - 1][i - 1][i - 1] - c5 * c[k][i - 1][i - 1]) / c2;
                c[0][i][i] = -c1 * c5 * c[0][i - 1][i - 1] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k)
                c[k][i][j] = (c4 * c[k][i - 1][j] - static_cast<double>(k) * c[k - 1][i - 1][j]) / c3;
            c[0][i][j] = c4 * c[0][i - 1][j] / c3;
        }
        c1 = c2;
    }
    std::array<std::vector<double>, 3> out;
    for (std::size_t k = 0; k < 3; ++k) {
        out[k].resize(m);
        for (std::size_t j = 0; j < m; ++j) out[k][j] = c[k][m - 1][j];
    }
    return out;
}

}  // namespace detail

/// First and second radial derivatives to sixth order. h is continued as an
/// even function across the origin (seven-point central stencils); the last
/// three nodes use one-sided eight-point stencils. The W density divides the
/// truncation error by r^2, so the order matters most next to the origin.
struct RadialDerivatives {
    std::vector<double> d1;
    std::vector<double> d2;
};

inline constexpr std::size_t kCentralHalfWidth = 3;
inline constexpr std::size_t kOneSidedPoints = 8;

inline RadialDerivatives radial_derivatives_6th(const RadialProfile& p) {
    const std::size_t m = p.size();
    if (m < kOneSidedPoints + 1) throw GridTooCoarse("sixth-order derivatives need at least 9 nodes");
    const double dr = p.dr();
    auto at = [&](std::ptrdiff_t j) { return p.h[static_cast<std::size_t>(j < 0 ? -j : j)]; };
    RadialDerivatives d{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
    constexpr std::array<double, 4> c1{0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
    constexpr std::array<double, 4> c2{-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0};
    for (std::size_t j = 0; j + kCentralHalfWidth < m; ++j) {
        const auto i = static_cast<std::ptrdiff_t>(j);
        double s1 = 0.0;
        double s2 = c2[0] * at(i);
        for (std::ptrdiff_t k = 1; k <= static_cast<std::ptrdiff_t>(kCentralHalfWidth); ++k) {
            const auto uk = static_cast<std::size_t>(k);
            s1 += c1[uk] * (at(i + k) - at(i - k));
            s2 += c2[uk] * (at(i + k) + at(i - k));
        }
        d.d1[j] = s1 / dr;
        d.d2[j] = s2 / (dr * dr);
    }
    std::array<double, kOneSidedPoints> offsets{};
    for (std::size_t k = 0; k < kOneSidedPoints; ++k)
        offsets[k] = static_cast<double>(k) - static_cast<double>(kOneSidedPoints - 1);
    for (std::size_t j = m - kCentralHalfWidth; j < m; ++j) {
        const double x0 = static_cast<double>(j) - static_cast<double>(m - 1);
        const auto w = detail::fd_weights(x0, offsets);
        double s1 = 0.0;
        double s2 = 0.0;
        for (std::size_t k = 0; k < kOneSidedPoints; ++k) {
            const double v = p.h[m - kOneSidedPoints + k];
            s1 += w[1][k] * v;
            s2 += w[2][k] * v;
        }
        d.d1[j] = s1 / dr;
        d.d2[j] = s2 / (dr * dr);
    }
    return d;
}

/// Pointwise |D_p F_pj + (D_p k / k) F_pj|^2 for the centred kernel:
///   2(n-1) (G[h] + r h' / (2(t-T)))^2 / r^2,
/// with G[h] and h' evaluated to sixth order. Zero at the origin (limit).
inline std::vector<double> W_density(const RadialProfile& p, double t, const KernelSpec& spec) {
    if (spec.offset != 0.0) throw OffsetUnsupported("W_density is defined for centred kernels only");
    if (!(t < spec.T)) throw TimeOrderError("W_density requires t < T");
    const auto d = radial_derivatives_6th(p);
    const double nd = static_cast<double>(p.n);
    const double shift = 1.0 / (2.0 * (t - spec.T));
    std::vector<double> w(p.size(), 0.0);
    for (std::size_t j = 1; j < p.size(); ++j) {
        const double r = p.radii[j];
        const double h = p.h[j];
        const double g = d.d2[j] + (nd - 3.0) * d.d1[j] / r - (nd - 2.0) * h * (h - 1.0) * (h - 2.0) / (r * r);
        const double v = g + r * d.d1[j] * shift;
        w[j] = 2.0 * (nd - 1.0) * v * v / (r * r);
    }
    return w;
}

/// W(t) = (T-t) int W_density k dV.
inline double W_value(const RadialProfile& p, const KernelSpec& spec, double t) {
    const auto dens = W_density(p, t, spec);
    const auto k = kernel_weights(spec, t, p.radii);
    return (spec.T - t) * kernel_integral(p.n, p.radii, dens, k);
}

/// Trapezoid sum of W over record times (NaN entries are skipped).
inline double integrated_W(const Trajectory& traj) {
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < traj.records.size(); ++k) {
        const auto& a = traj.records[k];
        const auto& b = traj.records[k + 1];
        if (std::isnan(a.W) || std::isnan(b.W)) continue;
        sum += 0.5 * (a.W + b.W) * (b.t - a.t);
    }
    return sum;
}

struct RegularityCell {
    double offset = 0.0;
    double t = 0.0;
    double value = 0.0;
};

/// (T_hat - t)^2 int |F|^2 k_{(X, T_hat)} over every snapshot with t < T_hat
/// and every |X| in offsets.
inline std::vector<RegularityCell> regularity_scan(const Trajectory& traj, double T_hat,
                                                   std::span<const double> offsets) {
    std::vector<RegularityCell> table;
    for (double d : offsets) {
        if (!(d >= 0.0)) throw DomainError("regularity_scan: offsets must be >= 0");
        for (const auto& snap : traj.snapshots) {
            if (!(snap.t < T_hat)) continue;
            const KernelSpec spec{snap.profile.n, T_hat, d};
            table.push_back({d, snap.t, Z_value(snap.profile, spec, snap.t)});
        }
    }
    return table;
}

}  // namespace ymflow

/// @file radial_core.hpp
/// @brief Equivariant reduction of the SO(n) Yang-Mills heat flow on R^n.
///
/// Connections of the form A_i(x) = -(h(r)/r^2) sigma_i(x), with
/// (sigma_i)^a_b = delta_i^a x^b - delta_i^b x^a, are carried entirely by the
/// scalar profile h(r). This header holds the closed-form shrinking soliton
/// h(r,t) = phi(r / sqrt(T - t)), phi(rho) = rho^2 / (a rho^2 + b), the
/// curvature of the ansatz, the Yang-Mills energy, and the right-hand side of
/// the reduced heat equation
///
///     h_t = h_rr + (n-3) h_r / r - (n-2) h (h-1) (h-2) / r^2.
///
/// Norm convention used everywhere: |F|^2 sums the squares of all entries
/// F^a_{ijb} over ordered pairs (i,j) and (a,b); E = 1/2 int |F|^2.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ymflow/errors.hpp"

namespace ymflow {

inline constexpr int kMinSolitonDimension = 5;
inline constexpr int kMaxSolitonDimension = 9;

// ---------------------------------------------------------------------------
// Soliton constants
// ---------------------------------------------------------------------------

/// a_n = sqrt(n-2) / (2 sqrt 2).
inline double soliton_a(int n) {
    return std::sqrt(static_cast<double>(n - 2)) / (2.0 * std::numbers::sqrt2);
}

/// b_n = (6n - 12 - (n+2) sqrt(2n-4)) / 2. Positive exactly for 5 <= n <= 9
/// and zero at n = 10.
inline double soliton_b(int n) {
    const double nd = static_cast<double>(n);
    return 0.5 * (6.0 * nd - 12.0 - (nd + 2.0) * std::sqrt(2.0 * nd - 4.0));
}

struct SolitonParams {
    int n = 0;
    double a = 0.0;
    double b = 0.0;
};

inline SolitonParams make_soliton_params(int n) {
    if (n < kMinSolitonDimension || n > kMaxSolitonDimension) {
        throw DimensionOutOfRange("n = " + std::to_string(n) +
                                  ": b_n <= 0 outside 5..9, no shrinking soliton of this family");
    }
    return SolitonParams{n, soliton_a(n), soliton_b(n)};
}

/// phi and its first two derivatives at one point.
struct PhiValue {
    double phi = 0.0;
    double dphi = 0.0;
    double d2phi = 0.0;
};

inline PhiValue phi_eval(const SolitonParams& params, double rho) {
    if (!(rho >= 0.0)) throw DomainError("phi_eval: rho must be >= 0");
    const double rho2 = rho * rho;
    const double den = params.a * rho2 + params.b;
    PhiValue v;
    v.phi = rho2 / den;
    v.dphi = 2.0 * params.b * rho / (den * den);
    v.d2phi = 2.0 * params.b * (params.b - 3.0 * params.a * rho2) / (den * den * den);
    return v;
}

/// Residual of the self-similar reduction of the heat equation,
///   phi'' + (n-3) phi'/rho - (rho/2) phi' - (n-2) phi (phi-1) (phi-2) / rho^2,
/// for arbitrary supplied values of (phi, phi', phi'').
inline double self_similar_residual(int n, double rho, const PhiValue& v) {
    if (!(rho > 0.0)) throw DomainError("self-similar residual requires rho > 0");
    const double nd = static_cast<double>(n);
    return v.d2phi + (nd - 3.0) * v.dphi / rho - 0.5 * rho * v.dphi -
           (nd - 2.0) * v.phi * (v.phi - 1.0) * (v.phi - 2.0) / (rho * rho);
}

inline double soliton_ode_residual(const SolitonParams& params, double rho) {
    if (!(rho > 0.0)) throw DomainError("soliton_ode_residual requires rho > 0");
    return self_similar_residual(params.n, rho, phi_eval(params, rho));
}

// ---------------------------------------------------------------------------
// Radial profiles
// ---------------------------------------------------------------------------

/// The reduced field h sampled on a uniform radial grid starting at r = 0.
struct RadialProfile {
    int n = 0;
    std::vector<double> radii;
    std::vector<double> h;

    std::size_t size() const { return radii.size(); }
    double dr() const { return radii.size() > 1 ? radii[1] - radii[0] : 0.0; }
    double r_max() const { return radii.empty() ? 0.0 : radii.back(); }
};

/// Nodes r_j = j * r_max / intervals, j = 0..intervals.
inline std::vector<double> uniform_radii(double r_max, std::size_t intervals) {
    if (!(r_max > 0.0) || intervals < 1) throw InvalidProfile("uniform_radii: need r_max > 0, intervals >= 1");
    const double dr = r_max / static_cast<double>(intervals);
    std::vector<double> radii(intervals + 1);
    for (std::size_t j = 0; j <= intervals; ++j) radii[j] = static_cast<double>(j) * dr;
    radii.back() = r_max;
    return radii;
}

/// Throws InvalidProfile unless the profile satisfies its invariants.
inline void validate_profile(const RadialProfile& p) {
    if (p.radii.size() != p.h.size()) throw InvalidProfile("radii and h differ in length");
    if (p.radii.size() < 2) throw InvalidProfile("profile needs at least two nodes");
    if (p.radii[0] != 0.0) throw InvalidProfile("radii[0] must be 0");
    if (p.h[0] != 0.0) throw InvalidProfile("h[0] must be 0");
    const double dr = p.dr();
    if (!(dr > 0.0)) throw InvalidProfile("grid spacing must be positive");
    for (std::size_t j = 1; j < p.size(); ++j) {
        if (std::abs((p.radii[j] - p.radii[j - 1]) - dr) > 1e-9 * dr)
            throw InvalidProfile("radial grid must be uniform");
    }
    for (double v : p.h)
        if (!std::isfinite(v)) throw InvalidProfile("profile contains a non-finite value");
}

/// Samples h = f(r) on the given radii; the origin value is forced to 0.
template <class Fn>
RadialProfile make_profile(int n, std::vector<double> radii, Fn&& f) {
    RadialProfile p;
    p.n = n;
    p.h.resize(radii.size());
    for (std::size_t j = 0; j < radii.size(); ++j) p.h[j] = f(radii[j]);
    if (!p.h.empty()) p.h[0] = 0.0;
    p.radii = std::move(radii);
    return p;
}

/// h(r) = phi(r / sqrt(T - t)): the soliton with its singularity at time T.
inline RadialProfile soliton_profile(const SolitonParams& params, double T, double t,
                                     std::vector<double> radii) {
    if (!(t < T)) throw TimeOrderError("soliton_profile requires t < T");
    const double scale = 1.0 / std::sqrt(T - t);
    return make_profile(params.n, std::move(radii),
                        [&](double r) { return phi_eval(params, r * scale).phi; });
}

/// h' by second-order central differences, one-sided second order at the
/// outer node, zero at the origin (h is even in r).
inline std::vector<double> radial_derivative(const RadialProfile& p) {
    const std::size_t m = p.size();
    std::vector<double> d(m, 0.0);
    if (m < 3) return d;
    const double inv2dr = 0.5 / p.dr();
    for (std::size_t j = 1; j + 1 < m; ++j) d[j] = (p.h[j + 1] - p.h[j - 1]) * inv2dr;
    d[m - 1] = (3.0 * p.h[m - 1] - 4.0 * p.h[m - 2] + p.h[m - 3]) * inv2dr;
    return d;
}

// ---------------------------------------------------------------------------
// Curvature
// ---------------------------------------------------------------------------

/// Coefficients of F_ij = -c1 (x_i sigma_j - x_j sigma_i) + c2 e_ij, where
/// (e_ij)^a_b = delta_i^a delta_j^b - delta_j^a delta_i^b.
struct CurvatureSplit {
    int n = 0;
    std::vector<double> c1;
    std::vector<double> c2;
};

/// c1 = (r h' + h(h-2)) / r^4, c2 = h(2-h) / r^2. Origin entries come from
/// fitting h = c r^2 + d r^4 through the first two interior nodes, giving
/// c1(0) = 2d + c^2 and c2(0) = 2c.
inline CurvatureSplit curvature_split(const RadialProfile& p) {
    if (p.size() < 4) throw GridTooCoarse("curvature_split needs at least 4 nodes");
    const std::size_t m = p.size();
    const auto dh = radial_derivative(p);
    CurvatureSplit s;
    s.n = p.n;
    s.c1.resize(m);
    s.c2.resize(m);
    for (std::size_t j = 1; j < m; ++j) {
        const double r = p.radii[j];
        const double h = p.h[j];
        const double r2 = r * r;
        s.c1[j] = (r * dh[j] + h * (h - 2.0)) / (r2 * r2);
        s.c2[j] = h * (2.0 - h) / r2;
    }
    const double dr = p.dr();
    const double dr2 = dr * dr;
    const double c = (16.0 * p.h[1] - p.h[2]) / (12.0 * dr2);
    const double d = (p.h[2] - 4.0 * p.h[1]) / (12.0 * dr2 * dr2);
    s.c1[0] = 2.0 * d + c * c;
    s.c2[0] = 2.0 * c;
    return s;
}

/// Coefficients of |F|^2 = P r^4 c1^2 + Q r^2 c1 c2 + R c2^2 at x = r e_1.
struct AxisNormForm {
    double P = 0.0;
    double Q = 0.0;
    double R = 0.0;
};

namespace detail {

/// Sum of squares of all F_ij entries at x = e_1 for given (c1, c2), built
/// from the explicit sigma_i and e_ij matrices.
inline double assembled_norm_sq_unit_axis(int n, double c1, double c2) {
    const auto un = static_cast<std::size_t>(n);
    auto sigma = [&](std::size_t i, std::size_t a, std::size_t b) {
        // x = e_1, so x^b = delta_0^b
        return (i == a ? (b == 0 ? 1.0 : 0.0) : 0.0) - (i == b ? (a == 0 ? 1.0 : 0.0) : 0.0);
    };
    auto gen = [&](std::size_t i, std::size_t j, std::size_t a, std::size_t b) {
        return (i == a && j == b ? 1.0 : 0.0) - (j == a && i == b ? 1.0 : 0.0);
    };
    double total = 0.0;
    for (std::size_t i = 0; i < un; ++i) {
        const double xi = i == 0 ? 1.0 : 0.0;
        for (std::size_t j = 0; j < un; ++j) {
            const double xj = j == 0 ? 1.0 : 0.0;
            for (std::size_t a = 0; a < un; ++a) {
                for (std::size_t b = 0; b < un; ++b) {
                    const double f = -c1 * (xi * sigma(j, a, b) - xj * sigma(i, a, b)) +
                                     c2 * gen(i, j, a, b);
                    total += f * f;
                }
            }
        }
    }
    return total;
}

}  // namespace detail

/// Polarizes the assembled quadratic form in (c1, c2). Entries of the c1 term
/// scale as r^2 and those of e_ij are r-independent, which fixes the powers.
inline AxisNormForm axis_norm_form(int n) {
    AxisNormForm form;
    form.P = detail::assembled_norm_sq_unit_axis(n, 1.0, 0.0);
    form.R = detail::assembled_norm_sq_unit_axis(n, 0.0, 1.0);
    form.Q = detail::assembled_norm_sq_unit_axis(n, 1.0, 1.0) - form.P - form.R;
    return form;
}

/// Pointwise |F|^2(r_j).
inline std::vector<double> curvature_norm_sq(const CurvatureSplit& split, std::span<const double> radii) {
    const AxisNormForm form = axis_norm_form(split.n);
    std::vector<double> out(radii.size());
    for (std::size_t j = 0; j < radii.size(); ++j) {
        const double r2 = radii[j] * radii[j];
        const double c1 = split.c1[j];
        const double c2 = split.c2[j];
        out[j] = form.P * r2 * r2 * c1 * c1 + form.Q * r2 * c1 * c2 + form.R * c2 * c2;
    }
    return out;
}

inline std::vector<double> curvature_norm_sq(const RadialProfile& p) {
    return curvature_norm_sq(curvature_split(p), p.radii);
}

/// sup_r |F| in one pass, same discretisation as curvature_split followed
/// by curvature_norm_sq.
inline double sup_curvature(const RadialProfile& p, const AxisNormForm& form) {
    const std::size_t m = p.size();
    if (m < 4) throw GridTooCoarse("sup_curvature needs at least 4 nodes");
    const double dr = p.dr();
    const double dr2 = dr * dr;
    const auto& h = p.h;
    const double c = (16.0 * h[1] - h[2]) / (12.0 * dr2);
    double sup = form.R * 4.0 * c * c;
    const double inv2dr = 0.5 / dr;
    for (std::size_t j = 1; j < m; ++j) {
        const double r = p.radii[j];
        const double r2 = r * r;
        const double dh = j + 1 < m ? (h[j + 1] - h[j - 1]) * inv2dr
                                    : (3.0 * h[j] - 4.0 * h[j - 1] + h[j - 2]) * inv2dr;
        const double c1 = (r * dh + h[j] * (h[j] - 2.0)) / (r2 * r2);
        const double c2 = h[j] * (2.0 - h[j]) / r2;
        sup = std::max(sup, form.P * r2 * r2 * c1 * c1 + form.Q * r2 * c1 * c2 + form.R * c2 * c2);
    }
    return std::sqrt(sup);
}

inline double sup_curvature(const RadialProfile& p) { return sup_curvature(p, axis_norm_form(p.n)); }

// ---------------------------------------------------------------------------
// Quadrature and energy
// ---------------------------------------------------------------------------

/// Area of the unit sphere S^{n-1} in R^n.
inline double sphere_area(int n) {
    const double half = 0.5 * static_cast<double>(n);
    return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

/// omega_{n-1} * int_0^{r_cut} f(r) r^{n-1} dr by the trapezoid rule on the
/// grid; a partial last interval is handled by linear interpolation.
inline double radial_integral(int n, std::span<const double> radii, std::span<const double> f,
                              double r_cut) {
    if (radii.size() < 2) return 0.0;
    auto weighted = [&](std::size_t j) {
        double w = f[j];
        for (int k = 1; k < n; ++k) w *= radii[j];
        return w;
    };
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < radii.size(); ++j) {
        const double r0 = radii[j];
        const double r1 = radii[j + 1];
        if (r0 >= r_cut) break;
        const double g0 = weighted(j);
        const double g1 = weighted(j + 1);
        if (r1 <= r_cut) {
            sum += 0.5 * (g0 + g1) * (r1 - r0);
        } else {
            const double theta = (r_cut - r0) / (r1 - r0);
            const double gc = g0 + theta * (g1 - g0);
            sum += 0.5 * (g0 + gc) * (r_cut - r0);
        }
    }
    return sphere_area(n) * sum;
}

/// E = 1/2 int_{|x| < r_cut} |F|^2.
inline double energy(const RadialProfile& p, double r_cut) {
    if (r_cut > p.r_max() * (1.0 + 1e-12)) throw DomainError("energy: r_cut beyond grid");
    const auto f2 = curvature_norm_sq(p);
    return 0.5 * radial_integral(p.n, p.radii, f2, r_cut);
}

inline double energy(const RadialProfile& p) { return energy(p, p.r_max()); }

// ---------------------------------------------------------------------------
// Reduced heat equation
// ---------------------------------------------------------------------------

/// Default bound for the origin regularity check |h[1]| <= kappa r_1^2:
/// ten times sup|h| over the squared domain length, with the length capped
/// at 1 so that unit-scale data stays admissible on large domains.
inline double default_origin_kappa(const RadialProfile& p) {
    double sup = 0.0;
    for (double v : p.h) sup = std::max(sup, std::abs(v));
    const double len = std::min(p.r_max(), 1.0);
    return 10.0 * sup / (len * len);
}

inline void check_origin_regularity(const RadialProfile& p, std::optional<double> kappa = std::nullopt) {
    if (p.size() < 2) throw GridTooCoarse("profile too short for the origin check");
    const double k = kappa.value_or(default_origin_kappa(p));
    const double r1 = p.radii[1];
    if (p.h[0] != 0.0 || std::abs(p.h[1]) > k * r1 * r1) {
        throw OriginRegularityError("h is not O(r^2) at the origin (|h[1]| = " + std::to_string(std::abs(p.h[1])) +
                                    ", bound " + std::to_string(k * r1 * r1) + ")");
    }
}

/// 1/r_j on a uniform grid of spacing dr (0 at the origin).
inline std::vector<double> inverse_radii(double dr, std::size_t nodes) {
    std::vector<double> inv(nodes, 0.0);
    for (std::size_t j = 1; j < nodes; ++j) inv[j] = 1.0 / (static_cast<double>(j) * dr);
    return inv;
}

/// G[h] written into out, given inv_r[j] = 1/r_j. Origin and outer nodes are
/// set to 0 (the origin is pinned and the outer node is a Dirichlet wall).
inline void pde_rhs_into(int n, double dr, std::span<const double> inv_r, std::span<const double> h,
                         std::span<double> out) {
    const std::size_t m = h.size();
    const double lin = static_cast<double>(n - 3);
    const double react = static_cast<double>(n - 2);
    const double inv_dr2 = 1.0 / (dr * dr);
    const double inv_2dr = 0.5 / dr;
    out[0] = 0.0;
    for (std::size_t j = 1; j + 1 < m; ++j) {
        const double ir = inv_r[j];
        const double hj = h[j];
        const double hrr = (h[j + 1] - 2.0 * hj + h[j - 1]) * inv_dr2;
        const double hr = (h[j + 1] - h[j - 1]) * inv_2dr;
        out[j] = hrr + (lin * hr - react * hj * (hj - 1.0) * (hj - 2.0) * ir) * ir;
    }
    if (m > 1) out[m - 1] = 0.0;
}

inline void pde_rhs_into(int n, double dr, std::span<const double> h, std::span<double> out) {
    const auto inv_r = inverse_radii(dr, h.size());
    pde_rhs_into(n, dr, inv_r, h, out);
}

inline std::vector<double> pde_rhs(const RadialProfile& p, std::optional<double> kappa = std::nullopt) {
    validate_profile(p);
    if (p.size() < 3) throw GridTooCoarse("pde_rhs needs at least 3 nodes");
    check_origin_regularity(p, kappa);
    std::vector<double> g(p.size());
    pde_rhs_into(p.n, p.dr(), p.h, g);
    return g;
}

}  // namespace ymflow

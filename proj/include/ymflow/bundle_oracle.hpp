/// @file bundle_oracle.hpp
/// @brief Full matrix-valued connections on the trivial R^n x R^n bundle,
///        with curvature and covariant divergence by finite differences.
///
/// Nothing here uses the radial reductions: A_i(x) = -(h(|x|)/|x|^2) sigma_i(x)
/// is assembled as n x n matrices and differentiated numerically, so every
/// reduced formula in radial_core / monotonicity can be checked against it.
/// Indices i, j are zero-based. Arithmetic is carried out in long double so
/// that the nested difference quotients of the covariant divergence stay
/// above roundoff at the default steps.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ymflow/errors.hpp"
#include "ymflow/radial_core.hpp"

namespace ymflow::oracle {

using Scalar = long double;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Profile h(r, t) driving an equivariant connection.
using ProfileFn = std::function<Scalar(Scalar r, Scalar t)>;

struct MatrixField {
    Vector point;
    std::vector<Matrix> A;               ///< A[i], antisymmetric
    std::vector<std::vector<Matrix>> F;  ///< F[i][j]; empty when not computed
};

/// (sigma_i)^a_b = delta_i^a x^b - delta_i^b x^a.
inline Matrix sigma(int i, const Vector& x) {
    const auto n = static_cast<int>(x.size());
    if (i < 0 || i >= n) throw IndexOutOfRange("sigma: index " + std::to_string(i));
    Matrix s = Matrix::Zero(n, n);
    s.row(i) += x.transpose();
    s.col(i) -= x;
    return s;
}

/// (e_ij)^a_b = delta_i^a delta_j^b - delta_j^a delta_i^b.
inline Matrix generator(int i, int j, int n) {
    if (i < 0 || i >= n || j < 0 || j >= n) throw IndexOutOfRange("generator: index out of range");
    Matrix e = Matrix::Zero(n, n);
    e(i, j) += 1.0;
    e(j, i) -= 1.0;
    return e;
}

inline std::pair<Matrix, Matrix> equivariant_frames(int i, int j, const Vector& x) {
    return {sigma(i, x), generator(i, j, static_cast<int>(x.size()))};
}

/// A_i = -(h/r^2) sigma_i. At the origin the connection vanishes provided the
/// caller vouches for h = O(r^2) via origin_regular.
inline MatrixField connection_at(const ProfileFn& h, const Vector& x, Scalar t, bool origin_regular = false) {
    const auto n = static_cast<int>(x.size());
    MatrixField field;
    field.point = x;
    field.A.reserve(static_cast<std::size_t>(n));
    const Scalar r2 = x.squaredNorm();
    if (r2 == 0.0) {
        if (!origin_regular) throw OriginSingularity("connection_at: |x| = 0 without an O(r^2) limit");
        for (int i = 0; i < n; ++i) field.A.push_back(Matrix::Zero(n, n));
        return field;
    }
    const Scalar coeff = -h(std::sqrt(r2), t) / r2;
    for (int i = 0; i < n; ++i) field.A.push_back(coeff * sigma(i, x));
    return field;
}

namespace detail {

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

inline void check_step(const Vector& x, Scalar eps) {
    if (!(eps > 0.0)) throw StepTooLarge("finite-difference step must be positive");
    if (eps > x.norm() / 4.0) throw StepTooLarge("finite-difference step exceeds |x|/4");
}

/// F_ij from a connection callable x -> A(x), central differences of step eps.
template <class ConnFn>
std::vector<std::vector<Matrix>> curvature_of(const ConnFn& conn, const Vector& x, Scalar eps,
                                              const std::vector<Matrix>& A) {
    const auto n = static_cast<int>(x.size());
    const auto un = static_cast<std::size_t>(n);
    // dA[i][j] = d_i A_j
    std::vector<std::vector<Matrix>> dA(un);
    for (int i = 0; i < n; ++i) {
        Vector xp = x;
        Vector xm = x;
        xp(i) += eps;
        xm(i) -= eps;
        const std::vector<Matrix> ap = conn(xp);
        const std::vector<Matrix> am = conn(xm);
        dA[static_cast<std::size_t>(i)].reserve(un);
        for (std::size_t j = 0; j < un; ++j) dA[static_cast<std::size_t>(i)].push_back((ap[j] - am[j]) / (2.0 * eps));
    }
    std::vector<std::vector<Matrix>> F(un, std::vector<Matrix>(un));
    for (std::size_t i = 0; i < un; ++i) {
        for (std::size_t j = 0; j < un; ++j) {
            if (i == j) {
                F[i][j] = Matrix::Zero(n, n);
            } else if (j < i) {
                F[i][j] = -F[j][i];
            } else {
                F[i][j] = dA[i][j] - dA[j][i] + commutator(A[i], A[j]);
            }
        }
    }
    return F;
}

}  // namespace detail

/// F_ij = d_i A_j - d_j A_i + [A_i, A_j] with second-order central
/// differences; F_ji = -F_ij exactly.
inline MatrixField curvature_fd(const ProfileFn& h, const Vector& x, Scalar t, Scalar eps) {
    detail::check_step(x, eps);
    MatrixField field = connection_at(h, x, t);
    auto conn = [&](const Vector& y) { return connection_at(h, y, t).A; };
    field.F = detail::curvature_of(conn, x, eps, field.A);
    return field;
}

/// D_p F_pj = sum_p d_p F_pj + [A_p, F_pj], with d_p F_pj by central
/// differences of curvature_fd (same step).
inline std::vector<Matrix> divergence_fd(const ProfileFn& h, const Vector& x, Scalar t, Scalar eps) {
    detail::check_step(x, 2.0 * eps);
    const auto n = static_cast<int>(x.size());
    const auto un = static_cast<std::size_t>(n);
    const MatrixField centre = curvature_fd(h, x, t, eps);
    std::vector<Matrix> div(un, Matrix::Zero(n, n));
    for (int p = 0; p < n; ++p) {
        Vector xp = x;
        Vector xm = x;
        xp(p) += eps;
        xm(p) -= eps;
        const MatrixField fp = curvature_fd(h, xp, t, eps);
        const MatrixField fm = curvature_fd(h, xm, t, eps);
        const auto up = static_cast<std::size_t>(p);
        for (std::size_t j = 0; j < un; ++j) {
            div[j] += (fp.F[up][j] - fm.F[up][j]) / (2.0 * eps) +
                      detail::commutator(centre.A[up], centre.F[up][j]);
        }
    }
    return div;
}

/// s . A = s A s^{-1} - (ds) s^{-1}; F transforms by conjugation.
inline MatrixField gauge_transform(const MatrixField& field, const Matrix& s, const std::vector<Matrix>& ds) {
    const auto n = s.rows();
    if (s.cols() != n || (s * s.transpose() - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-12)
        throw NotOrthogonal("gauge_transform: s is not orthogonal");
    const Matrix s_inv = s.transpose();
    MatrixField out;
    out.point = field.point;
    out.A.reserve(field.A.size());
    for (std::size_t i = 0; i < field.A.size(); ++i) {
        Matrix a = s * field.A[i] * s_inv;
        if (i < ds.size()) a -= ds[i] * s_inv;
        out.A.push_back(std::move(a));
    }
    out.F = field.F;
    for (auto& row : out.F)
        for (auto& f : row) f = s * f * s_inv;
    return out;
}

/// |F|^2 = sum over ordered (i,j) and all matrix entries.
inline Scalar norm_sq(const std::vector<std::vector<Matrix>>& F) {
    Scalar total = 0.0;
    for (const auto& row : F)
        for (const auto& f : row) total += f.squaredNorm();
    return total;
}

/// F_ij = -c1 (x_i sigma_j - x_j sigma_i) + c2 e_ij.
inline std::vector<std::vector<Matrix>> curvature_from_split(Scalar c1, Scalar c2, const Vector& x) {
    const auto n = static_cast<int>(x.size());
    const auto un = static_cast<std::size_t>(n);
    std::vector<Matrix> sig;
    for (int i = 0; i < n; ++i) sig.push_back(sigma(i, x));
    std::vector<std::vector<Matrix>> F(un, std::vector<Matrix>(un));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            F[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                -c1 * (x(i) * sig[static_cast<std::size_t>(j)] - x(j) * sig[static_cast<std::size_t>(i)]) +
                c2 * generator(i, j, n);
    return F;
}

/// Haar-random rotation in SO(n).
template <class Rng>
Matrix random_rotation(int n, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = gauss(rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i)
        if (r(i, i) < 0.0) q.col(i) *= -1.0;
    if (q.determinant() < 0.0) q.col(0) *= -1.0;
    return q;
}

/// Fixed generic unit direction (1, 2, ..., n) / |.| used for sample points.
inline Vector generic_direction(int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = Scalar(1) + i + Scalar(0.25) * i * i;
    return v.normalized();
}

// ---------------------------------------------------------------------------
// Reduction checks
// ---------------------------------------------------------------------------

/// The shrinking soliton h(r,t) = rho^2 / (a rho^2 + b), rho = r / sqrt(T - t),
/// evaluated in long double from the closed-form constants, with exact
/// r-derivatives.
struct SolitonField {
    int n = 5;
    Scalar a = 0;
    Scalar b = 0;
    Scalar T = 1;

    static SolitonField make(int n, Scalar T = 1) {
        make_soliton_params(n);  // range check
        const Scalar nd = n;
        SolitonField f;
        f.n = n;
        f.a = std::sqrt(nd - 2) / (2 * std::sqrt(Scalar(2)));
        f.b = (6 * nd - 12 - (nd + 2) * std::sqrt(2 * nd - 4)) / 2;
        f.T = T;
        return f;
    }

    Scalar scale(Scalar t) const { return 1 / std::sqrt(T - t); }
    Scalar h(Scalar r, Scalar t) const {
        const Scalar rho = r * scale(t);
        return rho * rho / (a * rho * rho + b);
    }
    Scalar dh(Scalar r, Scalar t) const {
        const Scalar s = scale(t);
        const Scalar rho = r * s;
        const Scalar den = a * rho * rho + b;
        return 2 * b * rho / (den * den) * s;
    }
    Scalar d2h(Scalar r, Scalar t) const {
        const Scalar s = scale(t);
        const Scalar rho = r * s;
        const Scalar den = a * rho * rho + b;
        return 2 * b * (b - 3 * a * rho * rho) / (den * den * den) * s * s;
    }
    /// Right-hand side of the reduced heat equation, analytically.
    Scalar G(Scalar r, Scalar t) const {
        const Scalar nd = n;
        const Scalar v = h(r, t);
        return d2h(r, t) + (nd - 3) * dh(r, t) / r - (nd - 2) * v * (v - 1) * (v - 2) / (r * r);
    }
    ProfileFn fn() const {
        return [*this](Scalar r, Scalar t) { return h(r, t); };
    }
};

enum class Fault { none, c1, G };

struct ReductionRow {
    std::string check;
    double r = 0.0;
    double t = 0.0;
    double eps = 0.0;
    double residual = 0.0;
};

struct ReductionOrder {
    std::string check;
    double r = 0.0;
    double order = 0.0;  ///< NaN when both residuals sit below the noise floor
    bool pass = false;
};

struct ReductionOptions {
    std::vector<double> radii{0.5, 1.0, 2.0};
    double tau = 1.0;                   ///< T - t at every sample
    std::vector<double> eps{1e-3, 1e-4};
    double residual_floor = 1e-5;       ///< required at the finest step
    double noise_floor = 1e-12;         ///< residuals below this are roundoff
    double order_min = 1.7;
    double order_max = 2.3;
    double lambda = 0.5;                ///< rescaling factor for the rescale row
    bool bianchi = true;
    Fault fault = Fault::none;
};

struct ReductionReport {
    int n = 0;
    std::vector<ReductionRow> rows;
    std::vector<ReductionOrder> orders;
    bool pass = false;
};

namespace detail {

inline Scalar max_abs(const std::vector<std::vector<Matrix>>& F) {
    Scalar m = 0;
    for (const auto& row : F)
        for (const auto& f : row) m = std::max(m, f.cwiseAbs().maxCoeff());
    return m;
}

inline Scalar max_abs(const std::vector<Matrix>& v) {
    Scalar m = 0;
    for (const auto& f : v) m = std::max(m, f.cwiseAbs().maxCoeff());
    return m;
}

inline Scalar max_abs_diff(const std::vector<std::vector<Matrix>>& a, const std::vector<std::vector<Matrix>>& b) {
    Scalar m = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) m = std::max(m, (a[i][j] - b[i][j]).cwiseAbs().maxCoeff());
    return m;
}

/// Cyclic sum D_i F_jk + D_j F_ki + D_k F_ij, maximised over index triples,
/// relative to max |F|.
inline Scalar bianchi_residual(const ProfileFn& h, const Vector& x, Scalar t, Scalar eps) {
    const auto n = static_cast<int>(x.size());
    const auto un = static_cast<std::size_t>(n);
    const MatrixField centre = curvature_fd(h, x, t, eps);
    std::vector<std::vector<std::vector<Matrix>>> dF(un);  // dF[p] = d_p F
    for (int p = 0; p < n; ++p) {
        Vector xp = x;
        Vector xm = x;
        xp(p) += eps;
        xm(p) -= eps;
        const auto fp = curvature_fd(h, xp, t, eps).F;
        const auto fm = curvature_fd(h, xm, t, eps).F;
        auto& d = dF[static_cast<std::size_t>(p)];
        d.assign(un, std::vector<Matrix>(un));
        for (std::size_t i = 0; i < un; ++i)
            for (std::size_t j = 0; j < un; ++j) d[i][j] = (fp[i][j] - fm[i][j]) / (2 * eps);
    }
    auto D = [&](std::size_t p, std::size_t i, std::size_t j) -> Matrix {
        return dF[p][i][j] + commutator(centre.A[p], centre.F[i][j]);
    };
    Scalar worst = 0;
    for (std::size_t i = 0; i < un; ++i)
        for (std::size_t j = i + 1; j < un; ++j)
            for (std::size_t k = j + 1; k < un; ++k)
                worst = std::max(worst, (D(i, j, k) + D(j, k, i) + D(k, i, j)).cwiseAbs().maxCoeff());
    return worst / max_abs(centre.F);
}

}  // namespace detail

/// Runs the curvature-decomposition, flow-velocity, soliton-equation and
/// rescaling checks (plus the optional Bianchi row) at x = r * u for the
/// generic direction u, for every r and eps. Residuals are relative to the
/// largest entry of the reference quantity.
inline ReductionReport verify_reduction(const SolitonParams& params, const ReductionOptions& opt = {}) {
    const int n = params.n;
    const SolitonField sol = SolitonField::make(n);
    const Scalar t = sol.T - static_cast<Scalar>(opt.tau);
    const ProfileFn h = sol.fn();
    const Vector u = generic_direction(n);

    ReductionReport report;
    report.n = n;
    auto push = [&](const char* name, double r, double eps, Scalar residual) {
        report.rows.push_back({name, r, static_cast<double>(t), eps, static_cast<double>(residual)});
    };
    for (double r_d : opt.radii) {
        const Scalar r = r_d;
        const Vector x = r * u;
        for (double eps_d : opt.eps) {
            const Scalar eps = eps_d;
            const MatrixField fd = curvature_fd(h, x, t, eps);
            // curvature decomposition
            {
                const Scalar hv = sol.h(r, t);
                Scalar c1 = (r * sol.dh(r, t) + hv * (hv - 2)) / (r * r * r * r);
                if (opt.fault == Fault::c1) c1 *= Scalar(1.01);
                const Scalar c2 = hv * (2 - hv) / (r * r);
                const auto split = curvature_from_split(c1, c2, x);
                push("decomposition", r_d, eps_d, detail::max_abs_diff(fd.F, split) / detail::max_abs(split));
            }
            const std::vector<Matrix> div = divergence_fd(h, x, t, eps);
            // flow velocity: D_p F_pj = -(G / r^2) sigma_j
            {
                Scalar g = sol.G(r, t);
                if (opt.fault == Fault::G) g *= Scalar(1.01);
                Scalar diff = 0;
                Scalar scale = 0;
                for (int j = 0; j < n; ++j) {
                    const Matrix predicted = -(g / (r * r)) * sigma(j, x);
                    diff = std::max(diff, (div[static_cast<std::size_t>(j)] - predicted).cwiseAbs().maxCoeff());
                    scale = std::max(scale, predicted.cwiseAbs().maxCoeff());
                }
                push("flow_velocity", r_d, eps_d, diff / scale);
            }
            // soliton equation: D_p F_pj + x^p F_pj / (2 (t - T)) = 0
            {
                const Scalar w = 1 / (2 * (t - sol.T));
                Scalar resid = 0;
                for (int j = 0; j < n; ++j) {
                    Matrix m = div[static_cast<std::size_t>(j)];
                    for (int p = 0; p < n; ++p)
                        m += w * x(p) * fd.F[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)];
                    resid = std::max(resid, m.cwiseAbs().maxCoeff());
                }
                push("soliton_equation", r_d, eps_d, resid / detail::max_abs(div));
            }
            // rescaling: curvature of lambda A(lambda x, T + lambda^2 s) equals the
            // split built from h_lambda(r) = h(lambda r, T + lambda^2 s), s = t - T
            {
                const Scalar lam = opt.lambda;
                const Scalar t_big = sol.T + lam * lam * (t - sol.T);
                auto conn = [&](const Vector& y) {
                    auto a = connection_at(h, Vector(lam * y), t_big).A;
                    for (auto& m : a) m *= lam;
                    return a;
                };
                detail::check_step(x, eps);
                const auto F = detail::curvature_of(conn, x, eps, conn(x));
                const Scalar hv = sol.h(lam * r, t_big);
                const Scalar dhv = lam * sol.dh(lam * r, t_big);
                const Scalar c1 = (r * dhv + hv * (hv - 2)) / (r * r * r * r);
                const Scalar c2 = hv * (2 - hv) / (r * r);
                const auto split = curvature_from_split(c1, c2, x);
                push("rescaling", r_d, eps_d, detail::max_abs_diff(F, split) / detail::max_abs(split));
            }
            if (opt.bianchi) push("bianchi", r_d, eps_d, detail::bianchi_residual(h, x, t, eps));
        }
    }

    bool pass = true;
    const double coarse = opt.eps.front();
    const double fine = opt.eps.back();
    for (const auto& row : report.rows) {
        if (row.eps != coarse) continue;
        const auto it = std::find_if(report.rows.begin(), report.rows.end(), [&](const ReductionRow& o) {
            return o.check == row.check && o.r == row.r && o.eps == fine;
        });
        if (it == report.rows.end()) continue;
        ReductionOrder ord;
        ord.check = row.check;
        ord.r = row.r;
        if (coarse == fine || (row.residual < opt.noise_floor && it->residual < opt.noise_floor)) {
            ord.order = std::nan("");
            ord.pass = it->residual <= opt.residual_floor;
        } else {
            ord.order = std::log(row.residual / it->residual) / std::log(coarse / fine);
            const bool order_ok = ord.order >= opt.order_min && ord.order <= opt.order_max;
            // the Bianchi row is finite-difference self-consistency; its order is reported, not gated
            ord.pass = it->residual <= opt.residual_floor && (order_ok || row.check == "bianchi");
        }
        pass = pass && ord.pass;
        report.orders.push_back(ord);
    }
    report.pass = pass;
    return report;
}

}  // namespace ymflow::oracle

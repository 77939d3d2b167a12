// Monotonicity functionals: kernel normalisation, Z and W on exact and flowed
// data, and the regularity scan.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ymflow/flow.hpp"
#include "ymflow/monotonicity.hpp"

using namespace ymflow;

TEST(Kernel, CentredClosedForm) {
    const KernelSpec k{5, 1.0, 0.0};
    const double tau = 0.5;
    const double r = 0.7;
    const double expected = std::pow(4.0 * std::numbers::pi * tau, -2.5) * std::exp(-r * r / (4.0 * tau));
    EXPECT_NEAR(kernel_weight(k, 0.5, r), expected, 1e-15 * expected);
    EXPECT_THROW(kernel_weight(k, 1.0, r), TimeOrderError);
    EXPECT_THROW(kernel_weight(k, 0.0, -1.0), DomainError);
}

TEST(Kernel, SphereAverageLimits) {
    EXPECT_NEAR(detail::sphere_average_exp(5, 0.0), 1.0, 1e-14);
    // n = 3: average of exp(-s(1-cos)) with weight sin = (1 - e^{-2s}) / (2s)
    for (double s : {0.1, 1.0, 5.0}) EXPECT_NEAR(detail::sphere_average_exp(3, s), (1 - std::exp(-2 * s)) / (2 * s), 1e-13);
}

TEST(Kernel, MassIsOne) {
    const auto radii = uniform_radii(14.0, 5600);
    const std::vector<double> one(radii.size(), 1.0);
    for (int n : {5, 7, 9}) {
        for (double d : {0.0, 0.5, 1.0, 2.0}) {
            for (double tau : {1.0, 0.25}) {
                const KernelSpec spec{n, 1.0, d};
                const double mass = kernel_integral(n, radii, one, kernel_weights(spec, 1.0 - tau, radii));
                EXPECT_NEAR(mass, 1.0, 1e-8) << "n=" << n << " d=" << d << " tau=" << tau;
            }
        }
    }
}

TEST(Kernel, OffsetKernelMatchesDirectSphereIntegral) {
    // n = 3 offset kernel has a closed form in r: the sphere average of
    // exp(-|x-X|^2/4tau) is exp(-(r-d)^2/4tau) (1 - e^{-rd/tau}) / (rd/tau).
    const KernelSpec spec{3, 1.0, 1.5};
    const double tau = 0.4, r = 0.9;
    const double s = r * spec.offset / (2.0 * tau);
    const double expected = std::pow(4.0 * std::numbers::pi * tau, -1.5) *
                            std::exp(-(r - spec.offset) * (r - spec.offset) / (4.0 * tau)) *
                            (1.0 - std::exp(-2.0 * s)) / (2.0 * s);
    EXPECT_NEAR(kernel_weight(spec, 0.6, r), expected, 1e-13 * expected);
}

TEST(Z, SolitonIsConstant) {
    // Z is exactly constant on the soliton for the kernel at (0, T).
    const auto params = make_soliton_params(5);
    const KernelSpec spec{5, 1.0, 0.0};
    double lo = 1e300, hi = 0.0;
    for (double t : {0.0, 0.3, 0.5, 0.75}) {
        const auto p = soliton_profile(params, 1.0, t, uniform_radii(8.0, 1600));
        const double z = Z_value(p, spec, t);
        lo = std::min(lo, z);
        hi = std::max(hi, z);
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LT((hi - lo) / hi, 1e-4);
}

TEST(W, DensityVanishesOnSoliton) {
    for (int n = 5; n <= 9; ++n) {
        const auto params = make_soliton_params(n);
        for (double t : {0.0, 0.5, 0.75}) {
            const auto p = soliton_profile(params, 1.0, t, uniform_radii(8.0, 800));
            const auto w = W_density(p, t, KernelSpec{n, 1.0, 0.0});
            const auto g = pde_rhs(p);
            double scale = 0.0;
            for (std::size_t j = 1; j < p.size(); ++j)
                scale = std::max(scale, 2.0 * (n - 1) * g[j] * g[j] / (p.radii[j] * p.radii[j]));
            for (double v : w) ASSERT_LE(v, 1e-6 * scale) << "n=" << n << " t=" << t;
        }
    }
}

TEST(W, DensityPositiveOffSoliton) {
    const auto p = make_profile(5, uniform_radii(8.0, 800), [](double r) { return 2.0 * r * r / (r * r + 1.0); });
    const auto w = W_density(p, 0.0, KernelSpec{5, 1.0, 0.0});
    double sup = 0.0;
    for (double v : w) {
        EXPECT_GE(v, 0.0);
        sup = std::max(sup, v);
    }
    EXPECT_GT(sup, 1e-2);
    EXPECT_THROW(W_density(p, 0.0, KernelSpec{5, 1.0, 1.0}), OffsetUnsupported);
    EXPECT_THROW(W_density(p, 1.0, KernelSpec{5, 1.0, 0.0}), TimeOrderError);
}

TEST(W, SixthOrderDerivatives) {
    auto err = [](std::size_t m) {
        const auto p = make_profile(5, uniform_radii(3.0, m), [](double r) { return std::sin(r) * r; });
        const auto d = radial_derivatives_6th(p);
        double e = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double r = p.radii[j];
            e = std::max(e, std::abs(d.d1[j] - (std::sin(r) + r * std::cos(r))));
            e = std::max(e, std::abs(d.d2[j] - (2.0 * std::cos(r) - r * std::sin(r))));
        }
        return e;
    };
    const double ratio = err(60) / err(120);
    EXPECT_GT(ratio, 40.0);  // sixth order at the interior, >= fifth at the wall
    EXPECT_THROW(radial_derivatives_6th(make_profile(5, uniform_radii(1.0, 5), [](double) { return 0.0; })),
                 GridTooCoarse);
}

TEST(Z, MonotoneAlongBumpFlow) {
    FlowConfig c;
    c.grid_points = 200;
    c.t_end = 0.3;
    c.initial = RationalBump{1.0};
    c.kernel = KernelSpec{5, 0.7, 0.0};
    c.record_every = 50;
    const auto tr = run_flow(c);
    const double z0 = tr.records.front().Z;
    for (std::size_t k = 1; k < tr.records.size(); ++k)
        ASSERT_LE(tr.records[k].Z, tr.records[k - 1].Z + 1e-3 * z0) << "t=" << tr.records[k].t;
    for (const auto& r : tr.records) EXPECT_GE(r.W, 0.0);
    EXPECT_GE(integrated_W(tr), 0.0);
}

TEST(Scan, ColumnsPerOffset) {
    Trajectory tr;
    const auto params = make_soliton_params(5);
    for (double t : {0.0, 0.5, 0.95})
        tr.snapshots.push_back({t, soliton_profile(params, 1.0, t, uniform_radii(8.0, 800))});
    const std::vector<double> offsets{0.0, 1.0};
    const auto cells = regularity_scan(tr, 1.0, offsets);
    ASSERT_EQ(cells.size(), 6u);
    EXPECT_NEAR(cells[0].value, cells[2].value, 1e-3 * cells[0].value);
    EXPECT_LT(cells[5].value, 0.1 * cells[3].value);
    const std::vector<double> bad{-1.0};
    EXPECT_THROW(regularity_scan(tr, 1.0, bad), DomainError);
}

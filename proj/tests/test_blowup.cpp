// Blow-up analysis: parabolic rescaling, soliton distance, convergence
// report and the rapid-forming series.

#include <gtest/gtest.h>

#include <cmath>

#include "ymflow/blowup.hpp"

using namespace ymflow;

namespace {

/// Snapshots of the exact soliton at the given times.
Trajectory exact_soliton(const std::vector<double>& times, double T = 1.0) {
    Trajectory tr;
    const auto params = make_soliton_params(5);
    for (double t : times) {
        tr.snapshots.push_back({t, soliton_profile(params, T, t, uniform_radii(8.0, 800))});
        tr.records.push_back({t, 0.0, sup_curvature(tr.snapshots.back().profile), 0.0, 0.0, 0.0, 0.0});
    }
    return tr;
}

}  // namespace

TEST(Rescale, ExactSolitonIsFixed) {
    const auto tr = exact_soliton({0.0, 0.5, 0.75, 0.875});
    const auto params = make_soliton_params(5);
    for (double lambda : {1.0, std::sqrt(0.5), 0.5}) {
        const auto p = rescale_profile(tr, 1.0, lambda, 8.0);
        const auto [sup, l2] = soliton_distance(p, params, 8.0);
        EXPECT_LT(sup, 1e-14) << lambda;
        EXPECT_LT(l2, 1e-12);
        // the rescaled grid keeps the source spacing dr / lambda and stops at or below P
        EXPECT_LE(p.radii.back(), 8.0 + 1e-12);
        EXPECT_GT(p.radii.back(), 8.0 - 0.01 / lambda - 1e-12);
    }
}

TEST(Rescale, TimeInterpolationIsLinear) {
    // Profiles at t = 0 and 0.5; lambda^2 = 0.75 puts the time halfway.
    Trajectory tr;
    auto a = make_profile(5, uniform_radii(8.0, 80), [](double r) { return 0.1 * r; });
    auto b = make_profile(5, uniform_radii(8.0, 80), [](double r) { return 0.3 * r; });
    tr.snapshots = {{0.0, a}, {0.5, b}};
    const auto p = rescale_profile(tr, 1.0, std::sqrt(0.75), 4.0);
    for (std::size_t j = 1; j < p.size(); ++j) EXPECT_NEAR(p.h[j], 0.2 * p.radii[j] * std::sqrt(0.75), 1e-12);
}

TEST(Rescale, Errors) {
    const auto tr = exact_soliton({0.0, 0.5});
    EXPECT_THROW(rescale_profile(tr, 1.0, 0.1, 8.0), TimeNotBracketed);   // t = 0.99
    EXPECT_THROW(rescale_profile(tr, 1.0, 1.0, 10.0), ScaleTooSmall);     // lambda P > r_max
    EXPECT_THROW(rescale_profile(tr, 1.0, -1.0, 8.0), DomainError);
    EXPECT_THROW(rescale_profile(Trajectory{}, 1.0, 1.0, 8.0), TimeNotBracketed);
}

TEST(Convergence, DefaultLambdasHalveTheTimeGap) {
    const auto tr = exact_soliton({0.0, 0.5, 0.75, 0.875, 0.9375});
    const auto l = default_lambdas(tr, 1.0);
    ASSERT_EQ(l.size(), 5u);  // lambda^2 = 1, 1/2, ..., 1/16 keeps T - lambda^2 inside the snapshots
    for (std::size_t i = 1; i < l.size(); ++i) EXPECT_NEAR(l[i] / l[i - 1], std::sqrt(0.5), 1e-15);
    for (double v : l) EXPECT_LE(1.0 - v * v, 0.9375 + 1e-12);
}

TEST(Convergence, ReportOnExactData) {
    const auto tr = exact_soliton({0.0, 0.5, 0.75, 0.875, 0.9375});
    BlowupDiagnosis d;
    d.T_hat = 1.0;
    std::vector<double> lambdas{1.0, std::sqrt(0.5), 0.5, std::sqrt(0.125), 0.25, 0.1};
    const auto rep = convergence_report(tr, d, lambdas, 8.0);
    ASSERT_EQ(rep.steps.size(), 6u);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_FALSE(rep.steps[i].skipped);
        EXPECT_LT(rep.steps[i].distance_sup, 1e-12);
    }
    EXPECT_TRUE(rep.steps[5].skipped);  // t = 0.99 is past the last snapshot
    EXPECT_FALSE(rep.steps[5].skip_reason.empty());
    std::vector<double> unordered{0.5, 1.0};
    EXPECT_THROW(convergence_report(tr, d, unordered), DomainError);
}

TEST(Convergence, MonotoneFlag) {
    // A perturbation that decays in rescaled variables: h = phi + eps(t) psi.
    Trajectory tr;
    const auto params = make_soliton_params(5);
    for (double t : {0.0, 0.5, 0.75, 0.875}) {
        auto p = soliton_profile(params, 1.0, t, uniform_radii(8.0, 800));
        for (std::size_t j = 1; j < p.size(); ++j) p.h[j] += 0.01 * (1.0 - t) * std::exp(-p.radii[j] * p.radii[j]);
        tr.snapshots.push_back({t, p});
    }
    BlowupDiagnosis d;
    d.T_hat = 1.0;
    std::vector<double> lambdas{1.0, std::sqrt(0.5), 0.5};
    const auto rep = convergence_report(tr, d, lambdas, 8.0);
    EXPECT_TRUE(rep.monotone);
}

TEST(RapidForming, SeriesAndConstant) {
    Trajectory tr;
    for (int k = 0; k < 10; ++k) tr.records.push_back({0.1 * k, 0.0, 2.0 / (1.0 - 0.1 * k), 0.0, 0.0, 0.0, 0.0});
    const auto s = rapid_forming_series(tr, 1.0);
    ASSERT_EQ(s.size(), 10u);
    for (const auto& p : s) EXPECT_NEAR(p.value, 2.0, 1e-12);
    EXPECT_NEAR(rapid_forming_constant(s), 2.0, 1e-12);
    EXPECT_THROW(rapid_forming_series(tr, 0.9), TimeOrderError);
}

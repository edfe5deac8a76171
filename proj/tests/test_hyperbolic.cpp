#include <gtest/gtest.h>

#include <cmath>

#include "hypsol/hyperbolic.hpp"
#include "hypsol/profiles.hpp"
#include "hypsol/surface.hpp"
#include "hypsol/verify.hpp"
#include "support.hpp"

using namespace hypsol;

namespace {

SurfaceSample sample(HPoint p, std::array<double, 3> n, double H) { return SurfaceSample::make(p, n, H); }

std::array<double, 3> random_unit(test::Gen& g) {
    const double th = g.uniform(0.0, 2.0 * M_PI), c = g.uniform(-1.0, 1.0);
    const double s = std::sqrt(1.0 - c * c);
    return {s * std::cos(th), s * std::sin(th), c};
}

}  // namespace

TEST(HPoint, RejectsNonPositiveHeight) {
    EXPECT_THROW(HPoint(0, 0, 0), DomainError);
    EXPECT_THROW(HPoint(0, 0, -1), DomainError);
    EXPECT_THROW(HPoint(NAN, 0, 1), DomainError);
    EXPECT_NO_THROW(HPoint(0, 0, 1e-300));
}

TEST(HyperbolicInner, Examples) {
    const HPoint p1(0, 0, 1), p2(3, -1, 2);
    EXPECT_DOUBLE_EQ(hyperbolic_inner({p1, 1, 0, 0}, {p1, 1, 0, 0}), 1.0);
    EXPECT_DOUBLE_EQ(hyperbolic_inner({p2, 1, 0, 0}, {p2, 1, 0, 0}), 0.25);
    EXPECT_EQ(hyperbolic_inner({p2, 1, 0, 0}, {p2, 0, 1, 0}), 0.0);
}

TEST(HyperbolicInner, MismatchedBaseIsContractViolation) {
    EXPECT_THROW(hyperbolic_inner({HPoint(0, 0, 1), 1, 0, 0}, {HPoint(0, 0, 2), 1, 0, 0}),
                 ContractViolation);
}

TEST(LiftNormal, Examples) {
    const auto a = lift_normal(sample(HPoint(0, 0, 2), {0, 0, 1}, 0));
    EXPECT_EQ(a.components(), (std::array<double, 3>{0, 0, 2}));
    EXPECT_DOUBLE_EQ(hyperbolic_inner(a, a), 1.0);
    const auto b = lift_normal(sample(HPoint(1, 1, 0.5), {1, 0, 0}, 0));
    EXPECT_EQ(b.components(), (std::array<double, 3>{0.5, 0, 0}));
}

TEST(SurfaceSample, RejectsNonUnitNormal) {
    EXPECT_THROW(sample(HPoint(0, 0, 1), {0, 0, 1.001}, 0), ContractViolation);
    EXPECT_THROW(sample(HPoint(0, 0, 1), {0, 0, 1}, NAN), DomainError);
}

TEST(LiftMeanCurvature, Examples) {
    EXPECT_DOUBLE_EQ(lift_mean_curvature(sample(HPoint(2, 3, 7), {0, 0, 1}, 0)), 1.0);
    EXPECT_DOUBLE_EQ(lift_mean_curvature(sample(HPoint(2, 3, 7), {1, 0, 0}, 0)), 0.0);
    const double n1 = std::sqrt(1.0 - 0.09);
    EXPECT_NEAR(lift_mean_curvature(sample(HPoint(0, 0, 2), {n1, 0, -0.3}, 0.5)), 0.7, 1e-15);
}

TEST(KillingEval, Examples) {
    EXPECT_EQ(killing_eval(killing::HyperbolicTranslation{}, HPoint(1, 2, 3)).components(),
              (std::array<double, 3>{1, 2, 3}));
    EXPECT_EQ(killing_eval(killing::Rotation{}, HPoint(1, 0, 5)).components(),
              (std::array<double, 3>{0, 1, 0}));
    EXPECT_EQ(killing_eval(scaled_down_translation(2), HPoint(1, 0, 1)).components(),
              (std::array<double, 3>{-2, 0, -2}));
    EXPECT_THROW(scaled_down_translation(0), DomainError);
    EXPECT_THROW(scaled_down_translation(-1), DomainError);
}

TEST(KillingEval, Names) {
    EXPECT_EQ(killing_name(killing::HyperbolicTranslation{}), "translate");
    EXPECT_EQ(killing_name(killing::Rotation{}), "rotate");
    EXPECT_EQ(killing_name(scaled_down_translation(2)).rfind("scaled:", 0), 0u);
}

TEST(SolitonResidual, Examples) {
    const auto horo = sample(HPoint(0.3, -2, 1.7), {0, 0, 1}, 0);
    EXPECT_EQ(soliton_residual(horo, killing::HyperbolicTranslation{}), 0.0);
    EXPECT_DOUBLE_EQ(soliton_residual(horo, killing::Rotation{}), 1.0);
    // vertical plane through the z-axis containing (0, 0, 1)
    const auto plane = sample(HPoint(0, 0, 1), {0, 1, 0}, 0);
    EXPECT_EQ(soliton_residual(plane, killing::HyperbolicTranslation{}), 0.0);
}

TEST(HyperbolicProperties, LiftedNormalIsUnit) {
    test::Gen g(11);
    for (int i = 0; i < 2000; ++i) {
        const HPoint p(g.uniform(-10, 10), g.uniform(-10, 10), g.log_uniform(1e-3, 1e3));
        const auto eta = lift_normal(sample(p, random_unit(g), g.uniform(-5, 5)));
        ASSERT_NEAR(hyperbolic_inner(eta, eta), 1.0, 1e-10) << "seed " << g.seed() << " case " << i;
    }
}

TEST(HyperbolicProperties, OrientationFlipNegatesMeanCurvature) {
    test::Gen g(12);
    for (int i = 0; i < 2000; ++i) {
        const HPoint p(g.uniform(-10, 10), g.uniform(-10, 10), g.log_uniform(1e-3, 1e3));
        const auto s = sample(p, random_unit(g), g.uniform(-5, 5));
        ASSERT_EQ(lift_mean_curvature(s.flipped()), -lift_mean_curvature(s)) << "case " << i;
        ASSERT_EQ(std::abs(soliton_residual(s.flipped(), killing::Rotation{})),
                  std::abs(soliton_residual(s, killing::Rotation{})));
    }
}

// Gamma_t(p) = e^t p maps a translator to itself; the residual of the scaled
// sample (H_bar scales by e^{-t}) must match.
TEST(HyperbolicProperties, TranslationResidualIsScaleEquivariant) {
    const auto surf = catenoid_surface(solve_catenoid(1.0));
    test::Gen g(13);
    for (int i = 0; i < 200; ++i) {
        const double u = g.uniform(0.0, 2.0 * M_PI);
        const double v = g.uniform(surf.v0 + 0.01, surf.v1 - 0.01);
        const auto s = fd_mean_curvature(surf, u, v);
        const double t = g.uniform(-3.0, 3.0), e = std::exp(t);
        const auto n = s.unit_euclidean_normal.components();
        const auto scaled = SurfaceSample::make(HPoint(e * s.point.x, e * s.point.y, e * s.point.z), n,
                                                s.euclidean_mean_curvature / e);
        ASSERT_NEAR(soliton_residual(scaled, killing::HyperbolicTranslation{}),
                    soliton_residual(s, killing::HyperbolicTranslation{}), 1e-8)
            << "u=" << u << " v=" << v << " t=" << t;
    }
}

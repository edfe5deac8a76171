#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hypsol/rotator.hpp"
#include "support.hpp"

using namespace hypsol;

namespace {

int sign_changes(const std::vector<double>& v) {
    int n = 0, last = 0;
    for (double x : v) {
        const int s = (x > 0) - (x < 0);
        if (s == 0) continue;
        if (last != 0 && s != last) ++n;
        last = s;
    }
    return n;
}

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

const std::vector<double> kPitches{0.5, 1.0, 2.0};
const std::vector<double> kMu0{0.5, 1.0, 2.0};

}  // namespace

TEST(CurvatureK, Examples) {
    EXPECT_EQ(curvature_k(0, 0, 1), 0.0);
    EXPECT_DOUBLE_EQ(curvature_k(0, 1, 1), 1.0);
    EXPECT_DOUBLE_EQ(curvature_k(1, 0, 1), 3.0);
    EXPECT_THROW(curvature_k(0, 1, 0), DomainError);
    EXPECT_THROW(curvature_k(0, 1, -1), DomainError);
}

TEST(SystemRhs, Examples) {
    const auto a = system_rhs(0, 1, 1);
    EXPECT_DOUBLE_EQ(a[0], 2.0);
    EXPECT_EQ(a[1], 0.0);
    const auto b = system_rhs(1, 0, 1);
    EXPECT_DOUBLE_EQ(b[0], 1.0);
    EXPECT_DOUBLE_EQ(b[1], -3.0);
    EXPECT_THROW(system_rhs(1, 0, 0), DomainError);
}

TEST(SystemRhs, FactoredMatchesExpanded) {
    test::Gen g(41);
    for (int i = 0; i < 20000; ++i) {
        const double h = g.log_uniform(0.05, 20), tau = g.uniform(-50, 50), mu = g.uniform(-50, 50);
        const auto f = system_rhs(tau, mu, h);
        const auto e = system_rhs_expanded(tau, mu, h);
        const double scale = std::max({1.0, std::abs(f[0]), std::abs(f[1])});
        ASSERT_NEAR(f[0], e[0], 1e-12 * scale) << h << ' ' << tau << ' ' << mu;
        ASSERT_NEAR(f[1], e[1], 1e-12 * scale) << h << ' ' << tau << ' ' << mu;
    }
}

// tau' on the tau = 0 section by substitution:
// [h^2 (mu^2 + 1) + 2 h^2 (1 + mu^2) mu^2] / [(h^2 + 1) mu^2 + h^2]
TEST(SystemRhs, TauSectionIsTransversal) {
    test::Gen g(42);
    for (int i = 0; i < 5000; ++i) {
        const double h = g.log_uniform(0.05, 20), mu = g.sign() * g.log_uniform(1e-3, 1e3);
        const double m2 = mu * mu;
        const double closed = (h * h * (m2 + 1) + 2 * h * h * (1 + m2) * m2) / ((h * h + 1) * m2 + h * h);
        const double dtau = system_rhs(0.0, mu, h)[0];
        ASSERT_NEAR(dtau, closed, 1e-12 * closed) << "h=" << h << " mu=" << mu;
        ASSERT_GT(dtau, 0.0);
    }
    EXPECT_GT(system_rhs(0.0, 0.0, 1.0)[0], 0.0);
}

TEST(SystemRhs, TauSectionAtUnitPitch) {
    // at h = 1 the numerator's second term 2h(1 + mu^2)mu^2 coincides with the
    // substituted 2h^2(1 + mu^2)mu^2
    for (double mu : {-3.0, -1.0, -0.2, 0.5, 2.0}) {
        const double m2 = mu * mu;
        const double display = ((m2 + 1) + 2 * (1 + m2) * m2) / (2 * m2 + 1);
        EXPECT_NEAR(system_rhs(0.0, mu, 1.0)[0], display, 1e-14 * display);
    }
    EXPECT_NEAR(system_rhs(0.0, 1.0, 2.0)[0], 8.0 / 3.0, 1e-14);
}

TEST(PhasePortrait, NoEquilibriaAndNormalised) {
    for (double h : {0.1, 0.5, 1.0, 2.0, 10.0}) {
        const auto arrows = phase_portrait(h);
        ASSERT_EQ(arrows.size(), 101u * 101u);
        for (const auto& a : arrows) ASSERT_NEAR(std::hypot(a.dtau, a.dmu), 1.0, 1e-14);
    }
    const auto arrows = phase_portrait(1.0);
    bool saw01 = false, saw00 = false;
    for (const auto& a : arrows) {
        if (a.tau == 0.0 && a.mu == 1.0) {
            saw01 = true;
            EXPECT_DOUBLE_EQ(a.dtau, 1.0);
            EXPECT_EQ(a.dmu, 0.0);
        }
        if (a.tau == 0.0 && a.mu == 0.0) {
            saw00 = true;
            EXPECT_EQ(a.dtau, 1.0);
            EXPECT_EQ(a.dmu, 0.0);
        }
    }
    EXPECT_TRUE(saw01);
    EXPECT_TRUE(saw00);
    EXPECT_THROW(phase_portrait(1.0, 1), DomainError);
    EXPECT_THROW(phase_portrait(0.0), DomainError);
}

TEST(PhasePortrait, RandomStatesNeverStationary) {
    test::Gen g(43);
    for (int i = 0; i < 20000; ++i) {
        const double h = g.log_uniform(0.05, 20), tau = g.uniform(-10, 10), mu = g.uniform(-10, 10);
        const auto v = system_rhs(tau, mu, h);
        ASSERT_GT(std::hypot(v[0], v[1]), 0.0);
    }
}

TEST(HelicoidMeanCurvature, Examples) {
    EXPECT_EQ(helicoid_mean_curvature(0, 0, 0, 1), 0.0);
    EXPECT_NEAR(helicoid_mean_curvature(RotatorState{0, 0, 1}, 1.0), 0.0, 1e-15);
    EXPECT_EQ(rotator_target_H(0, 1, 1), 0.0);
    EXPECT_DOUBLE_EQ(rotator_target_H(1, 0, 1), 1.0 / std::sqrt(2.0));
    EXPECT_THROW(rotator_target_H(1, 0, 0), DomainError);
}

TEST(HelicoidMeanCurvature, RotatorCurvatureGivesTargetH) {
    test::Gen g(44);
    for (int i = 0; i < 20000; ++i) {
        const double h = g.log_uniform(0.05, 20), tau = g.uniform(-30, 30), mu = g.uniform(-30, 30);
        const double H = helicoid_mean_curvature(RotatorState{0, tau, mu}, h);
        const double target = rotator_target_H(tau, mu, h);
        ASSERT_NEAR(H, target, 1e-9 * std::max(1.0, std::abs(target)));
        if (tau != 0.0) {
            ASSERT_EQ(std::signbit(target), std::signbit(tau));
        }
    }
}

TEST(EquivalenceResidual, VanishesForEveryState) {
    test::Gen g(45);
    for (double h : kPitches)
        for (int i = 0; i < 5000; ++i) {
            const double tau = g.uniform(-50, 50), mu = g.uniform(-50, 50);
            ASSERT_NEAR(rotator_translator_equivalence_residual(tau, mu, h), 0.0, 1e-12);
        }
}

TEST(IntegrateRotator, Preconditions) {
    EXPECT_THROW(integrate_rotator(0.0, 0, -1, 10), DomainError);
    EXPECT_THROW(integrate_rotator(1.0, NAN, -1, 10), DomainError);
    EXPECT_THROW(integrate_rotator(1.0, 0, -1, 0), DomainError);
    EXPECT_THROW(integrate_rotator(1.0, 0, 0, 10), ConstructionError);
}

TEST(IntegrateRotator, UnitPitchReferenceRun) {
    const auto c = integrate_rotator(1.0, 0.0, -1.0, 50.0);
    ASSERT_EQ(c.tau_zeros.size(), 1u);
    EXPECT_LT(std::abs(c.tau_zero), 1e-12);
    EXPECT_EQ(c.phase_trajectory.t_front(), -50.0);
    EXPECT_EQ(c.phase_trajectory.t_back(), 50.0);
    const auto& pol = c.polar_trajectory;
    for (std::size_t i = 0; i < pol.size(); ++i) {
        const double r = pol.y(i, 0), tau = pol.y(i, 2);
        ASSERT_GT(r, 0.0);
        ASSERT_NEAR(2.0 * r * pol.dy(i, 0), 2.0 * tau, 1e-8);
        ASSERT_GE(r, 1.0 - 1e-12);
    }
}

// Qualitative checks over the standard family: tau-zero, r^2 identity, k
// sign pattern, eventual signs, polar vs Frenet.
TEST(IntegrateRotator, StandardFamily) {
    for (double h : kPitches)
        for (double mu0 : kMu0) {
            SCOPED_TRACE("h=" + std::to_string(h) + " mu0=" + std::to_string(mu0));
            const auto c = integrate_rotator(h, 0.0, -mu0, 50.0);
            ASSERT_EQ(c.tau_zeros.size(), 1u);
            EXPECT_LT(std::abs(c.tau_zero), 1e-12);

            const auto& pol = c.polar_trajectory;
            double worst = 0;
            for (std::size_t i = 0; i < pol.size(); ++i) {
                const double r = pol.y(i, 0);
                // d/ds r^2 from the stored derivative of r; the tau column
                // is co-integrated at the same node
                worst = std::max(worst, std::abs(2.0 * r * pol.dy(i, 0) - 2.0 * pol.y(i, 2)));
                const double r2 = pol.y(i, 2) * pol.y(i, 2) + pol.y(i, 3) * pol.y(i, 3);
                ASSERT_NEAR(r * r, r2, 1e-8 * std::max(1.0, r2));
            }
            EXPECT_LT(worst, 1e-8);

            const auto& ph = c.phase_trajectory;
            std::vector<double> ks;
            double first_nonzero = 0, last_nonzero = 0;
            for (std::size_t i = 0; i < ph.size(); ++i) {
                const double k = curvature_k(ph.y(i, 0), ph.y(i, 1), h);
                ks.push_back(k);
                if (k != 0 && first_nonzero == 0) first_nonzero = k;
                if (k != 0) last_nonzero = k;
            }
            EXPECT_LE(sign_changes(ks), 1);
            if (sign_changes(ks) == 1) {
                EXPECT_LT(first_nonzero, 0.0);
                EXPECT_GT(last_nonzero, 0.0);
            }

            const auto end = ph.eval(50.0), start = ph.eval(-50.0);
            EXPECT_GT(end[0], 0.0);
            EXPECT_LT(end[1], 0.0);
            EXPECT_LT(start[0], 0.0);
            EXPECT_GT(start[1], 0.0);

            // phase and polar runs carry the same (tau, mu)
            for (std::size_t i = 0; i < pol.size(); i += 7) {
                const auto y = ph.eval(pol.t(i));
                ASSERT_LT(rel_gap(pol.y(i, 2), y[0]), 1e-7);
                ASSERT_LT(rel_gap(pol.y(i, 3), y[1]), 1e-7);
            }

            double gap = 0;
            const auto& fr = c.frenet_trajectory;
            for (std::size_t i = 0; i < fr.size(); ++i) {
                const auto p = c.polar_point(fr.t(i));
                gap = std::max(gap, std::hypot(p[0] - fr.y(i, 0), p[1] - fr.y(i, 1)));
            }
            EXPECT_LT(gap, 1e-6);
        }
}

TEST(IntegrateRotator, MeanCurvatureOnCurveMatchesTarget) {
    const auto c = integrate_rotator(2.0, 0.0, -1.0, 50.0);
    const auto& ph = c.phase_trajectory;
    for (std::size_t i = 0; i < ph.size(); ++i) {
        const auto st = c.state(ph.t(i));
        ASSERT_NEAR(helicoid_mean_curvature(st, 2.0), rotator_target_H(st, 2.0), 1e-9);
    }
}

// (tau, mu)(s) solves the system iff (-tau(-s), -mu(-s)) does.
TEST(IntegrateRotator, Antisymmetry) {
    for (double h : kPitches)
        for (double mu0 : kMu0) {
            const auto a = integrate_rotator(h, 0.0, -mu0, 50.0);
            const auto b = integrate_rotator(h, 0.0, mu0, 50.0);
            const auto& pa = a.phase_trajectory;
            for (std::size_t i = 0; i < pa.size(); i += 3) {
                const double s = pa.t(i);
                const auto yb = b.phase_trajectory.eval(-s);
                ASSERT_NEAR(pa.y(i, 0), -yb[0], 1e-8 * std::max(1.0, std::abs(yb[0])))
                    << "h=" << h << " mu0=" << mu0 << " s=" << s;
                ASSERT_NEAR(pa.y(i, 1), -yb[1], 1e-8 * std::max(1.0, std::abs(yb[1])))
                    << "h=" << h << " mu0=" << mu0 << " s=" << s;
            }
        }
}

TEST(IntegrateRotator, OffSectionStartStillHasOneTauZero) {
    // tau0 < 0 crossing to tau > 0
    const auto c = integrate_rotator(1.0, -0.7, -1.2, 50.0);
    ASSERT_EQ(c.tau_zeros.size(), 1u);
    EXPECT_GT(c.tau_zero, 0.0);
    EXPECT_NEAR(c.state(c.tau_zero).tau, 0.0, 1e-10);
    // r is smallest at the tau-zero
    const double r0 = c.polar_trajectory.eval(c.tau_zero, 0);
    for (std::size_t i = 0; i < c.polar_trajectory.size(); ++i)
        ASSERT_GE(c.polar_trajectory.y(i, 0), r0 * (1 - 1e-12));
}

TEST(IntegrateRotator, MatchesIndependentOracle) {
    struct Row {
        double h, mu0, s, r, omega, tau, mu;
    };
    // tests/oracles/profile_oracle.py
    const Row rows[] = {
        {0.5, 0.5, 50, 17.2237293778, 9.1642293779, 5.4742967472, -16.3306132403},
        {0.5, 0.5, -50, 17.6030740655, 6.4910767783, -5.5936538688, 16.6906936031},
        {0.5, 2, 50, 18.0890103605, 6.5379772131, 5.7465864359, -17.1519398365},
        {0.5, 2, -50, 18.8973955538, 5.3758036555, -6.0010839979, 17.9192229064},
        {1, 1, 50, 23.8222047060, 6.0520678505, 10.6723993149, -21.2978245348},
        {1, 1, -50, 24.3006997821, 4.6367432959, -10.8860184378, 21.7259893324},
        {1, 2, 50, 24.6003796379, 4.9485497440, 11.0198147275, -21.9941438047},
        {2, 0.5, 50, 28.7960033301, 5.5597025479, 15.9875996790, -23.9500827616},
        {2, 0.5, -50, 29.0472413078, 3.6623766275, -16.1268363809, 24.1592089262},
        {2, 2, 50, 29.9195577828, 4.0116014250, 16.6102926224, -24.8852992129},
        {2, 2, -50, 30.4346834872, 3.3278942047, -16.8957974411, 25.3140669944},
    };
    for (const auto& row : rows) {
        SCOPED_TRACE("h=" + std::to_string(row.h) + " mu0=" + std::to_string(row.mu0) +
                     " s=" + std::to_string(row.s));
        const auto c = integrate_rotator(row.h, 0.0, -row.mu0, 50.0);
        const auto y = c.polar_trajectory.eval(row.s);
        EXPECT_NEAR(y[0], row.r, 1e-7 * row.r);
        EXPECT_NEAR(y[1], row.omega, 1e-7 * row.omega);
        EXPECT_NEAR(y[2], row.tau, 1e-7 * std::abs(row.tau));
        EXPECT_NEAR(y[3], row.mu, 1e-7 * std::abs(row.mu));
    }
}

TEST(OmegaSpan, AgreesWithStoredRun) {
    const auto c = integrate_rotator(1.0, 0.0, -1.0, 50.0);
    for (double s_end : {50.0, -50.0}) {
        const auto arm = omega_span(1.0, 0.0, 0.0, -1.0, s_end);
        EXPECT_EQ(arm.stop_reason.kind, ode::StopKind::max_time);
        EXPECT_EQ(arm.s_end, s_end);
        const auto y = c.polar_trajectory.eval(s_end);
        EXPECT_NEAR(arm.omega, y[1], 1e-9 * std::abs(y[1]));
        EXPECT_NEAR(arm.r, y[0], 1e-9 * y[0]);
        EXPECT_GT(arm.steps, 0);
    }
    EXPECT_THROW(omega_span(1.0, 0.0, 0.0, 0.0, 10.0), ConstructionError);
}

TEST(OmegaSpan, GrowsPastTwoTurnsOnShortArms) {
    // the cheapest recorded arms
    const auto fwd = omega_span(0.5, 0.0, 0.0, -0.5, 169.0);
    const auto bwd = omega_span(0.5, 0.0, 0.0, -0.5, -426.0);
    EXPECT_GT(std::abs(fwd.omega), 4.0 * M_PI);
    EXPECT_GT(std::abs(bwd.omega), 4.0 * M_PI);
    const auto early = omega_span(0.5, 0.0, 0.0, -0.5, 50.0);
    EXPECT_LT(std::abs(early.omega), 4.0 * M_PI);
}

TEST(RotatorCsv, Layout) {
    const auto c = integrate_rotator(1.0, 0.0, -1.0, 5.0);
    std::ostringstream os;
    write_rotator_csv(os, c);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "s,tau,mu,r,omega,k,H,x,y");
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        ASSERT_EQ(std::count(line.begin(), line.end(), ','), 8);
    }
    EXPECT_EQ(rows, c.phase_trajectory.size());

    std::ostringstream rs;
    write_reconstruction_csv(rs, c);
    EXPECT_EQ(rs.str().substr(0, rs.str().find('\n')), "s,polar_x,polar_y,frenet_x,frenet_y");

    std::ostringstream ps;
    write_phase_csv(ps, phase_portrait(1.0, 3));
    const std::string phase = ps.str();
    EXPECT_EQ(phase.substr(0, phase.find('\n')), "tau,mu,dtau,dmu");
    EXPECT_EQ(std::count(phase.begin(), phase.end(), '\n'), 10);
}

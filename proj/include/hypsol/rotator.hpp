#pragma once

// Helicoidal rotators: the planar system for (tau, mu) = (<alpha,T>, <alpha,N>)
// of the generating curve alpha, its reconstruction in polar and Frenet form,
// and the helicoidal curvature formulas.

#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <vector>

#include "hypsol/config.hpp"
#include "hypsol/error.hpp"
#include "hypsol/ode.hpp"
#include "hypsol/profiles.hpp"

namespace hypsol {

struct HelicoidalParams {
    double h = 1.0;

    explicit HelicoidalParams(double pitch) : h(pitch) {
        if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("helicoid pitch h must be positive");
    }
};

struct RotatorState {
    double s = 0.0;
    double tau = 0.0;
    double mu = 0.0;

    double r2() const { return tau * tau + mu * mu; }
};

namespace detail {
inline void check_pitch(double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("helicoid pitch h must be positive");
}
}  // namespace detail

// Curvature of a generating curve whose helicoid is a rotator.
inline double curvature_k(double tau, double mu, double h) {
    detail::check_pitch(h);
    const double a = tau + h * mu;
    const double r2 = tau * tau + mu * mu;
    const double num = 2.0 * (h * h + a * a) * ((h + 1.0) * tau + h * mu) + h * (h * tau - mu);
    return num / (h * ((h * h + 1.0) * r2 + h * h));
}

// (tau', mu') = (1 + k mu, -k tau)
inline std::array<double, 2> system_rhs(double tau, double mu, double h) {
    const double k = curvature_k(tau, mu, h);
    return {1.0 + k * mu, -k * tau};
}

inline std::array<double, 2> system_rhs(const RotatorState& st, double h) {
    return system_rhs(st.tau, st.mu, h);
}

// The same system with k substituted and multiplied out over the common
// denominator h((h^2+1) r^2 + h^2).
inline std::array<double, 2> system_rhs_expanded(double tau, double mu, double h) {
    detail::check_pitch(h);
    const double a = tau + h * mu;
    const double r2 = tau * tau + mu * mu;
    const double den = h * ((h * h + 1.0) * r2 + h * h);
    const double c = 2.0 * (h * h + a * a);
    const double dtau =
        1.0 + (c * ((h + 1.0) * tau * mu + h * mu * mu) + h * h * tau * mu - h * mu * mu) / den;
    const double dmu =
        -(c * ((h + 1.0) * tau * tau + h * tau * mu) + h * h * tau * tau - h * tau * mu) / den;
    return {dtau, dmu};
}

// rho = h (h^2 + (tau + h mu)^2)^{-1/2}
inline double helicoid_rho(double tau, double mu, double h) {
    const double a = tau + h * mu;
    return h / std::sqrt(h * h + a * a);
}

// Hyperbolic mean curvature of the helicoid of pitch h at a point of the
// generating curve with data (tau, mu) and curvature k.
inline double helicoid_mean_curvature(double tau, double mu, double k, double h) {
    detail::check_pitch(h);
    const double a = tau + h * mu;
    const double r2 = tau * tau + mu * mu;
    const double q = h * h + a * a;
    const double rho = h / std::sqrt(q);
    return rho / h *
           (h * (k * ((h * h + 1.0) * r2 + h * h) - (h * tau - mu)) / (2.0 * q) - a);
}

inline double helicoid_mean_curvature(const RotatorState& st, double h) {
    return helicoid_mean_curvature(st.tau, st.mu, curvature_k(st.tau, st.mu, h), h);
}

// H = h tau / sqrt(h^2 + (h mu + tau)^2)
inline double rotator_target_H(double tau, double mu, double h) {
    detail::check_pitch(h);
    const double a = h * mu + tau;
    return h * tau / std::sqrt(h * h + a * a);
}

inline double rotator_target_H(const RotatorState& st, double h) {
    return rotator_target_H(st.tau, st.mu, h);
}

// <J pi(X), eta> - <-h X, eta> from the closed forms of both inner products
// in the Frenet frame (T, N) of alpha; identically zero.
inline double rotator_translator_equivalence_residual(double tau, double mu, double h) {
    detail::check_pitch(h);
    const double rho = helicoid_rho(tau, mu, h);
    // alpha = tau T + mu N and J alpha = tau N - mu T; eta_bar's horizontal
    // part is rho N.
    const double rotation = rho * tau;  // <J alpha, rho N>
    const double scaled = -h * rho * (mu - (tau + h * mu) / h);
    return rotation - scaled;
}

inline double rotator_translator_equivalence_residual(const RotatorState& st, double h) {
    return rotator_translator_equivalence_residual(st.tau, st.mu, h);
}

struct RotatorCurve {
    HelicoidalParams params{1.0};
    double S = 0.0;
    // t = s, state (tau, mu)
    ode::Trajectory phase_trajectory;
    // t = s, state (r, omega, tau, mu); (tau, mu) are carried along so that
    // the reconstruction does not depend on interpolating the phase run.
    ode::Trajectory polar_trajectory;
    // t = s, state (x, y, psi, tau, mu)
    ode::Trajectory frenet_trajectory;
    std::vector<double> tau_zeros;
    double tau_zero = 0.0;

    double h() const { return params.h; }

    RotatorState state(double s) const {
        const auto y = phase_trajectory.eval(s);
        return {s, y[0], y[1]};
    }

    // alpha(s) from the polar reconstruction.
    std::array<double, 2> polar_point(double s) const {
        const auto y = polar_trajectory.eval(s);
        return {y[0] * std::cos(y[1]), y[0] * std::sin(y[1])};
    }
    std::array<double, 2> frenet_point(double s) const {
        const auto y = frenet_trajectory.eval(s);
        return {y[0], y[1]};
    }
    double omega(double s) const { return polar_trajectory.eval(s, 1); }
};

namespace detail {

inline ode::Rhs rotator_phase_rhs(double h) {
    return [h](double, std::span<const double> y, std::span<double> d) {
        const auto v = system_rhs(y[0], y[1], h);
        d[0] = v[0];
        d[1] = v[1];
    };
}

// (r, omega, tau, mu): r' = tau/r, omega' = -mu/r^2.
inline ode::Rhs rotator_polar_rhs(double h) {
    return [h](double, std::span<const double> y, std::span<double> d) {
        if (!(y[0] > 0.0)) throw DomainError("polar reconstruction: r vanished");
        const auto v = system_rhs(y[2], y[3], h);
        d[0] = y[2] / y[0];
        d[1] = -y[3] / (y[0] * y[0]);
        d[2] = v[0];
        d[3] = v[1];
    };
}

// (x, y, psi, tau, mu): x' = cos psi, y' = sin psi, psi' = k.
inline ode::Rhs rotator_frenet_rhs(double h) {
    return [h](double, std::span<const double> y, std::span<double> d) {
        const double k = curvature_k(y[3], y[4], h);
        d[0] = std::cos(y[2]);
        d[1] = std::sin(y[2]);
        d[2] = k;
        d[3] = 1.0 + k * y[4];
        d[4] = -k * y[3];
    };
}

inline ode::Trajectory integrate_both_ways(const ode::Rhs& rhs, std::size_t dim, double s0,
                                           const ode::State& y0, double s_lo, double s_hi,
                                           const ode::IntegrationConfig& c, const char* what) {
    auto check = [&](const ode::Trajectory& tr, double target) {
        if (tr.stop_reason.kind != ode::StopKind::max_time || tr.t_back() != target)
            throw ConstructionError(std::string("integrate_rotator: ") + what +
                                    " run stopped at s=" + std::to_string(tr.t_back()) + " (" +
                                    tr.stop_reason.to_string() + ")");
    };
    ode::Trajectory fwd, bwd;
    if (s_hi > s0) {
        fwd = ode::integrate({dim, rhs, s0, y0, ode::Direction::forward}, c, s_hi);
        check(fwd, s_hi);
    } else {
        fwd = ode::integrate({dim, rhs, s0, y0, ode::Direction::forward}, c, s0);
    }
    if (s_lo < s0) {
        bwd = ode::integrate({dim, rhs, s0, y0, ode::Direction::backward}, c, s_lo);
        check(bwd, s_lo);
    } else {
        bwd = ode::integrate({dim, rhs, s0, y0, ode::Direction::backward}, c, s0);
    }
    return ode::Trajectory::join(bwd, fwd);
}

}  // namespace detail

// Integrates the rotator system from (tau0, mu0) at s = 0 over [-S, S],
// locates the tau-zero, and reconstructs alpha from it outward: polar form
// with alpha(tau_zero) = (|mu|, 0), omega = 0, and Frenet form from the same
// point and tangent.
inline RotatorCurve integrate_rotator(double h, double tau0, double mu0, double S,
                                      const Tolerances& tol = {}) {
    detail::check_pitch(h);
    if (!std::isfinite(tau0) || !std::isfinite(mu0))
        throw DomainError("integrate_rotator: non-finite initial state");
    if (!(S > 0.0) || !std::isfinite(S)) throw DomainError("integrate_rotator: S must be positive");
    if (tau0 == 0.0 && mu0 == 0.0)
        throw ConstructionError("integrate_rotator: initial point is the origin");

    RotatorCurve out;
    out.params = HelicoidalParams(h);
    out.S = S;
    const auto c = detail::integration_config(tol);
    out.phase_trajectory = detail::integrate_both_ways(detail::rotator_phase_rhs(h), 2, 0.0,
                                                       {tau0, mu0}, -S, S, c, "phase");
    const auto& ph = out.phase_trajectory;
    for (std::size_t i = 0; i < ph.size(); ++i)
        if (ph.y(i, 0) * ph.y(i, 0) + ph.y(i, 1) * ph.y(i, 1) == 0.0)
            throw ConstructionError("integrate_rotator: alpha passes through the origin at s=" +
                                    std::to_string(ph.t(i)));

    out.tau_zeros = ode::locate_zero(ph, 0, tol.event_time_tol);
    if (out.tau_zeros.empty())
        throw ConstructionError("integrate_rotator: tau has no zero on [-S, S]; increase S");
    out.tau_zero = out.tau_zeros.front();

    const auto z = ph.eval(out.tau_zero);
    const double tau_z = z[0], mu_z = z[1];
    const double r0 = std::hypot(tau_z, mu_z);
    if (!(r0 > 0.0)) throw ConstructionError("integrate_rotator: r vanishes at the tau-zero");
    // alpha0 = (r0, 0); T = (tau/r^2) alpha - (mu/r^2) J alpha
    const double psi0 = std::atan2(-mu_z / r0, tau_z / r0);

    out.polar_trajectory = detail::integrate_both_ways(
        detail::rotator_polar_rhs(h), 4, out.tau_zero, {r0, 0.0, tau_z, mu_z}, -S, S, c, "polar");
    out.frenet_trajectory =
        detail::integrate_both_ways(detail::rotator_frenet_rhs(h), 5, out.tau_zero,
                                    {r0, 0.0, psi0, tau_z, mu_z}, -S, S, c, "Frenet");
    return out;
}

// omega(s_end) - omega(s0) along one arm, integrating (r, omega, tau, mu)
// from the rotator state at s0 without storing the path. Long arms only.
struct ArmSpan {
    double s_end = 0.0;
    double omega = 0.0;
    double r = 0.0;
    double tau = 0.0;
    double mu = 0.0;
    long steps = 0;
    ode::StopReason stop_reason;
};

inline ArmSpan omega_span(double h, double s0, double tau0, double mu0, double s_end,
                          const Tolerances& tol = {}, long max_steps = 200'000'000) {
    detail::check_pitch(h);
    const double r0 = std::hypot(tau0, mu0);
    if (!(r0 > 0.0)) throw ConstructionError("omega_span: start point is the origin");
    auto c = detail::integration_config(tol);
    c.max_steps = max_steps;
    const auto dir = s_end >= s0 ? ode::Direction::forward : ode::Direction::backward;
    auto f = ode::integrate_final({4, detail::rotator_polar_rhs(h), s0, {r0, 0.0, tau0, mu0}, dir},
                                  c, s_end);
    return {f.t, f.y[1], f.y[0], f.y[2], f.y[3], f.steps, f.stop_reason};
}

// Normalised field of the rotator system on a uniform grid over [lo, hi]^2.
struct PhaseArrow {
    double tau, mu, dtau, dmu;
};

inline std::vector<PhaseArrow> phase_portrait(double h, int grid = 101, double lo = -5.0,
                                              double hi = 5.0) {
    detail::check_pitch(h);
    if (grid < 2) throw DomainError("phase_portrait: grid must be at least 2");
    std::vector<PhaseArrow> out;
    out.reserve(static_cast<std::size_t>(grid) * grid);
    for (int i = 0; i < grid; ++i) {
        const double tau = lo + (hi - lo) * i / (grid - 1);
        for (int j = 0; j < grid; ++j) {
            const double mu = lo + (hi - lo) * j / (grid - 1);
            const auto v = system_rhs(tau, mu, h);
            const double n = std::hypot(v[0], v[1]);
            if (!(n > 0.0))
                throw ConstructionError("phase_portrait: equilibrium at (" + std::to_string(tau) +
                                        ", " + std::to_string(mu) + ")");
            out.push_back({tau, mu, v[0] / n, v[1] / n});
        }
    }
    return out;
}

inline void write_phase_csv(std::ostream& os, const std::vector<PhaseArrow>& arrows) {
    os << "tau,mu,dtau,dmu\n";
    for (const auto& a : arrows)
        os << format_double(a.tau) << ',' << format_double(a.mu) << ',' << format_double(a.dtau)
           << ',' << format_double(a.dmu) << '\n';
}

// s,tau,mu,r,omega,k,H,x,y at the phase nodes; (x, y) from the polar
// reconstruction.
inline void write_rotator_csv(std::ostream& os, const RotatorCurve& c) {
    os << "s,tau,mu,r,omega,k,H,x,y\n";
    const auto& ph = c.phase_trajectory;
    for (std::size_t i = 0; i < ph.size(); ++i) {
        const double s = ph.t(i), tau = ph.y(i, 0), mu = ph.y(i, 1);
        const auto pol = c.polar_trajectory.eval(s);
        const double k = curvature_k(tau, mu, c.h());
        os << format_double(s) << ',' << format_double(tau) << ',' << format_double(mu) << ','
           << format_double(pol[0]) << ',' << format_double(pol[1]) << ',' << format_double(k)
           << ',' << format_double(helicoid_mean_curvature(tau, mu, k, c.h())) << ','
           << format_double(pol[0] * std::cos(pol[1])) << ','
           << format_double(pol[0] * std::sin(pol[1])) << '\n';
    }
}

// Both reconstructions side by side at the Frenet nodes.
inline void write_reconstruction_csv(std::ostream& os, const RotatorCurve& c) {
    os << "s,polar_x,polar_y,frenet_x,frenet_y\n";
    const auto& fr = c.frenet_trajectory;
    for (std::size_t i = 0; i < fr.size(); ++i) {
        const auto p = c.polar_point(fr.t(i));
        os << format_double(fr.t(i)) << ',' << format_double(p[0]) << ',' << format_double(p[1])
           << ',' << format_double(fr.y(i, 0)) << ',' << format_double(fr.y(i, 1)) << '\n';
    }
}

}  // namespace hypsol

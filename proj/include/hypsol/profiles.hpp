#pragma once

// Profile curves of the rotational and parabolic translators: vertical and
// horizontal rotational graphs, the catenoid bigraph built from three charts,
// grim reapers, and the horosphere.

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "hypsol/config.hpp"
#include "hypsol/error.hpp"
#include "hypsol/io.hpp"
#include "hypsol/ode.hpp"

namespace hypsol {

// phi'' = -phi' (1 + phi'^2) (2s/phi^2 + 1/s)
inline double rhs_vertical_rotational(double s, double phi, double dphi) {
    if (!(s > 0.0)) throw DomainError("rhs_vertical_rotational: s must be positive");
    if (!(phi > 0.0)) throw DomainError("rhs_vertical_rotational: phi must be positive");
    return -dphi * (1.0 + dphi * dphi) * (2.0 * s / (phi * phi) + 1.0 / s);
}

// d'' = (1 + d'^2) (2d/z^2 + 1/d)
inline double rhs_horizontal_rotational(double z, double d, double dd) {
    if (!(z > 0.0)) throw DomainError("rhs_horizontal_rotational: z must be positive");
    if (!(d > 0.0)) throw DomainError("rhs_horizontal_rotational: d must be positive");
    return (1.0 + dd * dd) * (2.0 * d / (z * z) + 1.0 / d);
}

// f'' = -f' (1 + f'^2) 2y / f^2
inline double rhs_parabolic(double y, double f, double df) {
    if (!(f > 0.0)) throw DomainError("rhs_parabolic: f must be positive");
    return -df * (1.0 + df * df) * 2.0 * y / (f * f);
}

// 2u/v^2 + 1/u; bounded below by 2 sqrt(2)/v with equality at u = v/sqrt(2).
inline double fuv(double u, double v) { return 2.0 * u / (v * v) + 1.0 / u; }

// H - <X, eta> for the rotational vertical graph (s cos t, s sin t, phi(s)).
inline double translator_residual_rotational(double s, double phi, double dphi, double ddphi) {
    if (!(s > 0.0) || !(phi > 0.0))
        throw DomainError("translator_residual_rotational: need s > 0 and phi > 0");
    const double q = 1.0 + dphi * dphi;
    const double rho = 1.0 / std::sqrt(q);
    const double H = rho * (0.5 * phi * (ddphi / q + dphi / s) + 1.0);
    const double x_eta = rho / phi * (phi - s * dphi);
    return H - x_eta;
}

inline double translator_residual_rotational(double s, double phi, double dphi) {
    return translator_residual_rotational(s, phi, dphi, rhs_vertical_rotational(s, phi, dphi));
}

// Same residual for the horizontal graph x^2 + y^2 = d(z)^2, evaluated on the
// meridian x = 0.
inline double translator_residual_horizontal(double z, double d, double dd, double ddd) {
    if (!(z > 0.0) || !(d > 0.0))
        throw DomainError("translator_residual_horizontal: need z > 0 and d > 0");
    const double rho2 = 1.0 / (1.0 + dd * dd);
    const double rho = std::sqrt(rho2);
    const double lambda = (d * ddd - dd * dd - 1.0) / d;
    return rho * (0.5 * z * rho2 * lambda - d / z);
}

inline double translator_residual_horizontal(double z, double d, double dd) {
    return translator_residual_horizontal(z, d, dd, rhs_horizontal_rotational(z, d, dd));
}

// H - <X, eta> for the parabolic cylinder (x, y, phi(y)).
inline double translator_residual_parabolic(double y, double phi, double dphi, double ddphi) {
    if (!(phi > 0.0)) throw DomainError("translator_residual_parabolic: phi must be positive");
    const double rho = 1.0 / std::sqrt(1.0 + dphi * dphi);
    const double H = rho * (0.5 * rho * rho * phi * ddphi + 1.0);
    return H - rho * (phi - y * dphi) / phi;
}

struct Bracket {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double x) const { return lo <= x && x <= hi; }
};

namespace detail {

inline ode::IntegrationConfig integration_config(const Tolerances& tol) {
    ode::IntegrationConfig c;
    c.rel_tol = tol.rel_tol;
    c.abs_tol = tol.abs_tol;
    c.event_tol = tol.event_time_tol;
    return c;
}

// Stops once |y[1]| (the slope) falls below the asymptote threshold.
inline ode::Event flat_slope_event(double threshold) {
    return {"asymptote",
            [threshold](double, std::span<const double> y) { return std::abs(y[1]) - threshold; }};
}

inline ode::Rhs vertical_rhs() {
    return [](double s, std::span<const double> y, std::span<double> d) {
        d[0] = y[1];
        d[1] = rhs_vertical_rotational(s, y[0], y[1]);
    };
}

}  // namespace detail

// Solution of phi'' = rhs_vertical_rotational with phi(s0) = z0,
// phi'(s0) = lambda, integrated forward to s_end (or until the slope is flat).
// State is (phi, phi').
inline ode::Trajectory solve_vertical_ivp(double s0, double z0, double lambda, double s_end,
                                          const Tolerances& tol = {}) {
    if (!(s0 > 0.0) || !(z0 > 0.0)) throw DomainError("solve_vertical_ivp: need s0, z0 > 0");
    if (!std::isfinite(lambda)) throw DomainError("solve_vertical_ivp: non-finite slope");
    if (!(s_end > s0)) throw ContractViolation("solve_vertical_ivp: s_end must exceed s0");
    ode::OdeProblem p{2, detail::vertical_rhs(), s0, {z0, lambda}, ode::Direction::forward};
    auto c = detail::integration_config(tol);
    if (lambda != 0.0) c.stop_events.push_back(detail::flat_slope_event(tol.asymptote_slope));
    return ode::integrate(p, c, s_end);
}

// [lo, hi] containing lim phi(s) for a monotone vertical-chart trajectory with
// state (phi, phi') and t = s increasing. Increasing concave charts bound r+,
// decreasing convex charts bound r-.
inline Bracket bracket_asymptote(const ode::Trajectory& chart) {
    if (chart.empty()) throw ContractViolation("bracket_asymptote: empty chart");
    if (chart.dimension() != 2) throw ContractViolation("bracket_asymptote: expected (phi, phi')");
    if (!chart.increasing()) throw ContractViolation("bracket_asymptote: abscissa must increase");
    bool up = true, down = true;
    for (std::size_t i = 0; i < chart.size(); ++i) {
        const double slope = chart.y(i, 1);
        if (slope < 0.0) up = false;
        if (slope > 0.0) down = false;
        if (i > 0) {
            const double step = chart.y(i, 0) - chart.y(i - 1, 0);
            if (step < 0.0) up = false;
            if (step > 0.0) down = false;
        }
    }
    if (!up && !down) throw ContractViolation("bracket_asymptote: chart is not monotone");
    const std::size_t last = chart.size() - 1;
    const double s = chart.t(last);
    const double phi = chart.y(last, 0);
    const double slope = chart.y(last, 1);
    if (!(s > 0.0)) throw ContractViolation("bracket_asymptote: abscissa must be positive");
    if (!(std::abs(slope) < 1.0))
        throw ContractViolation("bracket_asymptote: final slope must be below 1");
    if (slope == 0.0) return {phi, phi};
    if (up) {
        // 1/phi - 1/r+ <= atan(phi')/(2s)
        const double denom = 1.0 - phi * std::atan(slope) / (2.0 * s);
        double hi = kCatenoidUpperBound;
        if (denom > 0.0) hi = std::min(hi, phi / denom);
        return {phi, std::max(hi, phi)};
    }
    // 1/r- - 1/phi <= |atan(phi')|/(2s)
    const double lo = 1.0 / (1.0 / phi + std::abs(std::atan(slope)) / (2.0 * s));
    return {lo, phi};
}

// Three-chart profile of the translating catenoid with neck radius r at z = 1:
// a horizontal graph x^2 + y^2 = d(z)^2 around the neck and two vertical
// graphs z = phi(s) (upper, increasing) and z = varphi(s) (lower, decreasing).
struct CatenoidProfile {
    double r = 1.0;
    ode::Trajectory horizontal_chart;      // t = z, state (d, d')
    ode::Trajectory upper_vertical_chart;  // t = s, state (phi, phi')
    ode::Trajectory lower_vertical_chart;  // t = s, state (varphi, varphi')
    Bracket r_plus_bracket;
    Bracket r_minus_bracket;

    double z_low_switch() const { return horizontal_chart.t_front(); }
    double z_high_switch() const { return horizontal_chart.t_back(); }
    double s_low_switch() const { return lower_vertical_chart.t_front(); }
    double s_high_switch() const { return upper_vertical_chart.t_front(); }

    // Composite profile parameter t: z inside the horizontal chart, extended
    // by arc-abscissa s beyond each switch. Increasing t runs from the lower
    // asymptote through the neck to the upper asymptote.
    double t_min() const { return z_low_switch() - (lower_vertical_chart.t_back() - s_low_switch()); }
    double t_max() const {
        return z_high_switch() + (upper_vertical_chart.t_back() - s_high_switch());
    }
    // Chart seams in t.
    std::vector<double> seams() const { return {z_low_switch(), z_high_switch()}; }

    // (distance to the axis, height) at parameter t.
    std::pair<double, double> point(double t) const {
        if (t < z_low_switch()) {
            const double s = lower_s(t);
            return {s, lower_vertical_chart.eval(s, 0)};
        }
        if (t > z_high_switch()) {
            const double s = upper_s(t);
            return {s, upper_vertical_chart.eval(s, 0)};
        }
        return {horizontal_chart.eval(t, 0), t};
    }

    // d/dt of (distance, height) at t.
    std::pair<double, double> tangent(double t) const {
        if (t < z_low_switch()) return {-1.0, -lower_vertical_chart.eval(lower_s(t), 1)};
        if (t > z_high_switch()) return {1.0, upper_vertical_chart.eval(upper_s(t), 1)};
        return {horizontal_chart.eval(t, 1), 1.0};
    }

private:
    // t -> s round trips can land an ulp past the end of a chart.
    static double snap(double s, const ode::Trajectory& chart) {
        const double end = chart.t_back();
        return s > end && s - end <= 1e-13 * (1.0 + std::abs(end)) ? end : s;
    }
    double lower_s(double t) const {
        return snap(s_low_switch() + (z_low_switch() - t), lower_vertical_chart);
    }
    double upper_s(double t) const {
        return snap(s_high_switch() + (t - z_high_switch()), upper_vertical_chart);
    }
};

inline CatenoidProfile solve_catenoid(double r, const Tolerances& tol = {}) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("solve_catenoid: r must be positive");
    CatenoidProfile out;
    out.r = r;
    const auto base = detail::integration_config(tol);

    // horizontal chart d(z), both directions from the neck
    ode::Rhs hrhs = [](double z, std::span<const double> y, std::span<double> d) {
        d[0] = y[1];
        d[1] = rhs_horizontal_rotational(z, y[0], y[1]);
    };
    const double switch_slope = tol.chart_switch_slope;
    auto hcfg = base;
    hcfg.stop_events.push_back(
        {"chart_switch", [switch_slope](double, std::span<const double> y) {
             return std::abs(y[1]) - switch_slope;
         }});
    const auto describe = [](const ode::Trajectory& tr) {
        return "stopped at t=" + std::to_string(tr.t_back()) + " (" + tr.stop_reason.to_string() +
               ")";
    };
    ode::OdeProblem up{2, hrhs, 1.0, {r, 0.0}, ode::Direction::forward};
    ode::OdeProblem down{2, hrhs, 1.0, {r, 0.0}, ode::Direction::backward};
    // d is convex with d'' >= 1/d, so |d'| reaches the threshold within a
    // z-distance of about r * slope; the bounds below are generous.
    const double reach = 4.0 * (switch_slope + 1.0) * std::max(r, 1.0);
    auto fwd = ode::integrate(up, hcfg, 1.0 + reach);
    auto bwd = ode::integrate(down, hcfg, 1e-300);
    if (fwd.stop_reason.kind != ode::StopKind::event)
        throw ConstructionError("solve_catenoid(r=" + std::to_string(r) +
                                "): upper horizontal chart " + describe(fwd));
    if (bwd.stop_reason.kind != ode::StopKind::event)
        throw ConstructionError("solve_catenoid(r=" + std::to_string(r) +
                                "): lower horizontal chart " + describe(bwd));
    out.horizontal_chart = ode::Trajectory::join(bwd, fwd);

    // vertical charts: s = d, height = z, slope = 1/d'
    auto vcfg = base;
    vcfg.stop_events.push_back(detail::flat_slope_event(tol.asymptote_slope));
    auto vertical = [&](double z, double d, double dd, const char* which) {
        ode::OdeProblem p{2, detail::vertical_rhs(), d, {z, 1.0 / dd}, ode::Direction::forward};
        auto tr = ode::integrate(p, vcfg, std::max(tol.asymptote_max_abscissa, 2.0 * d));
        const auto k = tr.stop_reason.kind;
        if (k != ode::StopKind::event && k != ode::StopKind::max_time)
            throw ConstructionError("solve_catenoid(r=" + std::to_string(r) + "): " + which +
                                    " vertical chart " + describe(tr));
        return tr;
    };
    const auto& h = out.horizontal_chart;
    out.upper_vertical_chart = vertical(h.t_back(), h.y(h.size() - 1, 0), h.y(h.size() - 1, 1), "upper");
    out.lower_vertical_chart = vertical(h.t_front(), h.y(0, 0), h.y(0, 1), "lower");
    out.r_plus_bracket = bracket_asymptote(out.upper_vertical_chart);
    out.r_minus_bracket = bracket_asymptote(out.lower_vertical_chart);
    return out;
}

// Parabolic profile phi(y) with phi(0) = 1, phi'(0) = lambda on [-Y, Y].
struct GrimReaperProfile {
    double lambda = 0.0;
    double Y = 0.0;
    ode::Trajectory trajectory;  // t = y, state (phi, phi')
    Bracket lambda_plus_bracket;
    Bracket lambda_minus_bracket;
};

inline GrimReaperProfile solve_grim_reaper(double lambda, double Y, const Tolerances& tol = {}) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw DomainError(
            "solve_grim_reaper: lambda must be >= 0 (negative slopes give congruent profiles)");
    if (!(Y > 0.0) || !std::isfinite(Y)) throw DomainError("solve_grim_reaper: Y must be positive");
    GrimReaperProfile out;
    out.lambda = lambda;
    out.Y = Y;
    ode::Rhs rhs = [](double y, std::span<const double> f, std::span<double> d) {
        d[0] = f[1];
        d[1] = rhs_parabolic(y, f[0], f[1]);
    };
    auto c = detail::integration_config(tol);
    if (lambda != 0.0) c.stop_events.push_back(detail::flat_slope_event(tol.asymptote_slope));
    auto fwd = ode::integrate({2, rhs, 0.0, {1.0, lambda}, ode::Direction::forward}, c, Y);
    auto bwd = ode::integrate({2, rhs, 0.0, {1.0, lambda}, ode::Direction::backward}, c, -Y);
    for (const auto* tr : {&fwd, &bwd}) {
        const auto k = tr->stop_reason.kind;
        if (k != ode::StopKind::event && k != ode::StopKind::max_time)
            throw ConstructionError("solve_grim_reaper(lambda=" + std::to_string(lambda) +
                                    "): integration stopped at y=" + std::to_string(tr->t_back()) +
                                    " (" + tr->stop_reason.to_string() + ")");
    }
    out.trajectory = ode::Trajectory::join(bwd, fwd);

    const auto& tr = out.trajectory;
    const double y_hi = tr.t_back(), f_hi = tr.y(tr.size() - 1, 0), s_hi = tr.y(tr.size() - 1, 1);
    const double y_lo = tr.t_front(), f_lo = tr.y(0, 0), s_lo = tr.y(0, 1);
    if (s_hi == 0.0) {
        out.lambda_plus_bracket = {f_hi, f_hi};
    } else {
        // 1/phi(Y) - 1/lambda+ <= atan(phi'(Y)) / (2Y)
        const double denom = 1.0 - f_hi * std::atan(s_hi) / (2.0 * y_hi);
        out.lambda_plus_bracket = {f_hi, denom > 0.0 ? f_hi / denom
                                                     : std::numeric_limits<double>::infinity()};
    }
    if (s_lo == 0.0) {
        out.lambda_minus_bracket = {f_lo, f_lo};
    } else {
        // 1/lambda- - 1/phi(-Y) <= atan(phi'(-Y)) / (2Y)
        out.lambda_minus_bracket = {1.0 / (1.0 / f_lo + std::atan(s_lo) / (2.0 * std::abs(y_lo))),
                                    f_lo};
    }
    return out;
}

struct HorosphereSpec {
    double h = 1.0;

    explicit HorosphereSpec(double height) : h(height) {
        if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("HorosphereSpec: h must be positive");
    }
};

// chart,t,value,derivative,residual. Rows run along the profile from the
// lower asymptote to the upper one; t is the chart's own abscissa.
inline void write_profile_csv(std::ostream& os, const CatenoidProfile& p) {
    os << "chart,t,value,derivative,residual\n";
    auto row = [&](const char* chart, double t, double v, double dv, double res) {
        os << chart << ',' << format_double(t) << ',' << format_double(v) << ','
           << format_double(dv) << ',' << format_double(res) << '\n';
    };
    const auto& lo = p.lower_vertical_chart;
    for (std::size_t i = lo.size(); i-- > 0;)
        row("lower", lo.t(i), lo.y(i, 0), lo.y(i, 1),
            translator_residual_rotational(lo.t(i), lo.y(i, 0), lo.y(i, 1), lo.dy(i, 1)));
    const auto& hz = p.horizontal_chart;
    for (std::size_t i = 0; i < hz.size(); ++i)
        row("horizontal", hz.t(i), hz.y(i, 0), hz.y(i, 1),
            translator_residual_horizontal(hz.t(i), hz.y(i, 0), hz.y(i, 1), hz.dy(i, 1)));
    const auto& up = p.upper_vertical_chart;
    for (std::size_t i = 0; i < up.size(); ++i)
        row("upper", up.t(i), up.y(i, 0), up.y(i, 1),
            translator_residual_rotational(up.t(i), up.y(i, 0), up.y(i, 1), up.dy(i, 1)));
}

inline void write_profile_csv(std::ostream& os, const GrimReaperProfile& p) {
    os << "chart,t,value,derivative,residual\n";
    const auto& tr = p.trajectory;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        os << "parabolic," << format_double(tr.t(i)) << ',' << format_double(tr.y(i, 0)) << ','
           << format_double(tr.y(i, 1)) << ','
           << format_double(translator_residual_parabolic(tr.t(i), tr.y(i, 0), tr.y(i, 1),
                                                          tr.dy(i, 1)))
           << '\n';
    }
}

}  // namespace hypsol

#pragma once

#include <cmath>
#include <numbers>

namespace hypsol {

// e^{pi/(4 sqrt 2)}: universal upper bound for the upper asymptote r+
// of every translating catenoid.
inline const double kCatenoidUpperBound =
    std::exp(std::numbers::pi / (4.0 * std::numbers::sqrt2));

// Every threshold used by construction and verification lives here so that
// tests and the CLI can pin or override them in one place.
struct Tolerances {
    // integration
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double event_time_tol = 1e-12;

    // profile construction
    double chart_switch_slope = 10.0;  // leave a graph chart once |slope| exceeds this
    double asymptote_slope = 1e-9;     // vertical chart stops once slope drops below this
    double asymptote_max_abscissa = 1e6;

    // geometry / verification
    double unit_normal_tol = 1e-12;
    double fd_step = 1e-4;
    double degenerate_cross = 1e-12;
    double residual_tol = 1e-4;
};

}  // namespace hypsol

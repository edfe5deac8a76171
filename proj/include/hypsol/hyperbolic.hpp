#pragma once

// Primitives of the upper half-space model {z > 0} with metric
// (dx^2 + dy^2 + dz^2) / z^2. Everything is stored in the Euclidean chart;
// the hyperbolic metric enters only through hyperbolic_inner and the two
// lift_* functions.

#include <array>
#include <cmath>
#include <string>
#include <variant>

#include "hypsol/config.hpp"
#include "hypsol/error.hpp"

namespace hypsol {

struct HPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 1.0;

    HPoint() = default;
    HPoint(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {
        if (!(std::isfinite(x) && std::isfinite(y) && std::isfinite(z)))
            throw DomainError("HPoint: non-finite coordinate");
        if (!(z > 0.0))
            throw DomainError("HPoint: height must be positive, got z=" + std::to_string(z));
    }

    std::array<double, 3> coords() const { return {x, y, z}; }
    friend bool operator==(const HPoint&, const HPoint&) = default;
};

// Tangent vector at `base`, components in the Euclidean chart.
struct TangentVec {
    HPoint base;
    double u1 = 0.0;
    double u2 = 0.0;
    double u3 = 0.0;

    std::array<double, 3> components() const { return {u1, u2, u3}; }
    double euclidean_norm() const { return std::sqrt(u1 * u1 + u2 * u2 + u3 * u3); }
};

namespace killing {
// xi(p) = p, generator of p -> e^t p.
struct HyperbolicTranslation {};
// xi(p) = J pi(p), generator of rotations about the z-axis.
struct Rotation {};
// xi(p) = -h p, downward hyperbolic translation at speed h.
struct ScaledDownTranslation {
    double h = 1.0;
};
}  // namespace killing

using KillingField =
    std::variant<killing::HyperbolicTranslation, killing::Rotation, killing::ScaledDownTranslation>;

inline std::string killing_name(const KillingField& f) {
    struct {
        std::string operator()(const killing::HyperbolicTranslation&) const { return "translate"; }
        std::string operator()(const killing::Rotation&) const { return "rotate"; }
        std::string operator()(const killing::ScaledDownTranslation& s) const {
            return "scaled:" + std::to_string(s.h);
        }
    } visitor;
    return std::visit(visitor, f);
}

inline KillingField scaled_down_translation(double h) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw DomainError("ScaledDownTranslation requires h > 0");
    return killing::ScaledDownTranslation{h};
}

// A point of a surface with its Euclidean-unit normal and the Euclidean mean
// curvature measured against that normal.
struct SurfaceSample {
    HPoint point;
    TangentVec unit_euclidean_normal;
    double euclidean_mean_curvature = 0.0;

    static SurfaceSample make(const HPoint& p, std::array<double, 3> normal, double mean_curvature,
                              double unit_tol = Tolerances{}.unit_normal_tol) {
        TangentVec n{p, normal[0], normal[1], normal[2]};
        if (std::abs(n.euclidean_norm() - 1.0) > unit_tol)
            throw ContractViolation("SurfaceSample: normal is not Euclidean-unit");
        if (!std::isfinite(mean_curvature))
            throw DomainError("SurfaceSample: non-finite mean curvature");
        return SurfaceSample{p, n, mean_curvature};
    }

    // Same surface point with the opposite orientation.
    SurfaceSample flipped() const {
        SurfaceSample s = *this;
        s.unit_euclidean_normal.u1 = -s.unit_euclidean_normal.u1;
        s.unit_euclidean_normal.u2 = -s.unit_euclidean_normal.u2;
        s.unit_euclidean_normal.u3 = -s.unit_euclidean_normal.u3;
        s.euclidean_mean_curvature = -s.euclidean_mean_curvature;
        return s;
    }
};

inline double hyperbolic_inner(const TangentVec& u, const TangentVec& v) {
    if (!(u.base == v.base))
        throw ContractViolation("hyperbolic_inner: vectors live at different base points");
    const double z = u.base.z;
    return (u.u1 * v.u1 + u.u2 * v.u2 + u.u3 * v.u3) / (z * z);
}

// eta = z * eta_bar is unit for the hyperbolic metric.
inline TangentVec lift_normal(const SurfaceSample& s) {
    const double z = s.point.z;
    const auto& n = s.unit_euclidean_normal;
    return TangentVec{s.point, z * n.u1, z * n.u2, z * n.u3};
}

// H = z * H_bar + eta_bar_3
inline double lift_mean_curvature(const SurfaceSample& s) {
    return s.point.z * s.euclidean_mean_curvature + s.unit_euclidean_normal.u3;
}

inline TangentVec killing_eval(const KillingField& f, const HPoint& p) {
    struct {
        const HPoint& p;
        TangentVec operator()(const killing::HyperbolicTranslation&) const {
            return {p, p.x, p.y, p.z};
        }
        TangentVec operator()(const killing::Rotation&) const {
            // J = [[0, -1], [1, 0]] applied to the horizontal projection.
            return {p, -p.y, p.x, 0.0};
        }
        TangentVec operator()(const killing::ScaledDownTranslation& s) const {
            return {p, -s.h * p.x, -s.h * p.y, -s.h * p.z};
        }
    } visitor{p};
    return std::visit(visitor, f);
}

// H - <xi, eta>; zero exactly when the sample satisfies the soliton equation
// for the field f.
inline double soliton_residual(const SurfaceSample& s, const KillingField& f) {
    return lift_mean_curvature(s) - hyperbolic_inner(killing_eval(f, s.point), lift_normal(s));
}

}  // namespace hypsol

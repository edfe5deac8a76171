#pragma once

// Finite-difference verification of the soliton equation and of the graph
// PDE, independent of how a surface was constructed.

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "hypsol/config.hpp"
#include "hypsol/error.hpp"
#include "hypsol/hyperbolic.hpp"
#include "hypsol/io.hpp"
#include "hypsol/surface.hpp"

namespace hypsol {

struct NodeResidual {
    double u = 0.0;
    double v = 0.0;
    double x = 0.0, y = 0.0, z = 0.0;
    double residual = 0.0;
};

enum class ResidualMethod { closed_form, finite_difference };

inline const char* to_string(ResidualMethod m) {
    return m == ResidualMethod::closed_form ? "closed_form" : "finite_difference";
}

struct ResidualReport {
    std::string provenance;
    std::string field;
    ResidualMethod method = ResidualMethod::finite_difference;
    std::size_t samples = 0;
    double max_abs_residual = 0.0;
    double mean_abs_residual = 0.0;
    NodeResidual worst;
    double step = 0.0;
    // max over nodes of |residual(step) - residual(2 step)|
    double richardson_delta = 0.0;
    std::vector<NodeResidual> nodes;

    void add(const NodeResidual& n) {
        const double a = std::abs(n.residual);
        if (nodes.empty() || a > max_abs_residual) {
            max_abs_residual = a;
            worst = n;
        }
        mean_abs_residual += (a - mean_abs_residual) / static_cast<double>(nodes.size() + 1);
        nodes.push_back(n);
        samples = nodes.size();
    }

    void write_text(std::ostream& os, const std::string& prefix = "") const {
        os << prefix << "provenance: " << provenance << '\n'
           << prefix << "field: " << field << '\n'
           << prefix << "method: " << to_string(method) << '\n'
           << prefix << "samples: " << samples << '\n'
           << prefix << "max_abs_residual: " << format_double(max_abs_residual) << '\n'
           << prefix << "mean_abs_residual: " << format_double(mean_abs_residual) << '\n'
           << prefix << "worst_u: " << format_double(worst.u) << '\n'
           << prefix << "worst_v: " << format_double(worst.v) << '\n'
           << prefix << "worst_residual: " << format_double(worst.residual) << '\n';
        if (method == ResidualMethod::finite_difference)
            os << prefix << "fd_step: " << format_double(step) << '\n'
               << prefix << "richardson_delta: " << format_double(richardson_delta) << '\n';
    }

    void write_csv(std::ostream& os) const {
        os << "u,v,x,y,z,residual\n";
        for (const auto& n : nodes)
            os << format_double(n.u) << ',' << format_double(n.v) << ',' << format_double(n.x)
               << ',' << format_double(n.y) << ',' << format_double(n.z) << ','
               << format_double(n.residual) << '\n';
    }
};

// First and second fundamental forms from central differences.
struct FdGeometry {
    HPoint point;
    Vec3 xu, xv, normal;  // normal: unit, oriented
    double E, F, G, L, M, N;
};

inline FdGeometry fd_geometry(const ParamSurface& s, double u, double v, double step,
                              double degenerate_cross = Tolerances{}.degenerate_cross) {
    if (!(step > 0.0)) throw ContractViolation("fd_mean_curvature: step must be positive");
    const double hu = step * s.fd_scale_u, hv = step * s.fd_scale_v;
    const bool u_ok = s.periodic_u || (u - 2.0 * hu >= s.u0 && u + 2.0 * hu <= s.u1);
    if (!u_ok || v - 2.0 * hv < s.v0 || v + 2.0 * hv > s.v1)
        throw ContractViolation("fd_mean_curvature: (" + format_double(u) + ", " +
                                format_double(v) + ") is closer than 2*step to the boundary");
    auto X = [&](double a, double b) { return s(a, b).coords(); };
    const Vec3 c = X(u, v);
    const Vec3 up = X(u + hu, v), um = X(u - hu, v);
    const Vec3 vp = X(u, v + hv), vm = X(u, v - hv);
    const Vec3 pp = X(u + hu, v + hv), pm = X(u + hu, v - hv);
    const Vec3 mp = X(u - hu, v + hv), mm = X(u - hu, v - hv);
    const Vec3 upp = X(u + 2.0 * hu, v), umm = X(u - 2.0 * hu, v);
    const Vec3 vpp = X(u, v + 2.0 * hv), vmm = X(u, v - 2.0 * hv);
    Vec3 xu, xv, xuu, xvv, xuv;
    for (int i = 0; i < 3; ++i) {
        // fourth-order first partials
        xu[i] = (8.0 * (up[i] - um[i]) - (upp[i] - umm[i])) / (12.0 * hu);
        xv[i] = (8.0 * (vp[i] - vm[i]) - (vpp[i] - vmm[i])) / (12.0 * hv);
        xuu[i] = (up[i] - 2.0 * c[i] + um[i]) / (hu * hu);
        xvv[i] = (vp[i] - 2.0 * c[i] + vm[i]) / (hv * hv);
        xuv[i] = (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * hu * hv);
    }
    Vec3 n = cross(xu, xv);
    const double len = norm(n);
    if (!(len > degenerate_cross))
        throw DegeneracyError("fd_mean_curvature: first partials do not span a plane at (" +
                              format_double(u) + ", " + format_double(v) + ")");
    n = {n[0] / len, n[1] / len, n[2] / len};
    if (n[2] < -1e-9) n = {-n[0], -n[1], -n[2]};
    return {HPoint(c[0], c[1], c[2]), xu, xv, n,
            dot(xu, xu), dot(xu, xv), dot(xv, xv),
            dot(xuu, n), dot(xuv, n), dot(xvv, n)};
}

// Euclidean mean curvature and normal at X(u, v) by central differences. The
// normal is X_u x X_v normalised and turned upward unless it is horizontal.
inline SurfaceSample fd_mean_curvature(const ParamSurface& s, double u, double v,
                                       double step = Tolerances{}.fd_step,
                                       const Tolerances& tol = {}) {
    const auto g = fd_geometry(s, u, v, step, tol.degenerate_cross);
    const double det = g.E * g.G - g.F * g.F;
    const double Hbar = (g.E * g.N - 2.0 * g.F * g.M + g.G * g.L) / (2.0 * det);
    return SurfaceSample::make(g.point, g.normal, Hbar, 1e-12);
}

namespace detail {

// Cell-centred grid coordinates; nodes whose stencil would reach across a
// seam are moved half a cell away from it.
inline std::vector<double> grid_nodes(double a, double b, int n, const std::vector<double>& seams,
                                      double reach) {
    std::vector<double> out;
    const double cell = (b - a) / n;
    for (int i = 0; i < n; ++i) {
        double x = a + (i + 0.5) * cell;
        for (double seam : seams) {
            if (std::abs(x - seam) < reach) x = x < seam ? seam - 0.5 * cell : seam + 0.5 * cell;
        }
        out.push_back(x);
    }
    return out;
}

}  // namespace detail

// soliton_residual at every node of an nu x nv cell-centred grid.
inline ResidualReport verify_soliton(const ParamSurface& s, const KillingField& field, int nu = 50,
                                     int nv = 50, const Tolerances& tol = {}) {
    if (nu < 1 || nv < 1) throw ContractViolation("verify_soliton: grid must be positive");
    const double step = tol.fd_step;
    ResidualReport rep;
    rep.provenance = s.provenance;
    rep.field = killing_name(field);
    rep.method = ResidualMethod::finite_difference;
    rep.step = step;
    const auto us = detail::grid_nodes(s.u0, s.u1, nu, s.u_seams, 4.0 * step * s.fd_scale_u);
    const auto vs = detail::grid_nodes(s.v0, s.v1, nv, s.v_seams, 4.0 * step * s.fd_scale_v);
    for (double v : vs)
        for (double u : us) {
            SurfaceSample fine, coarse;
            try {
                fine = fd_mean_curvature(s, u, v, step, tol);
                coarse = fd_mean_curvature(s, u, v, 2.0 * step, tol);
            } catch (const DegeneracyError& e) {
                throw DegeneracyError(std::string(e.what()) + " [" + s.provenance + "]");
            }
            const double r = soliton_residual(fine, field);
            rep.richardson_delta =
                std::max(rep.richardson_delta, std::abs(r - soliton_residual(coarse, field)));
            rep.add({u, v, fine.point.x, fine.point.y, fine.point.z, r});
        }
    return rep;
}

// u^2 Q(u) + 2 (1 + u_x^2 + u_y^2)(x u_x + y u_y) at interior nodes of a
// grid values[j][i] = u(x0 + i dx, y0 + j dy).
inline ResidualReport graph_pde_residual(const std::vector<std::vector<double>>& values, double x0,
                                         double y0, double dx, double dy,
                                         std::string provenance = "graph") {
    const std::size_t ny = values.size();
    if (ny < 5) throw ContractViolation("graph_pde_residual: grid must be at least 5x5");
    const std::size_t nx = values[0].size();
    if (nx < 5) throw ContractViolation("graph_pde_residual: grid must be at least 5x5");
    for (const auto& row : values) {
        if (row.size() != nx) throw ContractViolation("graph_pde_residual: ragged grid");
        for (double u : row)
            if (!(u > 0.0)) throw DomainError("graph_pde_residual: u must be positive");
    }
    if (!(dx > 0.0) || !(dy > 0.0)) throw ContractViolation("graph_pde_residual: bad spacing");
    ResidualReport rep;
    rep.provenance = std::move(provenance);
    rep.field = "translate";
    rep.method = ResidualMethod::finite_difference;
    rep.step = std::min(dx, dy);
    for (std::size_t j = 1; j + 1 < ny; ++j)
        for (std::size_t i = 1; i + 1 < nx; ++i) {
            const double x = x0 + i * dx, y = y0 + j * dy;
            const double u = values[j][i];
            const double ux = (values[j][i + 1] - values[j][i - 1]) / (2.0 * dx);
            const double uy = (values[j + 1][i] - values[j - 1][i]) / (2.0 * dy);
            const double uxx = (values[j][i + 1] - 2.0 * u + values[j][i - 1]) / (dx * dx);
            const double uyy = (values[j + 1][i] - 2.0 * u + values[j - 1][i]) / (dy * dy);
            const double uxy = (values[j + 1][i + 1] - values[j - 1][i + 1] -
                                values[j + 1][i - 1] + values[j - 1][i - 1]) /
                               (4.0 * dx * dy);
            const double Q = uxx * (1.0 + uy * uy) + uyy * (1.0 + ux * ux) - 2.0 * uxy * ux * uy;
            const double B = 2.0 * (1.0 + ux * ux + uy * uy) * (x * ux + y * uy);
            rep.add({x, y, x, y, u, u * u * Q + B});
        }
    return rep;
}

struct PrincipalCurvatures {
    double u, v;
    double k1, k2;  // k1 >= k2
};

// Hyperbolic principal curvatures: eigenvalues of z A_bar + eta_bar_3 I,
// A_bar the Euclidean shape operator with respect to the oriented FD normal.
inline PrincipalCurvatures principal_curvatures(const ParamSurface& s, double u, double v,
                                                double step = Tolerances{}.fd_step,
                                                const Tolerances& tol = {}) {
    const auto g = fd_geometry(s, u, v, step, tol.degenerate_cross);
    const double det = g.E * g.G - g.F * g.F;
    // A_bar = I^{-1} II
    const double a11 = (g.G * g.L - g.F * g.M) / det, a12 = (g.G * g.M - g.F * g.N) / det;
    const double a21 = (g.E * g.M - g.F * g.L) / det, a22 = (g.E * g.N - g.F * g.M) / det;
    const double tr = a11 + a22, dt = a11 * a22 - a12 * a21;
    const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - dt));
    const double z = g.point.z, n3 = g.normal[2];
    return {u, v, z * (0.5 * tr + disc) + n3, z * (0.5 * tr - disc) + n3};
}

inline std::vector<PrincipalCurvatures> principal_curvature_check(const ParamSurface& s, int nu,
                                                                  int nv,
                                                                  const Tolerances& tol = {}) {
    std::vector<PrincipalCurvatures> out;
    for (double v : detail::grid_nodes(s.v0, s.v1, nv, s.v_seams, 2.0 * tol.fd_step * s.fd_scale_v))
        for (double u : detail::grid_nodes(s.u0, s.u1, nu, s.u_seams, 2.0 * tol.fd_step * s.fd_scale_u))
            out.push_back(principal_curvatures(s, u, v, tol.fd_step, tol));
    return out;
}

}  // namespace hypsol

#pragma once

// Parametrised surfaces in the half-space chart and their triangulations.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hypsol/error.hpp"
#include "hypsol/hyperbolic.hpp"
#include "hypsol/io.hpp"
#include "hypsol/profiles.hpp"
#include "hypsol/rotator.hpp"

namespace hypsol {

using Vec3 = std::array<double, 3>;

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) {
    const double n = norm(a);
    return {a[0] / n, a[1] / n, a[2] / n};
}

// (u, v) -> point, over [u0, u1] x [v0, v1].
struct ParamSurface {
    std::function<HPoint(double u, double v)> map;
    std::optional<std::function<Vec3(double u, double v)>> normal;  // Euclidean unit
    double u0 = 0.0, u1 = 1.0, v0 = 0.0, v1 = 1.0;
    std::string provenance;
    // Parameter values where the map switches chart; derivatives straddling
    // them are not trusted.
    std::vector<double> u_seams;
    std::vector<double> v_seams;
    // u is an angle and the map is 2 pi periodic in u.
    bool periodic_u = false;
    // Finite-difference steps are fd_step times these factors; a long
    // arc-length direction far from the origin needs a wider stencil.
    double fd_scale_u = 1.0;
    double fd_scale_v = 1.0;

    HPoint operator()(double u, double v) const { return map(u, v); }
};

inline ParamSurface horosphere_surface(double h, double half_width = 1.0) {
    const HorosphereSpec spec(h);
    ParamSurface s;
    s.map = [h = spec.h](double u, double v) { return HPoint(u, v, h); };
    s.normal = [](double, double) { return Vec3{0.0, 0.0, 1.0}; };
    s.u0 = s.v0 = -half_width;
    s.u1 = s.v1 = half_width;
    s.provenance = "horosphere(" + format_double(h) + ")";
    return s;
}

// Totally geodesic vertical plane through the z-axis at angle theta:
// (u cos theta, u sin theta, v).
inline ParamSurface vertical_plane_surface(double theta, double half_width = 1.0,
                                           double z0 = 0.5, double z1 = 2.0) {
    if (!std::isfinite(theta)) throw DomainError("vertical_plane_surface: non-finite angle");
    if (!(z0 > 0.0) || !(z1 > z0)) throw DomainError("vertical_plane_surface: need 0 < z0 < z1");
    ParamSurface s;
    const double c = std::cos(theta), sn = std::sin(theta);
    s.map = [c, sn](double u, double v) { return HPoint(u * c, u * sn, v); };
    s.normal = [c, sn](double, double) { return Vec3{-sn, c, 0.0}; };
    s.u0 = -half_width;
    s.u1 = half_width;
    s.v0 = z0;
    s.v1 = z1;
    s.provenance = "vertical_plane(" + format_double(theta) + ")";
    return s;
}

// (theta, t) -> (rho(t) cos theta, rho(t) sin theta, z(t)) with the composite
// profile parameter t of CatenoidProfile.
inline ParamSurface catenoid_surface(const CatenoidProfile& profile) {
    ParamSurface s;
    const auto keep = std::make_shared<const CatenoidProfile>(profile);
    const auto& p = *keep;
    s.map = [keep](double u, double v) {
        const auto [rho, z] = keep->point(v);
        return HPoint(rho * std::cos(u), rho * std::sin(u), z);
    };
    s.normal = [keep](double u, double v) {
        const auto [drho, dz] = keep->tangent(v);
        return normalized(Vec3{-dz * std::cos(u), -dz * std::sin(u), drho});
    };
    s.u0 = 0.0;
    s.u1 = 2.0 * std::numbers::pi;
    s.v0 = p.t_min();
    s.v1 = p.t_max();
    s.v_seams = p.seams();
    s.periodic_u = true;
    s.provenance = "catenoid(" + format_double(p.r) + ")";
    return s;
}

// (x, y) -> (x, y, phi(y)).
inline ParamSurface grim_reaper_surface(const GrimReaperProfile& p, double x0 = -1.0,
                                        double x1 = 1.0) {
    ParamSurface s;
    const auto keep = std::make_shared<const ode::Trajectory>(p.trajectory);
    const auto& tr = *keep;
    s.map = [keep](double u, double v) { return HPoint(u, v, keep->eval(v, 0)); };
    s.normal = [keep](double, double v) {
        return normalized(Vec3{0.0, -keep->eval(v, 1), 1.0});
    };
    s.u0 = x0;
    s.u1 = x1;
    s.v0 = tr.t_front();
    s.v1 = tr.t_back();
    s.provenance = "grim_reaper(" + format_double(p.lambda) + ")";
    return s;
}

// X(u, v) = e^{hv} (e^{vJ} alpha(u), 1) with alpha from the polar
// reconstruction of the curve.
inline ParamSurface helicoid_surface(const RotatorCurve& c, double v0 = -0.5, double v1 = 0.5,
                                     std::optional<double> u0 = {},
                                     std::optional<double> u1 = {}) {
    ParamSurface s;
    const double h = c.h();
    const auto keep = std::make_shared<const ode::Trajectory>(c.polar_trajectory);
    const auto& pol = *keep;
    s.map = [keep, h](double u, double v) {
        const auto y = keep->eval(u);
        const double e = std::exp(h * v);
        const double ang = y[1] + v;
        return HPoint(e * y[0] * std::cos(ang), e * y[0] * std::sin(ang), e);
    };
    // eta_bar = rho (e^{vJ} N, -(tau + h mu)/h), N = J T
    s.normal = [keep, h](double u, double v) {
        const auto y = keep->eval(u);
        const double r = y[0], om = y[1], tau = y[2], mu = y[3];
        const Vec3 alpha{r * std::cos(om), r * std::sin(om), 0.0};
        const Vec3 jalpha{-alpha[1], alpha[0], 0.0};
        // |alpha| = r and |(tau, mu)| agree only to integration accuracy;
        // dividing by both keeps T unit
        const double r2 = r * std::hypot(tau, mu);
        const double tx = tau / r2 * alpha[0] - mu / r2 * jalpha[0];
        const double ty = tau / r2 * alpha[1] - mu / r2 * jalpha[1];
        const double nx = -ty, ny = tx;
        const double cv = std::cos(v), sv = std::sin(v);
        const double rho = helicoid_rho(tau, mu, h);
        return Vec3{rho * (cv * nx - sv * ny), rho * (sv * nx + cv * ny), -rho * (tau + h * mu) / h};
    };
    s.u0 = u0.value_or(pol.t_min());
    s.u1 = u1.value_or(pol.t_max());
    if (!(s.u0 >= pol.t_min() && s.u1 <= pol.t_max() && s.u0 < s.u1))
        throw ContractViolation("helicoid_surface: u-range outside the integrated curve");
    if (!(v0 < v1) || !std::isfinite(v0) || !std::isfinite(v1))
        throw ContractViolation("helicoid_surface: bad v-range");
    s.v0 = v0;
    s.v1 = v1;
    s.fd_scale_u = 10.0;
    s.fd_scale_v = 1.0;
    s.provenance = "helicoid(" + format_double(h) + ")";
    return s;
}

struct TriMesh {
    std::vector<HPoint> vertices;
    std::vector<std::array<double, 2>> params;
    std::vector<Vec3> normals;
    std::vector<std::array<std::uint32_t, 3>> triangles;
    std::string provenance;

    bool empty() const { return vertices.empty(); }

    Vec3 face_normal(std::size_t f) const {
        const auto& t = triangles[f];
        const auto a = vertices[t[0]].coords(), b = vertices[t[1]].coords(),
                   c = vertices[t[2]].coords();
        return cross(Vec3{b[0] - a[0], b[1] - a[1], b[2] - a[2]},
                     Vec3{c[0] - a[0], c[1] - a[1], c[2] - a[2]});
    }

    // Throws ContractViolation naming the first broken invariant.
    void validate(double unit_tol = 1e-10) const {
        if (normals.size() != vertices.size() || params.size() != vertices.size())
            throw ContractViolation("TriMesh: per-vertex arrays differ in length");
        for (std::size_t i = 0; i < normals.size(); ++i)
            if (std::abs(norm(normals[i]) - 1.0) > unit_tol)
                throw ContractViolation("TriMesh: normal " + std::to_string(i) + " is not unit");
        for (std::size_t f = 0; f < triangles.size(); ++f) {
            for (auto idx : triangles[f])
                if (idx >= vertices.size())
                    throw ContractViolation("TriMesh: index out of range in face " +
                                            std::to_string(f));
            if (!(norm(face_normal(f)) > 0.0))
                throw ContractViolation("TriMesh: degenerate face " + std::to_string(f));
        }
    }
};

namespace detail {

// Rows x cols vertex grid; quads split along the (i,j)-(i+1,j+1) diagonal.
// Faces are wound so that their normals agree with the vertex normals.
inline void grid_faces(TriMesh& m, std::size_t rows, std::size_t cols, bool wrap_cols) {
    const std::size_t ncell = wrap_cols ? cols : cols - 1;
    auto id = [cols](std::size_t i, std::size_t j) {
        return static_cast<std::uint32_t>(i * cols + (j % cols));
    };
    for (std::size_t i = 0; i + 1 < rows; ++i)
        for (std::size_t j = 0; j < ncell; ++j) {
            m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    double agree = 0.0;
    for (std::size_t f = 0; f < m.triangles.size(); ++f) {
        const auto fn = m.face_normal(f);
        for (auto idx : m.triangles[f]) agree += dot(fn, m.normals[idx]);
    }
    if (agree < 0.0)
        for (auto& t : m.triangles) std::swap(t[1], t[2]);
}

}  // namespace detail

// A point of a meridian profile: distance to the axis rho and height z with
// their derivatives in the profile parameter t.
struct ProfileSample {
    double t;
    double rho;
    double z;
    double drho;
    double dz;
};

// Surface of revolution about the z-axis. Each profile sample becomes one
// ring of `angular_res` vertices, so a shared sample (such as the neck
// circle) is meshed exactly once.
inline TriMesh revolve(const std::vector<ProfileSample>& profile, int angular_res,
                       std::string provenance = "revolution") {
    if (angular_res < 8) throw DomainError("revolve: angular resolution must be at least 8");
    if (profile.size() < 2) throw DomainError("revolve: need at least two profile samples");
    TriMesh m;
    m.provenance = std::move(provenance);
    for (const auto& p : profile) {
        if (!(p.z > 0.0)) throw DomainError("revolve: profile touches z = 0 at t=" + format_double(p.t));
        if (!(p.rho > 0.0)) throw DomainError("revolve: profile meets the axis at t=" + format_double(p.t));
        for (int j = 0; j < angular_res; ++j) {
            const double th = 2.0 * std::numbers::pi * j / angular_res;
            const double c = std::cos(th), s = std::sin(th);
            m.vertices.emplace_back(p.rho * c, p.rho * s, p.z);
            m.params.push_back({th, p.t});
            m.normals.push_back(normalized(Vec3{-p.dz * c, -p.dz * s, p.drho}));
        }
    }
    detail::grid_faces(m, profile.size(), static_cast<std::size_t>(angular_res), true);
    return m;
}

// Profile of a vertical graph z = phi(s) sampled at the trajectory's own
// abscissae (state (phi, phi')).
inline std::vector<ProfileSample> vertical_graph_samples(const std::vector<double>& s,
                                                         const std::function<double(double)>& phi,
                                                         const std::function<double(double)>& dphi) {
    std::vector<ProfileSample> out;
    out.reserve(s.size());
    for (double x : s) out.push_back({x, x, phi(x), 1.0, dphi(x)});
    return out;
}

// Composite-profile samples of a catenoid: `n` uniform steps in t with the
// chart seams and the neck z = 1 inserted exactly.
inline std::vector<ProfileSample> catenoid_samples(const CatenoidProfile& p, int n) {
    if (n < 2) throw DomainError("catenoid_samples: need at least two samples");
    std::vector<double> ts;
    for (int i = 0; i <= n; ++i) ts.push_back(p.t_min() + (p.t_max() - p.t_min()) * i / n);
    for (double seam : p.seams()) ts.push_back(seam);
    ts.push_back(1.0);
    std::sort(ts.begin(), ts.end());
    const double min_gap = 1e-9 * (p.t_max() - p.t_min());
    std::vector<double> kept;
    for (double t : ts) {
        if (kept.empty() || t - kept.back() > min_gap) {
            kept.push_back(t);
        } else if (t == 1.0 || t == p.z_low_switch() || t == p.z_high_switch()) {
            kept.back() = t;
        }
    }
    std::vector<ProfileSample> out;
    for (double t : kept) {
        const auto [rho, z] = p.point(t);
        const auto [drho, dz] = p.tangent(t);
        out.push_back({t, rho, z, drho, dz});
    }
    return out;
}

inline TriMesh catenoid_mesh(const CatenoidProfile& p, int profile_res, int angular_res) {
    return revolve(catenoid_samples(p, profile_res), angular_res,
                   "catenoid(" + format_double(p.r) + ")");
}

// Parabolic cylinder (x, y, phi(y)) over [x0, x1] x [y0, y1].
inline TriMesh extrude_parabolic(const ode::Trajectory& profile, double x0, double x1, int nx,
                                 int ny, std::string provenance = "parabolic") {
    if (nx < 1 || ny < 1) throw DomainError("extrude_parabolic: resolution must be positive");
    if (!(x1 > x0)) throw DomainError("extrude_parabolic: empty x-range");
    TriMesh m;
    m.provenance = std::move(provenance);
    const double y0 = profile.t_min(), y1 = profile.t_max();
    for (int j = 0; j <= ny; ++j) {
        const double y = y0 + (y1 - y0) * j / ny;
        const auto f = profile.eval(y);
        if (!(f[0] > 0.0)) throw DomainError("extrude_parabolic: profile touches z = 0");
        const Vec3 n = normalized(Vec3{0.0, -f[1], 1.0});
        for (int i = 0; i <= nx; ++i) {
            const double x = x0 + (x1 - x0) * i / nx;
            m.vertices.emplace_back(x, y, f[0]);
            m.params.push_back({x, y});
            m.normals.push_back(n);
        }
    }
    detail::grid_faces(m, static_cast<std::size_t>(ny) + 1, static_cast<std::size_t>(nx) + 1,
                       false);
    return m;
}

inline TriMesh extrude_parabolic(const GrimReaperProfile& p, double x0, double x1, int nx, int ny) {
    return extrude_parabolic(p.trajectory, x0, x1, nx, ny,
                             "grim_reaper(" + format_double(p.lambda) + ")");
}

// Helicoidal sweep of the generating curve over the surface's own rectangle.
inline TriMesh sweep_helicoid(const RotatorCurve& c, double v0, double v1, int nu, int nv,
                              std::optional<double> u0 = {}, std::optional<double> u1 = {}) {
    if (nu < 1 || nv < 1) throw DomainError("sweep_helicoid: resolution must be positive");
    const auto surf = helicoid_surface(c, v0, v1, u0, u1);
    TriMesh m;
    m.provenance = surf.provenance;
    for (int j = 0; j <= nv; ++j) {
        const double v = surf.v0 + (surf.v1 - surf.v0) * j / nv;
        for (int i = 0; i <= nu; ++i) {
            const double u = surf.u0 + (surf.u1 - surf.u0) * i / nu;
            m.vertices.push_back(surf(u, v));
            m.params.push_back({u, v});
            m.normals.push_back((*surf.normal)(u, v));
        }
    }
    detail::grid_faces(m, static_cast<std::size_t>(nv) + 1, static_cast<std::size_t>(nu) + 1,
                       false);
    return m;
}

// Generic sampling of a ParamSurface with its analytic normal.
inline TriMesh sample_surface(const ParamSurface& s, int nu, int nv) {
    if (nu < 1 || nv < 1) throw DomainError("sample_surface: resolution must be positive");
    if (!s.normal) throw ContractViolation("sample_surface: surface has no analytic normal");
    TriMesh m;
    m.provenance = s.provenance;
    const int cols = s.periodic_u ? nu : nu + 1;
    for (int j = 0; j <= nv; ++j) {
        const double v = s.v0 + (s.v1 - s.v0) * j / nv;
        for (int i = 0; i < cols; ++i) {
            const double u = s.u0 + (s.u1 - s.u0) * i / nu;
            m.vertices.push_back(s(u, v));
            m.params.push_back({u, v});
            m.normals.push_back((*s.normal)(u, v));
        }
    }
    detail::grid_faces(m, static_cast<std::size_t>(nv) + 1, static_cast<std::size_t>(cols),
                       s.periodic_u);
    return m;
}

// v / vn / f i//i j//j k//k, 1-based, 17 significant digits.
inline void write_obj(std::ostream& os, const TriMesh& m) {
    os << "# hypsol mesh " << m.provenance << ": " << m.vertices.size() << " vertices, "
       << m.triangles.size() << " faces\n";
    for (const auto& v : m.vertices)
        os << "v " << format_double(v.x) << ' ' << format_double(v.y) << ' ' << format_double(v.z)
           << '\n';
    for (const auto& n : m.normals)
        os << "vn " << format_double(n[0]) << ' ' << format_double(n[1]) << ' '
           << format_double(n[2]) << '\n';
    for (const auto& t : m.triangles) {
        os << 'f';
        for (auto idx : t) os << ' ' << idx + 1 << "//" << idx + 1;
        os << '\n';
    }
}

inline void write_mesh_csv(std::ostream& os, const TriMesh& m) {
    os << "u,v,x,y,z,nx,ny,nz\n";
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
        const auto& p = m.vertices[i];
        const auto& n = m.normals[i];
        os << format_double(m.params[i][0]) << ',' << format_double(m.params[i][1]) << ','
           << format_double(p.x) << ',' << format_double(p.y) << ',' << format_double(p.z) << ','
           << format_double(n[0]) << ',' << format_double(n[1]) << ',' << format_double(n[2])
           << '\n';
    }
}

inline std::string to_obj(const TriMesh& m) {
    std::ostringstream os;
    write_obj(os, m);
    return os.str();
}

struct ObjData {
    std::vector<Vec3> vertices;
    std::vector<Vec3> normals;
    std::vector<std::array<std::uint32_t, 3>> faces;  // 0-based vertex indices
};

// Reads the subset of OBJ written by write_obj.
inline ObjData parse_obj(std::istream& is) {
    ObjData out;
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& what) {
        throw std::runtime_error("parse_obj: line " + std::to_string(lineno) + ": " + what);
    };
    auto num = [&](std::istringstream& ls) {
        std::string tok;
        double x;
        if (!(ls >> tok) || !parse_double(tok, x)) fail("bad number");
        return x;
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "v" || tag == "vn") {
            Vec3 p{num(ls), num(ls), num(ls)};
            (tag == "v" ? out.vertices : out.normals).push_back(p);
        } else if (tag == "f") {
            std::array<std::uint32_t, 3> f{};
            for (auto& idx : f) {
                std::string tok;
                if (!(ls >> tok)) fail("face needs three corners");
                const auto cut = tok.find('/');
                double x;
                if (!parse_double(tok.substr(0, cut), x) || x < 1) fail("bad face index");
                idx = static_cast<std::uint32_t>(x) - 1;
            }
            out.faces.push_back(f);
        } else {
            fail("unsupported record '" + tag + "'");
        }
    }
    return out;
}

}  // namespace hypsol

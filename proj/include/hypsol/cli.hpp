#pragma once

// Command implementations behind the hypsol executable. Argument parsing
// lives in the tool; everything here takes already-typed arguments and
// reports through exit codes.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hypsol/config.hpp"
#include "hypsol/error.hpp"
#include "hypsol/hyperbolic.hpp"
#include "hypsol/io.hpp"
#include "hypsol/profiles.hpp"
#include "hypsol/rotator.hpp"
#include "hypsol/surface.hpp"
#include "hypsol/verify.hpp"

namespace hypsol::cli {

enum ExitCode : int { ok = 0, usage = 2, construction = 3, verification = 4 };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline double parse_number(const std::string& flag, const std::string& text) {
    double v = 0.0;
    if (!parse_double(text, v)) throw UsageError(flag + ": not a number: '" + text + "'");
    return v;
}

// Comma separated numbers, or log:a:b:n for n log-spaced values.
inline std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    if (text.rfind("log:", 0) == 0) {
        std::vector<std::string> parts;
        std::stringstream ss(text.substr(4));
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) throw UsageError("--values: expected log:<a>:<b>:<n>");
        const double a = parse_number("--values", parts[0]);
        const double b = parse_number("--values", parts[1]);
        const double n = parse_number("--values", parts[2]);
        if (!(a > 0.0) || !(b > 0.0) || !(n >= 2.0) || n != std::floor(n))
            throw UsageError("--values: log range needs a, b > 0 and integer n >= 2");
        const int count = static_cast<int>(n);
        for (int i = 0; i < count; ++i)
            out.push_back(std::exp(std::log(a) + (std::log(b) - std::log(a)) * i / (count - 1)));
        return out;
    }
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(parse_number("--values", p));
    if (out.empty()) throw UsageError("--values: empty list");
    return out;
}

// key = value lines; '#' starts a comment. Keys are Tolerances field names.
inline void apply_tolerance(Tolerances& t, const std::string& key, double v) {
    static const std::map<std::string, double Tolerances::*> fields = {
        {"rel_tol", &Tolerances::rel_tol},
        {"abs_tol", &Tolerances::abs_tol},
        {"event_time_tol", &Tolerances::event_time_tol},
        {"chart_switch_slope", &Tolerances::chart_switch_slope},
        {"asymptote_slope", &Tolerances::asymptote_slope},
        {"asymptote_max_abscissa", &Tolerances::asymptote_max_abscissa},
        {"unit_normal_tol", &Tolerances::unit_normal_tol},
        {"fd_step", &Tolerances::fd_step},
        {"degenerate_cross", &Tolerances::degenerate_cross},
        {"residual_tol", &Tolerances::residual_tol},
    };
    const auto it = fields.find(key);
    if (it == fields.end()) throw UsageError("unknown tolerance '" + key + "'");
    if (!(v > 0.0) || !std::isfinite(v))
        throw UsageError("tolerance '" + key + "' must be positive and finite");
    t.*(it->second) = v;
}

inline std::vector<std::pair<std::string, double>> tolerance_record(const Tolerances& t) {
    return {{"rel_tol", t.rel_tol},
            {"abs_tol", t.abs_tol},
            {"event_time_tol", t.event_time_tol},
            {"chart_switch_slope", t.chart_switch_slope},
            {"asymptote_slope", t.asymptote_slope},
            {"asymptote_max_abscissa", t.asymptote_max_abscissa},
            {"unit_normal_tol", t.unit_normal_tol},
            {"fd_step", t.fd_step},
            {"degenerate_cross", t.degenerate_cross},
            {"residual_tol", t.residual_tol}};
}

inline void load_config(Tolerances& t, const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw UsageError("cannot read config file " + path.string());
    std::string line;
    for (int n = 1; std::getline(is, line); ++n) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(path.string() + ":" + std::to_string(n) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        apply_tolerance(t, key, parse_number(key, trim(line.substr(eq + 1))));
    }
}

class Manifest {
public:
    void set(const std::string& key, const std::string& value) { entries_.emplace_back(key, value); }
    void set(const std::string& key, double value) { set(key, format_double(value)); }
    void add_output(const std::filesystem::path& p) { outputs_.push_back(p.filename().string()); }

    std::string str(const std::string& command_line, const Tolerances& tol, double seconds) const {
        std::ostringstream os;
        os << "command: " << command_line << '\n';
        for (const auto& [k, v] : entries_) os << k << ": " << v << '\n';
        for (const auto& [k, v] : tolerance_record(tol)) os << "tol." << k << ": " << format_double(v) << '\n';
        for (std::size_t i = 0; i < outputs_.size(); ++i) os << "output." << i << ": " << outputs_[i] << '\n';
        os << "duration_s: " << format_double(seconds) << '\n';
        return os.str();
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
    std::vector<std::string> outputs_;
};

struct Context {
    std::string command_line;
    Tolerances tol;
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
};

namespace detail {

using clock = std::chrono::steady_clock;

inline std::filesystem::path prepare_dir(const std::string& dir) {
    if (dir.empty()) throw UsageError("--out is required");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw UsageError("cannot create output directory " + dir + ": " + ec.message());
    return dir;
}

template <class F>
void emit(const std::filesystem::path& path, Manifest& m, F&& writer) {
    std::ostringstream os;
    writer(os);
    write_file_atomic(path, os.str());
    m.add_output(path);
}

inline void write_manifest(const std::filesystem::path& dir, const Manifest& m, const Context& ctx,
                           clock::time_point t0) {
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    write_file_atomic(dir / "manifest.txt", m.str(ctx.command_line, ctx.tol, secs));
}

inline void report_bracket(Manifest& m, std::ostream& os, const std::string& name, const Bracket& b) {
    m.set(name + ".lo", b.lo);
    m.set(name + ".hi", b.hi);
    os << name << ": [" << format_double(b.lo) << ", " << format_double(b.hi) << "]\n";
}

inline void require_positive(const char* flag, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw UsageError(std::string(flag) + " must be positive");
}

inline void require_grid(const char* flag, int n, int min) {
    if (n < min) throw UsageError(std::string(flag) + " must be at least " + std::to_string(min));
}

}  // namespace detail

struct CatenoidArgs {
    double r = 1.0;
    int mesh_res = 64;
    int grid = 50;
    std::string out;
};

inline int cmd_catenoid(const CatenoidArgs& a, const Context& ctx) {
    const auto t0 = detail::clock::now();
    detail::require_positive("--r", a.r);
    detail::require_grid("--mesh-res", a.mesh_res, 8);
    detail::require_grid("--grid", a.grid, 1);
    const auto dir = detail::prepare_dir(a.out);
    Manifest m;
    m.set("param.r", a.r);
    m.set("param.mesh_res", std::to_string(a.mesh_res));
    m.set("param.grid", std::to_string(a.grid));

    const auto p = solve_catenoid(a.r, ctx.tol);
    const auto rep = verify_soliton(catenoid_surface(p), killing::HyperbolicTranslation{}, a.grid,
                                    a.grid, ctx.tol);
    detail::emit(dir / "profile.csv", m, [&](std::ostream& os) { write_profile_csv(os, p); });
    detail::emit(dir / "mesh.obj", m,
                 [&](std::ostream& os) { write_obj(os, catenoid_mesh(p, a.mesh_res, a.mesh_res)); });
    detail::emit(dir / "residuals.csv", m, [&](std::ostream& os) { rep.write_csv(os); });

    auto& os = *ctx.out;
    detail::report_bracket(m, os, "r_minus", p.r_minus_bracket);
    detail::report_bracket(m, os, "r_plus", p.r_plus_bracket);
    m.set("r_plus.rescaled_hi", a.r * (p.r_plus_bracket.hi - 1.0) / p.r_plus_bracket.hi);
    m.set("chart_switch.z_low", p.z_low_switch());
    m.set("chart_switch.z_high", p.z_high_switch());
    m.set("residual.max", rep.max_abs_residual);
    m.set("residual.mean", rep.mean_abs_residual);
    m.set("residual.richardson_delta", rep.richardson_delta);
    os << "max_abs_residual: " << format_double(rep.max_abs_residual) << '\n';
    detail::write_manifest(dir, m, ctx, t0);
    return rep.max_abs_residual < ctx.tol.residual_tol ? ok : verification;
}

struct GrimReaperArgs {
    double lambda = 1.0;
    double span = 50.0;
    int mesh_res = 64;
    int grid = 50;
    std::string out;
};

inline int cmd_grim_reaper(const GrimReaperArgs& a, const Context& ctx) {
    const auto t0 = detail::clock::now();
    if (!(a.lambda >= 0.0) || !std::isfinite(a.lambda))
        throw UsageError("--lambda must be >= 0: a negative initial slope gives a profile "
                         "congruent to the one with slope -lambda");
    detail::require_positive("--span", a.span);
    detail::require_grid("--mesh-res", a.mesh_res, 2);
    detail::require_grid("--grid", a.grid, 1);
    const auto dir = detail::prepare_dir(a.out);
    Manifest m;
    m.set("param.lambda", a.lambda);
    m.set("param.span", a.span);
    m.set("param.mesh_res", std::to_string(a.mesh_res));
    m.set("param.grid", std::to_string(a.grid));

    const auto p = solve_grim_reaper(a.lambda, a.span, ctx.tol);
    const auto rep = verify_soliton(grim_reaper_surface(p), killing::HyperbolicTranslation{},
                                    a.grid, a.grid, ctx.tol);
    detail::emit(dir / "profile.csv", m, [&](std::ostream& os) { write_profile_csv(os, p); });
    detail::emit(dir / "mesh.obj", m, [&](std::ostream& os) {
        write_obj(os, extrude_parabolic(p, -1.0, 1.0, a.mesh_res, a.mesh_res));
    });
    detail::emit(dir / "residuals.csv", m, [&](std::ostream& os) { rep.write_csv(os); });

    auto& os = *ctx.out;
    detail::report_bracket(m, os, "lambda_minus", p.lambda_minus_bracket);
    detail::report_bracket(m, os, "lambda_plus", p.lambda_plus_bracket);
    m.set("profile.y_min", p.trajectory.t_front());
    m.set("profile.y_max", p.trajectory.t_back());
    m.set("residual.max", rep.max_abs_residual);
    m.set("residual.mean", rep.mean_abs_residual);
    m.set("residual.richardson_delta", rep.richardson_delta);
    os << "max_abs_residual: " << format_double(rep.max_abs_residual) << '\n';
    detail::write_manifest(dir, m, ctx, t0);
    return rep.max_abs_residual < ctx.tol.residual_tol ? ok : verification;
}

struct RotatorArgs {
    double h = 1.0;
    double mu0 = 1.0;
    double span = 50.0;
    int mesh_res = 200;
    int grid = 50;
    std::string out;
};

// Largest distance between the polar and Frenet reconstructions over the
// Frenet run's nodes.
inline double reconstruction_gap(const RotatorCurve& c) {
    double gap = 0.0;
    const auto& fr = c.frenet_trajectory;
    for (std::size_t i = 0; i < fr.size(); ++i) {
        const auto p = c.polar_point(fr.t(i));
        gap = std::max(gap, std::hypot(p[0] - fr.y(i, 0), p[1] - fr.y(i, 1)));
    }
    return gap;
}

inline int cmd_rotator(const RotatorArgs& a, const Context& ctx) {
    const auto t0 = detail::clock::now();
    detail::require_positive("--h", a.h);
    if (a.mu0 == 0.0 || !std::isfinite(a.mu0)) throw UsageError("--mu0 must be nonzero");
    detail::require_positive("--span", a.span);
    detail::require_grid("--mesh-res", a.mesh_res, 2);
    detail::require_grid("--grid", a.grid, 1);
    const auto dir = detail::prepare_dir(a.out);
    Manifest m;
    m.set("param.h", a.h);
    m.set("param.mu0", a.mu0);
    m.set("param.span", a.span);
    m.set("param.mesh_res", std::to_string(a.mesh_res));
    m.set("param.grid", std::to_string(a.grid));

    const auto c = integrate_rotator(a.h, 0.0, -a.mu0, a.span, ctx.tol);
    const auto surf = helicoid_surface(c);
    const auto rot = verify_soliton(surf, killing::Rotation{}, a.grid, a.grid, ctx.tol);
    const auto scl = verify_soliton(surf, scaled_down_translation(a.h), a.grid, a.grid, ctx.tol);
    double agreement = 0.0;
    for (std::size_t i = 0; i < rot.nodes.size(); ++i)
        agreement = std::max(agreement, std::abs(rot.nodes[i].residual - scl.nodes[i].residual));

    detail::emit(dir / "profile.csv", m, [&](std::ostream& os) { write_rotator_csv(os, c); });
    detail::emit(dir / "reconstruction.csv", m,
                 [&](std::ostream& os) { write_reconstruction_csv(os, c); });
    detail::emit(dir / "mesh.obj", m, [&](std::ostream& os) {
        write_obj(os, sweep_helicoid(c, surf.v0, surf.v1, a.mesh_res, std::max(2, a.mesh_res / 10)));
    });
    detail::emit(dir / "residuals.csv", m, [&](std::ostream& os) { rot.write_csv(os); });
    detail::emit(dir / "residuals_scaled.csv", m, [&](std::ostream& os) { scl.write_csv(os); });

    const double w_fwd = c.omega(c.S) - c.omega(c.tau_zero);
    const double w_bwd = c.omega(-c.S) - c.omega(c.tau_zero);
    auto& os = *ctx.out;
    m.set("tau_zero.count", std::to_string(c.tau_zeros.size()));
    m.set("tau_zero.s", c.tau_zero);
    m.set("omega_span.forward", w_fwd);
    m.set("omega_span.backward", w_bwd);
    m.set("reconstruction.max_gap", reconstruction_gap(c));
    m.set("residual.rotate.max", rot.max_abs_residual);
    m.set("residual.scaled.max", scl.max_abs_residual);
    m.set("residual.agreement", agreement);
    os << "tau_zeros: " << c.tau_zeros.size() << " (s = " << format_double(c.tau_zero) << ")\n"
       << "omega_span: forward " << format_double(w_fwd) << ", backward " << format_double(w_bwd) << '\n'
       << "max_abs_residual rotate: " << format_double(rot.max_abs_residual) << '\n'
       << "max_abs_residual scaled: " << format_double(scl.max_abs_residual) << '\n'
       << "field agreement: " << format_double(agreement) << '\n';
    detail::write_manifest(dir, m, ctx, t0);
    const bool pass = rot.max_abs_residual < ctx.tol.residual_tol &&
                      scl.max_abs_residual < ctx.tol.residual_tol;
    return pass ? ok : verification;
}

struct PhasePortraitArgs {
    double h = 1.0;
    int grid = 101;
    std::string out;
};

inline int cmd_phase_portrait(const PhasePortraitArgs& a, const Context& ctx) {
    detail::require_positive("--h", a.h);
    detail::require_grid("--grid", a.grid, 2);
    if (a.out.empty()) throw UsageError("--out is required");
    const auto arrows = phase_portrait(a.h, a.grid);
    std::ostringstream os;
    write_phase_csv(os, arrows);
    write_file_atomic(a.out, os.str());
    *ctx.out << "rows: " << arrows.size() << '\n';
    return ok;
}

struct SweepArgs {
    std::string family;
    std::vector<double> values;
    double span = 50.0;
    std::string out;
    unsigned threads = 0;  // 0: hardware concurrency
};

// Runs f(i) for i in [0, n) on a small thread pool; rethrows the first error.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto worker = [&] {
        for (std::size_t i; (i = next++) < n;) {
            try {
                f(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

inline int cmd_sweep(const SweepArgs& a, const Context& ctx) {
    if (a.out.empty()) throw UsageError("--out is required");
    if (a.values.empty()) throw UsageError("--values: empty list");
    const bool catenoid = a.family == "catenoid";
    if (!catenoid && a.family != "grim-reaper")
        throw UsageError("--family must be catenoid or grim-reaper");
    for (double v : a.values) {
        if (catenoid && (!(v > 0.0) || !std::isfinite(v)))
            throw UsageError("--values: catenoid needs r > 0, got " + format_double(v));
        if (!catenoid && (!(v >= 0.0) || !std::isfinite(v)))
            throw UsageError("--values: grim-reaper needs lambda >= 0, got " + format_double(v));
    }
    detail::require_positive("--span", a.span);

    std::vector<std::string> rows(a.values.size());
    parallel_for(a.values.size(), a.threads, [&](std::size_t i) {
        const double v = a.values[i];
        std::ostringstream os;
        os << format_double(v);
        if (catenoid) {
            const auto p = solve_catenoid(v, ctx.tol);
            const auto& lo = p.r_minus_bracket;
            const auto& hi = p.r_plus_bracket;
            os << ',' << format_double(lo.lo) << ',' << format_double(lo.hi) << ','
               << format_double(hi.lo) << ',' << format_double(hi.hi) << ','
               << format_double(v * (hi.hi - 1.0) / hi.hi);
        } else {
            const auto p = solve_grim_reaper(v, a.span, ctx.tol);
            const auto& lo = p.lambda_minus_bracket;
            const auto& hi = p.lambda_plus_bracket;
            os << ',' << format_double(lo.lo) << ',' << format_double(lo.hi) << ','
               << format_double(hi.lo) << ',' << format_double(hi.hi);
        }
        rows[i] = os.str();
    });
    std::ostringstream os;
    os << (catenoid ? "r,r_minus_lo,r_minus_hi,r_plus_lo,r_plus_hi,r_plus_rescaled\n"
                    : "lambda,lambda_minus_lo,lambda_minus_hi,lambda_plus_lo,lambda_plus_hi\n");
    for (const auto& r : rows) os << r << '\n';
    write_file_atomic(a.out, os.str());
    *ctx.out << "rows: " << rows.size() << '\n';
    return ok;
}

// horosphere:h | vertical-plane:theta | catenoid:r | grim-reaper:lambda |
// helicoid:h:mu0
inline ParamSurface parse_surface(const std::string& spec, const Tolerances& tol) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.empty()) throw UsageError("--surface: empty");
    const std::string& kind = parts[0];
    auto arg = [&](std::size_t i) { return parse_number("--surface", parts[i]); };
    auto arity = [&](std::size_t n) {
        if (parts.size() != n + 1)
            throw UsageError("--surface " + kind + ": expected " + std::to_string(n) + " parameter(s)");
    };
    if (kind == "horosphere") {
        arity(1);
        const double h = arg(1);
        detail::require_positive("--surface horosphere height", h);
        return horosphere_surface(h);
    }
    if (kind == "vertical-plane") {
        arity(1);
        const double th = arg(1);
        if (!std::isfinite(th)) throw UsageError("--surface vertical-plane: angle must be finite");
        return vertical_plane_surface(th);
    }
    if (kind == "catenoid") {
        arity(1);
        const double r = arg(1);
        detail::require_positive("--surface catenoid radius", r);
        return catenoid_surface(solve_catenoid(r, tol));
    }
    if (kind == "grim-reaper") {
        arity(1);
        const double l = arg(1);
        if (!(l >= 0.0) || !std::isfinite(l))
            throw UsageError("--surface grim-reaper: lambda must be >= 0 (negative slopes are "
                             "congruent to positive ones)");
        return grim_reaper_surface(solve_grim_reaper(l, 50.0, tol));
    }
    if (kind == "helicoid") {
        arity(2);
        const double h = arg(1), mu0 = arg(2);
        detail::require_positive("--surface helicoid pitch", h);
        if (mu0 == 0.0 || !std::isfinite(mu0)) throw UsageError("--surface helicoid: mu0 must be nonzero");
        return helicoid_surface(integrate_rotator(h, 0.0, -mu0, 50.0, tol));
    }
    throw UsageError("--surface: unknown kind '" + kind + "'");
}

inline KillingField parse_field(const std::string& spec) {
    if (spec == "translate") return killing::HyperbolicTranslation{};
    if (spec == "rotate") return killing::Rotation{};
    if (spec.rfind("scaled:", 0) == 0) {
        const double h = parse_number("--field", spec.substr(7));
        detail::require_positive("--field scaled pitch", h);
        return scaled_down_translation(h);
    }
    throw UsageError("--field must be translate, rotate or scaled:<h>");
}

struct VerifyArgs {
    std::string surface;
    std::string field = "translate";
    int grid = 50;
    std::string out;  // optional directory for residuals.csv and manifest.txt
};

inline int cmd_verify(const VerifyArgs& a, const Context& ctx) {
    const auto t0 = detail::clock::now();
    detail::require_grid("--grid", a.grid, 1);
    const auto field = parse_field(a.field);
    const auto surf = parse_surface(a.surface, ctx.tol);
    const auto rep = verify_soliton(surf, field, a.grid, a.grid, ctx.tol);
    rep.write_text(*ctx.out);
    const bool pass = rep.max_abs_residual < ctx.tol.residual_tol;
    *ctx.out << "verdict: " << (pass ? "pass" : "fail") << '\n';
    if (!a.out.empty()) {
        const auto dir = detail::prepare_dir(a.out);
        Manifest m;
        m.set("param.surface", a.surface);
        m.set("param.field", a.field);
        m.set("param.grid", std::to_string(a.grid));
        detail::emit(dir / "residuals.csv", m, [&](std::ostream& os) { rep.write_csv(os); });
        m.set("residual.max", rep.max_abs_residual);
        m.set("residual.mean", rep.mean_abs_residual);
        m.set("verdict", pass ? "pass" : "fail");
        detail::write_manifest(dir, m, ctx, t0);
    }
    return pass ? ok : verification;
}

// Maps library and usage errors onto the exit-code contract.
template <class F>
int guarded(std::ostream& err, F&& f) {
    try {
        return f();
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        err << "construction failed: " << e.what() << '\n';
        return construction;
    }
}

}  // namespace hypsol::cli

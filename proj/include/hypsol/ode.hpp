#pragma once

// Adaptive explicit Runge-Kutta integration (Dormand-Prince 5(4)) with a
// C^1 quartic continuous extension, terminal events located by bisection on
// the dense output, and graceful stops on blow-up or on leaving the domain of
// the right-hand side.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hypsol/error.hpp"

namespace hypsol::ode {

using State = std::vector<double>;

// dydt <- f(t, y). A right-hand side may signal that (t, y) is outside its
// domain either by throwing DomainError or by writing non-finite values.
using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

// Scalar functional of a state, used for events and zero location.
using Functional = std::function<double(double t, std::span<const double> y)>;

enum class Direction { forward, backward };

struct OdeProblem {
    std::size_t dimension = 0;
    Rhs rhs;
    double t0 = 0.0;
    State y0;
    Direction direction = Direction::forward;
};

// Terminal event: integration stops at the first sign change of `g`.
struct Event {
    std::string name;
    Functional g;
};

struct IntegrationConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double min_step = 1e-12;
    long max_steps = 1'000'000;
    std::vector<Event> stop_events;
    double event_tol = 1e-12;
};

enum class StopKind { event, max_time, max_steps, blow_up, domain_exit };

struct StopReason {
    StopKind kind = StopKind::max_time;
    std::string event_name;  // set when kind == event

    std::string to_string() const {
        switch (kind) {
            case StopKind::event: return "event(" + event_name + ")";
            case StopKind::max_time: return "max_time";
            case StopKind::max_steps: return "max_steps";
            case StopKind::blow_up: return "blow_up";
            case StopKind::domain_exit: return "domain_exit";
        }
        return "unknown";
    }
};

struct Sample {
    double t;
    State y;
    State dy;
};

// Dense-output polynomial of one accepted step, valid on the closed interval
// between t_begin and t_end (t_end may be short of t_start + h when an event
// truncated the step).
struct Segment {
    double t_start = 0.0;
    double h = 0.0;
    double t_end = 0.0;
    std::vector<double> coeff;  // 5 * dim
};

class Trajectory {
public:
    Trajectory() = default;
    explicit Trajectory(std::size_t dim) : dim_(dim) {}

    std::size_t dimension() const { return dim_; }
    std::size_t size() const { return t_.size(); }
    bool empty() const { return t_.empty(); }

    double t(std::size_t i) const { return t_[i]; }
    std::span<const double> y(std::size_t i) const { return {y_.data() + i * dim_, dim_}; }
    std::span<const double> dy(std::size_t i) const { return {dy_.data() + i * dim_, dim_}; }
    double y(std::size_t i, std::size_t c) const { return y_[i * dim_ + c]; }
    double dy(std::size_t i, std::size_t c) const { return dy_[i * dim_ + c]; }
    Sample sample(std::size_t i) const {
        return {t_[i], State(y(i).begin(), y(i).end()), State(dy(i).begin(), dy(i).end())};
    }

    double t_front() const { return t_.front(); }
    double t_back() const { return t_.back(); }
    double t_min() const { return std::min(t_.front(), t_.back()); }
    double t_max() const { return std::max(t_.front(), t_.back()); }
    bool increasing() const { return t_.size() < 2 || t_.back() > t_.front(); }
    const std::vector<Segment>& segments() const { return segments_; }

    // Why integration stopped at t_back(), and, for joined trajectories,
    // why the backward half stopped at t_front().
    StopReason stop_reason;
    std::optional<StopReason> front_stop_reason;

    bool contains(double t) const { return t >= t_min() && t <= t_max(); }

    State eval(double t) const {
        State out(dim_);
        eval_into(t, out, false);
        return out;
    }
    double eval(double t, std::size_t c) const { return eval(t)[c]; }
    State eval_derivative(double t) const {
        State out(dim_);
        eval_into(t, out, true);
        return out;
    }

    // Build a forward-ordered trajectory from two halves integrated away from
    // a common initial node: `backward` decreasing from t0, `forward`
    // increasing from t0.
    static Trajectory join(const Trajectory& backward, const Trajectory& forward) {
        if (backward.dim_ != forward.dim_ || backward.empty() || forward.empty())
            throw ContractViolation("Trajectory::join: incompatible halves");
        if (backward.t_front() != forward.t_front())
            throw ContractViolation("Trajectory::join: halves do not share the initial node");
        if (backward.size() > 1 && backward.increasing())
            throw ContractViolation("Trajectory::join: first half must run backward");
        if (forward.size() > 1 && !forward.increasing())
            throw ContractViolation("Trajectory::join: second half must run forward");
        Trajectory out(forward.dim_);
        for (std::size_t i = backward.size(); i-- > 0;)
            out.push_node(backward.t(i), backward.y(i), backward.dy(i));
        for (std::size_t i = 1; i < forward.size(); ++i)
            out.push_node(forward.t(i), forward.y(i), forward.dy(i));
        for (std::size_t i = backward.segments_.size(); i-- > 0;)
            out.segments_.push_back(backward.segments_[i]);
        for (const auto& s : forward.segments_) out.segments_.push_back(s);
        out.stop_reason = forward.stop_reason;
        out.front_stop_reason = backward.stop_reason;
        return out;
    }

    // Internal building blocks used by integrate().
    void push_node(double t, std::span<const double> y, std::span<const double> dy) {
        t_.push_back(t);
        y_.insert(y_.end(), y.begin(), y.end());
        dy_.insert(dy_.end(), dy.begin(), dy.end());
    }
    void push_segment(Segment s) { segments_.push_back(std::move(s)); }
    void pop_node() {
        t_.pop_back();
        y_.resize(y_.size() - dim_);
        dy_.resize(dy_.size() - dim_);
    }
    Segment& last_segment() { return segments_.back(); }

    static void eval_segment(const Segment& s, std::size_t dim, double t, std::span<double> out,
                             bool derivative) {
        const double th = (t - s.t_start) / s.h;
        const double th1 = 1.0 - th;
        const double* r = s.coeff.data();
        for (std::size_t i = 0; i < dim; ++i) {
            const double r1 = r[i], r2 = r[dim + i], r3 = r[2 * dim + i], r4 = r[3 * dim + i],
                         r5 = r[4 * dim + i];
            if (!derivative) {
                out[i] = r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
            } else {
                // d/dt of the quartic in theta
                const double inner = r4 + th1 * r5;                  // q(th)
                const double mid = r3 + th * inner;                  // p(th)
                const double dmid = inner + th * (-r5);              // p'(th)
                const double outer = r2 + th1 * mid;                 // o(th)
                const double douter = -mid + th1 * dmid;             // o'(th)
                out[i] = (outer + th * douter) / s.h;
            }
        }
    }

private:
    void eval_into(double t, std::span<double> out, bool derivative) const {
        if (empty()) throw ContractViolation("Trajectory::eval on empty trajectory");
        if (!contains(t))
            throw ContractViolation("Trajectory::eval: t=" + std::to_string(t) +
                                    " outside the integrated range");
        // index of the first node not before t in integration order
        const bool inc = increasing();
        auto it = inc ? std::lower_bound(t_.begin(), t_.end(), t)
                      : std::lower_bound(t_.begin(), t_.end(), t, std::greater<double>());
        const std::size_t k = static_cast<std::size_t>(it - t_.begin());
        if (k < t_.size() && t_[k] == t) {
            const auto src = derivative ? dy(k) : y(k);
            std::copy(src.begin(), src.end(), out.begin());
            return;
        }
        // t lies strictly between nodes k-1 and k
        eval_segment(segments_[k - 1], dim_, t, out, derivative);
    }

    std::size_t dim_ = 0;
    std::vector<double> t_;
    std::vector<double> y_;
    std::vector<double> dy_;
    std::vector<Segment> segments_;
};

namespace detail {

// Dormand-Prince 5(4) tableau with Shampine's dense-output coefficients.
struct DoPri {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432.0,
                            d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0,
                            d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

inline bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Evaluates f, mapping DomainError to non-finite output.
inline bool safe_eval(const Rhs& f, double t, std::span<const double> y, std::span<double> out) {
    if (!all_finite(y)) return false;
    try {
        f(t, y, out);
    } catch (const DomainError&) {
        return false;
    }
    return all_finite(out);
}

// Core stepping loop. `accept(seg, t, y, dy)` is called once per accepted
// step with the dense-output segment and the new node; when a terminal event
// truncates the step, the segment's t_end and the node are already moved to
// the event time. Returns the stop reason; `t`/`y`/`dy` hold the last node.
template <class Accept>
StopReason drive(const OdeProblem& p, const IntegrationConfig& c, double t_end, double& t,
                 State& y, State& k1, long& steps, Accept&& accept) {
    const std::size_t n = p.dimension;
    const double sign = p.direction == Direction::forward ? 1.0 : -1.0;
    State ynew(n), ytmp(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ym(n);
    Segment seg;
    seg.coeff.resize(5 * n);

    if (t_end == t) return {StopKind::max_time, {}};

    std::vector<double> g_prev(c.stop_events.size());
    for (std::size_t e = 0; e < c.stop_events.size(); ++e) g_prev[e] = c.stop_events[e].g(t, y);

    auto scale = [&](double a, double b) {
        return c.abs_tol + c.rel_tol * std::max(std::abs(a), std::abs(b));
    };

    // Initial step (Hairer, Norsett & Wanner, II.4).
    double h;
    {
        double d0 = 0, d1 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sk = scale(y[i], y[i]);
            d0 += (y[i] / sk) * (y[i] / sk);
            d1 += (k1[i] / sk) * (k1[i] / sk);
        }
        d0 = std::sqrt(d0 / n);
        d1 = std::sqrt(d1 / n);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min({h0, c.max_step, std::abs(t_end - t)});
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + sign * h0 * k1[i];
        double d2 = 0;
        if (safe_eval(p.rhs, t + sign * h0, ytmp, k2)) {
            for (std::size_t i = 0; i < n; ++i) {
                const double sk = scale(y[i], y[i]);
                d2 += ((k2[i] - k1[i]) / sk) * ((k2[i] - k1[i]) / sk);
            }
            d2 = std::sqrt(d2 / n) / h0;
        }
        const double dm = std::max(d1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        h = std::min({100.0 * h0, h1, c.max_step});
        h = std::max(h, c.min_step);
    }

    bool last_rejected = false;
    while (true) {
        if (steps >= c.max_steps) return {StopKind::max_steps, {}};
        const double remaining = std::abs(t_end - t);
        bool hits_end = false;
        if (h >= remaining) {
            h = remaining;
            hits_end = true;
        }
        const double hs = sign * h;
        if (t + hs == t) return {StopKind::blow_up, {}};

        bool ok = true;
        auto stage = [&](double ct, State& out, auto&& combine) {
            if (!ok) return;
            for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * combine(i);
            ok = safe_eval(p.rhs, t + ct * hs, ytmp, out);
        };
        stage(DoPri::c2, k2, [&](std::size_t i) { return DoPri::a21 * k1[i]; });
        stage(DoPri::c3, k3, [&](std::size_t i) { return DoPri::a31 * k1[i] + DoPri::a32 * k2[i]; });
        stage(DoPri::c4, k4, [&](std::size_t i) {
            return DoPri::a41 * k1[i] + DoPri::a42 * k2[i] + DoPri::a43 * k3[i];
        });
        stage(DoPri::c5, k5, [&](std::size_t i) {
            return DoPri::a51 * k1[i] + DoPri::a52 * k2[i] + DoPri::a53 * k3[i] +
                   DoPri::a54 * k4[i];
        });
        stage(1.0, k6, [&](std::size_t i) {
            return DoPri::a61 * k1[i] + DoPri::a62 * k2[i] + DoPri::a63 * k3[i] +
                   DoPri::a64 * k4[i] + DoPri::a65 * k5[i];
        });
        const double tnew = hits_end ? t_end : t + hs;
        if (ok) {
            for (std::size_t i = 0; i < n; ++i)
                ynew[i] = y[i] + hs * (DoPri::a71 * k1[i] + DoPri::a73 * k3[i] +
                                       DoPri::a74 * k4[i] + DoPri::a75 * k5[i] +
                                       DoPri::a76 * k6[i]);
            ok = safe_eval(p.rhs, tnew, ynew, k7);
        }
        if (!ok) {
            // trial point left the admissible region: shrink and retry
            h *= 0.25;
            last_rejected = true;
            if (h < c.min_step) return {StopKind::domain_exit, {}};
            continue;
        }

        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ei = hs * (DoPri::e1 * k1[i] + DoPri::e3 * k3[i] + DoPri::e4 * k4[i] +
                                    DoPri::e5 * k5[i] + DoPri::e6 * k6[i] + DoPri::e7 * k7[i]);
            const double sk = scale(y[i], ynew[i]);
            err += (ei / sk) * (ei / sk);
        }
        err = std::sqrt(err / n);
        ++steps;

        if (!(err <= 1.0)) {
            const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
            h *= fac;
            last_rejected = true;
            if (h < c.min_step) return {StopKind::blow_up, {}};
            continue;
        }

        // accepted: build the continuous extension
        seg.t_start = t;
        seg.h = tnew - t;
        seg.t_end = tnew;
        for (std::size_t i = 0; i < n; ++i) {
            const double dy = ynew[i] - y[i];
            const double bspl = seg.h * k1[i] - dy;
            seg.coeff[i] = y[i];
            seg.coeff[n + i] = dy;
            seg.coeff[2 * n + i] = bspl;
            seg.coeff[3 * n + i] = dy - seg.h * k7[i] - bspl;
            seg.coeff[4 * n + i] =
                seg.h * (DoPri::d1 * k1[i] + DoPri::d3 * k3[i] + DoPri::d4 * k4[i] +
                         DoPri::d5 * k5[i] + DoPri::d6 * k6[i] + DoPri::d7 * k7[i]);
        }

        // terminal events: earliest sign change within this step
        std::optional<std::pair<double, std::size_t>> hit;
        for (std::size_t e = 0; e < c.stop_events.size(); ++e) {
            const double g_new = c.stop_events[e].g(tnew, ynew);
            const double g_old = g_prev[e];
            g_prev[e] = g_new;
            const bool crossed = (g_new == 0.0 && g_old != 0.0) || (g_old < 0.0 && g_new > 0.0) ||
                                 (g_old > 0.0 && g_new < 0.0);
            if (!crossed) continue;
            double te = tnew;  // ties resolve to the node
            if (g_new != 0.0) {
                double lo = t, hi = tnew, glo = g_old;
                while (std::abs(hi - lo) > c.event_tol) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid == lo || mid == hi) break;
                    Trajectory::eval_segment(seg, n, mid, ym, false);
                    const double gm = c.stop_events[e].g(mid, ym);
                    if (gm == 0.0) {
                        hi = mid;
                        break;
                    }
                    if ((gm < 0.0) == (glo < 0.0)) {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                }
                te = hi;
            }
            if (!hit || sign * (te - hit->first) < 0.0) hit = std::make_pair(te, e);
        }
        if (hit) {
            const double te = hit->first;
            if (te != tnew) {
                seg.t_end = te;
                Trajectory::eval_segment(seg, n, te, ynew, false);
                if (!safe_eval(p.rhs, te, ynew, k7)) Trajectory::eval_segment(seg, n, te, k7, true);
            }
            accept(seg, te, ynew, k7);
            t = te;
            y.swap(ynew);
            k1.swap(k7);
            return {StopKind::event, c.stop_events[hit->second].name};
        }

        accept(seg, tnew, ynew, k7);
        t = tnew;
        y.swap(ynew);
        k1.swap(k7);  // FSAL
        if (hits_end) return {StopKind::max_time, {}};

        double fac = err == 0.0 ? 10.0 : std::min(10.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
        if (last_rejected) fac = std::min(fac, 1.0);
        last_rejected = false;
        h = std::min(h * fac, c.max_step);
        if (h < c.min_step) h = c.min_step;
    }
}

inline void check_problem(const OdeProblem& p, const IntegrationConfig& c, double t_end) {
    if (p.dimension == 0 || p.y0.size() != p.dimension)
        throw ContractViolation("integrate: y0 has wrong dimension");
    if (!p.rhs) throw ContractViolation("integrate: missing right-hand side");
    if (!(c.rel_tol > 0.0) || !(c.abs_tol > 0.0))
        throw ContractViolation("integrate: tolerances must be positive");
    if (!(c.min_step > 0.0) || !(c.min_step <= c.max_step))
        throw ContractViolation("integrate: need 0 < min_step <= max_step");
    const double sign = p.direction == Direction::forward ? 1.0 : -1.0;
    if (!(sign * (t_end - p.t0) >= 0.0))
        throw ContractViolation("integrate: t_end lies on the wrong side of t0");
}

}  // namespace detail

inline Trajectory integrate(const OdeProblem& p, const IntegrationConfig& c, double t_end) {
    detail::check_problem(p, c, t_end);
    const std::size_t n = p.dimension;
    Trajectory tr(n);
    double t = p.t0;
    State y = p.y0, k1(n);
    if (!detail::safe_eval(p.rhs, t, y, k1)) {
        tr.push_node(t, y, State(n, std::numeric_limits<double>::quiet_NaN()));
        tr.stop_reason = {StopKind::domain_exit, {}};
        return tr;
    }
    tr.push_node(t, y, k1);
    long steps = 0;
    tr.stop_reason = detail::drive(
        p, c, t_end, t, y, k1, steps,
        [&tr](const Segment& seg, double tn, const State& yn, const State& dyn) {
            tr.push_segment(seg);
            tr.push_node(tn, yn, dyn);
        });
    return tr;
}

// Last node of an integration that keeps no history; for very long runs
// where only the end state matters.
struct FinalState {
    double t = 0.0;
    State y;
    State dy;
    StopReason stop_reason;
    long steps = 0;  // attempted steps, rejections included
};

inline FinalState integrate_final(const OdeProblem& p, const IntegrationConfig& c, double t_end) {
    detail::check_problem(p, c, t_end);
    FinalState out;
    out.t = p.t0;
    out.y = p.y0;
    out.dy.assign(p.dimension, 0.0);
    if (!detail::safe_eval(p.rhs, out.t, out.y, out.dy)) {
        out.stop_reason = {StopKind::domain_exit, {}};
        return out;
    }
    out.stop_reason = detail::drive(p, c, t_end, out.t, out.y, out.dy, out.steps,
                                    [](const Segment&, double, const State&, const State&) {});
    return out;
}

// Sign-change roots of a scalar functional along the dense output, each
// bisected to `tol` in t. A functional that vanishes exactly at a node
// reports that node once.
inline std::vector<double> locate_zero(const Trajectory& tr, const Functional& g,
                                       double tol = 1e-12) {
    if (tr.empty()) throw ContractViolation("locate_zero: empty trajectory");
    std::vector<double> roots;
    const std::size_t n = tr.dimension();
    double g_prev = g(tr.t(0), tr.y(0));
    if (g_prev == 0.0) roots.push_back(tr.t(0));
    State ym(n);
    for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
        const double g_next = g(tr.t(i + 1), tr.y(i + 1));
        if (g_next == 0.0) {
            roots.push_back(tr.t(i + 1));
        } else if ((g_prev < 0.0 && g_next > 0.0) || (g_prev > 0.0 && g_next < 0.0)) {
            const Segment& s = tr.segments()[i];
            double lo = tr.t(i), hi = tr.t(i + 1), glo = g_prev;
            while (std::abs(hi - lo) > tol) {
                const double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) break;
                Trajectory::eval_segment(s, n, mid, ym, false);
                const double gm = g(mid, ym);
                if (gm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if ((gm < 0.0) == (glo < 0.0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            roots.push_back(0.5 * (lo + hi));
        }
        g_prev = g_next;
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

inline std::vector<double> locate_zero(const Trajectory& tr, std::size_t component,
                                       double tol = 1e-12) {
    if (component >= tr.dimension()) throw ContractViolation("locate_zero: bad component");
    return locate_zero(
        tr, [component](double, std::span<const double> y) { return y[component]; }, tol);
}

}  // namespace hypsol::ode

#ifndef QTRAJ_TRAJECTORIES_HPP
#define QTRAJ_TRAJECTORIES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qtraj/energy_variation.hpp"
#include "qtraj/errors.hpp"
#include "qtraj/numerics.hpp"
#include "qtraj/qshje_microstates.hpp"
#include "qtraj/schrodinger1d.hpp"

namespace qtraj {

struct TrajectoryState
{
    double t = 0.0;
    double q = 0.0;
    double v = 0.0;
    double t_q = 0.0;
    double dtde = numerics::nan;
    double dqde = numerics::nan;
};

enum class EventKind { TanPole, DTdEZero, DomainExit, SingularVelocity, StepUnderflow, StepLimit };

inline const char* to_string(EventKind k)
{
    switch (k) {
        case EventKind::TanPole: return "TanPole";
        case EventKind::DTdEZero: return "DTdEZero";
        case EventKind::DomainExit: return "DomainExit";
        case EventKind::SingularVelocity: return "SingularVelocity";
        case EventKind::StepUnderflow: return "StepUnderflow";
        case EventKind::StepLimit: return "StepLimit";
    }
    return "?";
}

struct TrajectoryEvent
{
    double t = 0.0;
    EventKind kind = EventKind::DomainExit;
    double q = 0.0;
    std::string detail;
};

enum class Method { RK4, RK45 };

struct IntegratorConfig
{
    Method method = Method::RK45;
    double dt = 1e-3;        // RK4 step, RK45 first trial step
    double abs_tol = 1e-9;
    double rel_tol = 0.0;
    double max_step = 0.05;
    double min_step = 1e-14;
    std::size_t max_steps = 2'000'000;
    double velocity_cap = 1e6;
    double event_tol = 1e-12;
    /// Output spacing in time; 0 records every accepted step.
    double sample_dt = 0.0;

    void validate() const
    {
        if (!(dt > 0.0) || !(abs_tol > 0.0) || rel_tol < 0.0 || !(max_step > 0.0) || !(min_step > 0.0)
            || !(velocity_cap > 0.0) || !(event_tol > 0.0) || sample_dt < 0.0 || max_steps == 0)
            raise(ErrorKind::InvalidArgument, "integrator settings must be positive");
    }
};

struct TrajectoryResult
{
    std::vector<TrajectoryState> samples; // in integration order
    std::vector<TrajectoryEvent> events;
    std::string provenance;
    bool completed = false;
    std::size_t steps = 0;

    const TrajectoryState& last() const { return samples.back(); }

    bool has_event(EventKind k) const
    {
        return std::any_of(events.begin(), events.end(), [k](const TrajectoryEvent& e) { return e.kind == k; });
    }
};

/// dT/dE and the tan-argument cosine at a point of a flow, when known.
struct FlowMonitor
{
    double dtde = numerics::nan;
    double cos_phase = 1.0;
};

/// A velocity field dq/dt = v(q, t) on [q_min, q_max].
struct Flow
{
    std::function<double(double, double)> velocity;
    std::function<FlowMonitor(double, double)> monitor; // may be empty
    double q_min = -std::numeric_limits<double>::infinity();
    double q_max = std::numeric_limits<double>::infinity();
    std::string label;
};

/// Phase gradient W' = hbar Im(psi'/psi) of a sampled wave function and its
/// running integral W anchored at the grid midpoint. Zero where psi vanishes.
inline RealField phase_field(const ComplexField& psi, const Units& units = {})
{
    RealField w(psi.grid);
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double n2 = std::norm(psi.values[i]);
        w.derivative[i] = n2 > 0.0 ? units.hbar * std::imag(std::conj(psi.values[i]) * psi.derivative[i]) / n2 : 0.0;
    }
    w.values = numerics::cumulative_integral(w.derivative, psi.grid.spacing(), psi.grid.midpoint_index());
    return w;
}

/// v = W'/m from the phase of the wave function (not a microstate).
inline double bohm_velocity(const RealField& phase, double q, const Units& units = {})
{
    return numerics::lagrange4(phase.grid, phase.derivative, q) / units.mass;
}

inline double bohm_velocity(const ScatteringState& state, double q) { return state.momentum(q) / state.units.mass; }

/// v = W'/(m dT/dE) for a microstate under the model.
inline double floyd_velocity(const VariationModel& model, double q, double t) { return model.velocity(q, t); }

inline Flow floyd_flow(const VariationModel& model)
{
    Flow f;
    f.velocity = [model](double q, double t) { return model.velocity(q, t); };
    f.monitor = [model](double q, double t) {
        const auto p = model.at(q, t);
        return FlowMonitor{p.dtde, p.cos_phase};
    };
    f.q_min = model.q_min();
    f.q_max = model.q_max();
    f.label = "floyd " + model.describe();
    return f;
}

/// Bohm flow of an unbound stationary state; the monitor reports the
/// continuum dT/dE of the same system.
inline Flow bohm_flow(const ContinuumSystem& sys)
{
    Flow f;
    f.velocity = [state = sys.state](double q, double) { return bohm_velocity(state, q); };
    f.monitor = [sys](double q, double) { return FlowMonitor{delta_T_delta_E_continuum(sys, q), 1.0}; };
    f.q_min = sys.spec.q_min;
    f.q_max = sys.spec.q_max;
    f.label = "bohm continuum";
    return f;
}

/// Bohm flow of a sampled wave function. For real stationary states the
/// phase is constant, so dT/dE = (W'/m) d/dq(dW/dE) = 0.
inline Flow bohm_flow(const RealField& phase, const Units& units = {})
{
    Flow f;
    f.velocity = [phase, units](double q, double) { return bohm_velocity(phase, q, units); };
    bool stationary = std::all_of(phase.derivative.begin(), phase.derivative.end(), [](double x) { return x == 0.0; });
    if (stationary)
        f.monitor = [](double, double) { return FlowMonitor{0.0, 1.0}; };
    f.q_min = phase.grid.q_min;
    f.q_max = phase.grid.q_max;
    f.label = "bohm wave";
    return f;
}

/// Classical motion at energy E in the positive direction.
inline Flow classical_flow(const PotentialSpec& spec, double E, const Units& units = {})
{
    Flow f;
    f.velocity = [spec, E, units](double q, double) {
        const double k = E - evaluate_potential(spec, std::clamp(q, spec.q_min, spec.q_max), units);
        return std::sqrt(2.0 * std::max(k, 0.0) / units.mass);
    };
    f.monitor = [](double, double) { return FlowMonitor{1.0, 1.0}; };
    f.q_min = spec.q_min;
    f.q_max = spec.q_max;
    f.label = "classical";
    return f;
}

namespace detail {

inline double hermite_step(double t0, double q0, double v0, double t1, double q1, double v1, double t)
{
    const double h = t1 - t0;
    const double x = (t - t0) / h;
    const double x2 = x * x, x3 = x2 * x;
    return (2 * x3 - 3 * x2 + 1) * q0 + (x3 - 2 * x2 + x) * h * v0 + (-2 * x3 + 3 * x2) * q1 + (x3 - x2) * h * v1;
}

/// Root of g on [a, b] (either order) by bisection, given a sign change.
template <class G>
double locate(G&& g, double a, double b, double tol)
{
    double ga = g(a);
    for (int it = 0; it < 200 && std::abs(b - a) > tol; ++it) {
        const double m = 0.5 * (a + b);
        const double gm = g(m);
        if ((gm < 0.0) == (ga < 0.0)) {
            a = m;
            ga = gm;
        }
        else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

} // namespace detail

/// Integrates dq/dt = flow.velocity(q, t) from (q0, t0) to t1 (t1 < t0 runs
/// backward). Domain exit, velocities above the cap and step underflow end
/// the run with an event; dT/dE zeros and tan poles seen by the monitor are
/// recorded and the run continues.
inline TrajectoryResult integrate_trajectory(const Flow& flow, double q0, double t0, double t1,
                                             const IntegratorConfig& cfg = {})
{
    cfg.validate();
    if (!flow.velocity)
        raise(ErrorKind::InvalidArgument, "flow has no velocity rule");
    if (!(q0 >= flow.q_min && q0 <= flow.q_max))
        raise(ErrorKind::Domain, "initial position outside the flow domain");
    if (t1 == t0)
        raise(ErrorKind::InvalidArgument, "empty time span");

    TrajectoryResult res;
    res.provenance = flow.label;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    auto vel = [&](double q, double t) { return flow.velocity(q, t); };
    auto bad = [&](double v) { return !std::isfinite(v) || std::abs(v) > cfg.velocity_cap; };
    auto outside = [&](double q) { return q < flow.q_min || q > flow.q_max; };

    double t = t0, q = q0, v = vel(q0, t0);
    FlowMonitor mon = flow.monitor ? flow.monitor(q, t) : FlowMonitor{};
    res.samples.push_back({t, q, v, t, mon.dtde, delta_Q_delta_E(mon.dtde)});
    if (bad(v)) {
        res.events.push_back({t, EventKind::SingularVelocity, q, "velocity not finite at the start"});
        return res;
    }
    std::size_t n_out = 1;
    double next_sample = t0 + dir * cfg.sample_dt;

    auto emit = [&](double ta, double qa, double va, double tb, double qb, double vb) {
        if (cfg.sample_dt <= 0.0) {
            res.samples.push_back({tb, qb, vb, tb, numerics::nan, numerics::nan});
            return;
        }
        while (dir * (tb - next_sample) >= -1e-12 * cfg.sample_dt) {
            const double ts = next_sample;
            const double qs = std::abs(ts - tb) <= 1e-12 * cfg.sample_dt
                                  ? qb
                                  : detail::hermite_step(ta, qa, va, tb, qb, vb, ts);
            res.samples.push_back({ts, qs, vel(qs, ts), ts, numerics::nan, numerics::nan});
            next_sample = t0 + dir * cfg.sample_dt * static_cast<double>(++n_out);
        }
    };

    auto check_monitor = [&](double ta, double qa, double va, double tb, double qb, double vb, FlowMonitor ma,
                             FlowMonitor mb) {
        auto qat = [&](double s) { return detail::hermite_step(ta, qa, va, tb, qb, vb, s); };
        if (std::isfinite(ma.dtde) && std::isfinite(mb.dtde) && (ma.dtde < 0.0) != (mb.dtde < 0.0)) {
            const double ts = detail::locate([&](double s) { return flow.monitor(qat(s), s).dtde; }, ta, tb,
                                             cfg.event_tol);
            res.events.push_back({ts, EventKind::DTdEZero, qat(ts), "dT/dE changes sign"});
        }
        if ((ma.cos_phase < 0.0) != (mb.cos_phase < 0.0)) {
            const double ts = detail::locate([&](double s) { return flow.monitor(qat(s), s).cos_phase; }, ta, tb,
                                             cfg.event_tol);
            res.events.push_back({ts, EventKind::TanPole, qat(ts), "tan argument crosses a pole"});
        }
    };

    // Dormand-Prince 5(4) tableau
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    double h = dir * std::min(cfg.dt, cfg.max_step);
    while (dir * (t1 - t) > 0.0) {
        if (res.steps >= cfg.max_steps) {
            res.events.push_back({t, EventKind::StepLimit, q, "maximum step count reached"});
            return res;
        }
        const double remaining = std::abs(t1 - t);
        if (std::abs(h) > remaining)
            h = dir * remaining;
        if (std::abs(h) > cfg.max_step)
            h = dir * cfg.max_step;

        double q_new = q, v_new = 0.0, err = 0.0;
        bool stage_bad = false;
        if (cfg.method == Method::RK4) {
            const double k1 = v;
            const double k2 = vel(q + 0.5 * h * k1, t + 0.5 * h);
            const double k3 = vel(q + 0.5 * h * k2, t + 0.5 * h);
            const double k4 = vel(q + h * k3, t + h);
            stage_bad = bad(k2) || bad(k3) || bad(k4);
            q_new = q + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
            if (!stage_bad)
                v_new = vel(q_new, t + h);
        }
        else {
            const double k1 = v;
            const double k2 = vel(q + h * a21 * k1, t + c2 * h);
            const double k3 = vel(q + h * (a31 * k1 + a32 * k2), t + c3 * h);
            const double k4 = vel(q + h * (a41 * k1 + a42 * k2 + a43 * k3), t + c4 * h);
            const double k5 = vel(q + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), t + c5 * h);
            const double k6 = vel(q + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), t + h);
            q_new = q + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            stage_bad = bad(k2) || bad(k3) || bad(k4) || bad(k5) || bad(k6);
            if (!stage_bad) {
                v_new = vel(q_new, t + h);
                err = std::abs(h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * v_new));
            }
        }
        if (!stage_bad && bad(v_new) && !outside(q_new))
            stage_bad = true;
        const double tol = cfg.abs_tol + cfg.rel_tol * std::abs(q);
        const bool accept = !stage_bad && std::isfinite(q_new) && (cfg.method == Method::RK4 || err <= tol);

        if (!accept) {
            if (cfg.method == Method::RK4 && !stage_bad) {
                res.events.push_back({t, EventKind::StepUnderflow, q, "non-finite RK4 step"});
                return res;
            }
            if (cfg.method == Method::RK4) {
                res.events.push_back({t, EventKind::SingularVelocity, q, "velocity exceeds the cap within a step"});
                return res;
            }
            h *= stage_bad ? 0.25 : std::clamp(0.9 * std::pow(tol / err, 0.2), 0.1, 0.9);
            if (std::abs(h) < cfg.min_step) {
                std::ostringstream os;
                os << "step below " << cfg.min_step << " at |v| = " << std::abs(v);
                res.events.push_back(
                    {t, stage_bad ? EventKind::SingularVelocity : EventKind::StepUnderflow, q, os.str()});
                return res;
            }
            continue;
        }

        ++res.steps;
        const double t_new = t + h;
        if (outside(q_new)) {
            const double wall = q_new > flow.q_max ? flow.q_max : flow.q_min;
            const double te = detail::locate(
                [&](double s) { return detail::hermite_step(t, q, v, t_new, q_new, v_new, s) - wall; }, t, t_new,
                cfg.event_tol);
            const double ve = vel(wall, te);
            emit(t, q, v, te, wall, ve);
            if (cfg.sample_dt > 0.0 && res.samples.back().t != te)
                res.samples.push_back({te, wall, ve, te, numerics::nan, numerics::nan});
            res.events.push_back({te, EventKind::DomainExit, wall, "left the domain"});
            break;
        }
        if (flow.monitor)
            check_monitor(t, q, v, t_new, q_new, v_new, flow.monitor(q, t), flow.monitor(q_new, t_new));
        emit(t, q, v, t_new, q_new, v_new);
        t = t_new;
        q = q_new;
        v = v_new;
        if (cfg.method == Method::RK45 && err > 0.0)
            h *= std::clamp(0.9 * std::pow(tol / err, 0.2), 0.2, 5.0);
        else if (cfg.method == Method::RK45)
            h *= 5.0;
    }
    if (cfg.sample_dt > 0.0 && res.samples.back().t != t && res.events.empty())
        res.samples.push_back({t, q, v, t, numerics::nan, numerics::nan});
    res.completed = !std::any_of(res.events.begin(), res.events.end(), [](const TrajectoryEvent& e) {
        return e.kind != EventKind::TanPole && e.kind != EventKind::DTdEZero;
    });

    if (flow.monitor) {
        for (auto& s : res.samples) {
            const auto m = flow.monitor(s.q, s.t);
            s.dtde = m.dtde;
            s.dqde = delta_Q_delta_E(m.dtde);
        }
    }
    return res;
}

/// t_Q(t) = t_Q(t0) + integral of (1 - dQ/dE) dt along the samples
/// (trapezoid rule). Samples where dQ/dE is undefined carry the last value.
inline TrajectoryResult quantum_time_along(TrajectoryResult result, const std::function<double(double, double)>& dqde_rule)
{
    if (result.samples.empty())
        return result;
    auto& s = result.samples;
    for (auto& x : s) {
        x.dqde = dqde_rule(x.q, x.t);
        x.dtde = 1.0 - x.dqde;
    }
    s[0].t_q = s[0].t;
    for (std::size_t k = 1; k < s.size(); ++k) {
        const double a = s[k - 1].dtde, b = s[k].dtde;
        double inc = 0.0;
        if (std::isfinite(a) && std::isfinite(b))
            inc = 0.5 * (s[k].t - s[k - 1].t) * (a + b);
        s[k].t_q = s[k - 1].t_q + inc;
    }
    return result;
}

/// Same as above, using the dT/dE already stored in the samples.
inline TrajectoryResult quantum_time_along(TrajectoryResult result)
{
    auto& s = result.samples;
    if (s.empty())
        return result;
    s[0].t_q = s[0].t;
    for (std::size_t k = 1; k < s.size(); ++k) {
        const double a = s[k - 1].dtde, b = s[k].dtde;
        double inc = 0.0;
        if (std::isfinite(a) && std::isfinite(b))
            inc = 0.5 * (s[k].t - s[k - 1].t) * (a + b);
        s[k].t_q = s[k - 1].t_q + inc;
    }
    return result;
}

/// Position on a trajectory at time t by Hermite interpolation of the
/// samples; nullopt outside the sampled span.
inline std::optional<double> position_at(const TrajectoryResult& r, double t)
{
    const auto& s = r.samples;
    if (s.size() < 2)
        return std::nullopt;
    const bool forward = s.back().t > s.front().t;
    const double lo = forward ? s.front().t : s.back().t;
    const double hi = forward ? s.back().t : s.front().t;
    if (t < lo || t > hi)
        return std::nullopt;
    std::size_t k;
    if (forward)
        k = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), t, [](double x, const TrajectoryState& a) {
                                         return x < a.t;
                                     }) - s.begin());
    else
        k = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), t, [](double x, const TrajectoryState& a) {
                                         return x > a.t;
                                     }) - s.begin());
    k = std::clamp<std::size_t>(k, 1, s.size() - 1);
    const auto& a = s[k - 1];
    const auto& b = s[k];
    if (a.t == b.t)
        return a.q;
    return detail::hermite_step(a.t, a.q, a.v, b.t, b.q, b.v, t);
}

/// dtau/dt = dQ/dE at (q, t) under the model.
inline double epoch_rate(const VariationModel& model, double q, double t)
{
    return delta_Q_delta_E(model.delta_T_delta_E(q, t));
}

struct InitialKinematics
{
    double q0 = 0.0;
    double v0 = 0.0;
    double a0 = 0.0;
};

/// (q0, qdot0, qddot0) of the Floyd trajectory through (q0, t0); qddot0 is
/// exact for the classical-unity model and a central difference otherwise.
inline InitialKinematics microstate_initial_kinematics(const VariationModel& model, double q0, double t0 = 0.0)
{
    const auto p = model.at(q0, t0);
    if (p.pole || !std::isfinite(p.dtde) || p.dtde == 0.0) {
        std::ostringstream os;
        os << "dT/dE is " << (p.pole ? "at a tan pole" : "zero or undefined") << " at q = " << q0 << ", t = " << t0;
        raise(ErrorKind::SingularKinematics, os.str());
    }
    InitialKinematics k;
    k.q0 = q0;
    k.v0 = model.velocity(q0, t0);
    const double m = model.units().mass;
    if (std::holds_alternative<ClassicalUnity>(model.model())) {
        const auto loc = model.microstate()->local(q0);
        k.a0 = loc.w_prime * loc.w_second / (m * m);
        return k;
    }
    const double hq = 1e-5 * std::max(1.0, model.q_max() - model.q_min());
    const double ht = 1e-5;
    const double lo = std::max(model.q_min(), q0 - hq);
    const double hi = std::min(model.q_max(), q0 + hq);
    const double dvdq = (model.velocity(hi, t0) - model.velocity(lo, t0)) / (hi - lo);
    const double dvdt = (model.velocity(q0, t0 + ht) - model.velocity(q0, t0 - ht)) / (2.0 * ht);
    k.a0 = dvdt + k.v0 * dvdq;
    return k;
}

/// Max |d/dq(dS/dE) qdot - 1| along a trajectory, with qdot from second-order
/// differences of the samples and d/dq(dS/dE) from the model. End samples are
/// skipped.
inline double epoch_identity_check(const VariationModel& model, const TrajectoryResult& traj)
{
    const auto& s = traj.samples;
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < s.size(); ++k) {
        const double h1 = s[k].t - s[k - 1].t;
        const double h2 = s[k + 1].t - s[k].t;
        if (h1 == 0.0 || h2 == 0.0)
            continue;
        const double qdot = (-h2 / (h1 * (h1 + h2))) * s[k - 1].q + ((h2 - h1) / (h1 * h2)) * s[k].q
                            + (h1 / (h2 * (h1 + h2))) * s[k + 1].q;
        const auto p = model.at(s[k].q, s[k].t);
        if (!std::isfinite(p.action_gradient))
            continue;
        worst = std::max(worst, std::abs(p.action_gradient * qdot - 1.0));
    }
    return worst;
}

struct SegmentComparison
{
    double t_begin = 0.0; // Bohm time
    double t_end = 0.0;
    double q_begin = 0.0;
    double q_end = 0.0;
    double q_anchor = 0.0;
    double max_discrepancy = 0.0;
    std::size_t compared = 0;
    int dtde_sign = 1;
    bool floyd_truncated = false;
};

struct TimeDeformation
{
    TrajectoryResult bohm;
    std::vector<SegmentComparison> segments;
    std::vector<TrajectoryEvent> zeros; // dT/dE sign changes along the Bohm path
    double max_discrepancy = 0.0;
    bool split() const { return segments.size() > 1; }
};

/// Bohm path reparameterized by t_Q against the Floyd path in ordinary time.
/// The Bohm path is split where dT/dE changes sign; each piece is compared
/// with a Floyd path started on it (at its first sample for the initial piece,
/// at its middle sample otherwise).
inline TimeDeformation bohm_floyd_time_deformation(const ContinuumSystem& sys, double q0, double span,
                                                   IntegratorConfig cfg = {})
{
    if (!(span > 0.0))
        raise(ErrorKind::InvalidArgument, "time span must be positive");
    if (cfg.sample_dt <= 0.0)
        cfg.sample_dt = span / 4000.0;
    TimeDeformation out;
    out.bohm = quantum_time_along(integrate_trajectory(bohm_flow(sys), q0, 0.0, span, cfg));
    for (const auto& e : out.bohm.events) {
        if (e.kind == EventKind::DTdEZero)
            out.zeros.push_back(e);
    }
    const auto& s = out.bohm.samples;
    const auto model = VariationModel::continuum(sys);
    const Flow floyd = floyd_flow(model);

    std::size_t a = 0;
    while (a < s.size()) {
        std::size_t b = a;
        const bool positive = s[a].dtde > 0.0;
        while (b + 1 < s.size() && (s[b + 1].dtde > 0.0) == positive)
            ++b;
        if (b > a) {
            SegmentComparison seg;
            seg.t_begin = s[a].t;
            seg.t_end = s[b].t;
            seg.q_begin = s[a].q;
            seg.q_end = s[b].q;
            seg.dtde_sign = positive ? 1 : -1;
            const std::size_t c = a == 0 ? a : (a + b) / 2;
            seg.q_anchor = s[c].q;
            IntegratorConfig fc = cfg;
            fc.sample_dt = 0.0;
            std::optional<TrajectoryResult> fwd, bwd;
            const double tf_end = s[b].t_q - s[c].t_q;
            const double tf_begin = s[a].t_q - s[c].t_q;
            if (tf_end != 0.0)
                fwd = integrate_trajectory(floyd, s[c].q, 0.0, tf_end, fc);
            if (tf_begin != 0.0)
                bwd = integrate_trajectory(floyd, s[c].q, 0.0, tf_begin, fc);
            seg.floyd_truncated = (fwd && !fwd->completed) || (bwd && !bwd->completed);
            for (std::size_t k = a; k <= b; ++k) {
                const double tf = s[k].t_q - s[c].t_q;
                std::optional<double> qf;
                if (tf == 0.0)
                    qf = s[c].q;
                else if ((tf > 0.0) == (tf_end > 0.0) && fwd)
                    qf = position_at(*fwd, tf);
                else if (bwd)
                    qf = position_at(*bwd, tf);
                if (!qf)
                    continue;
                seg.max_discrepancy = std::max(seg.max_discrepancy, std::abs(*qf - s[k].q));
                ++seg.compared;
            }
            out.max_discrepancy = std::max(out.max_discrepancy, seg.max_discrepancy);
            out.segments.push_back(seg);
        }
        a = b + 1;
    }
    return out;
}

} // namespace qtraj

#endif // QTRAJ_TRAJECTORIES_HPP

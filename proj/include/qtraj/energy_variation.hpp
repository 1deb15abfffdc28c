#ifndef QTRAJ_ENERGY_VARIATION_HPP
#define QTRAJ_ENERGY_VARIATION_HPP

#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "qtraj/errors.hpp"
#include "qtraj/numerics.hpp"
#include "qtraj/qshje_microstates.hpp"
#include "qtraj/schrodinger1d.hpp"
#include "qtraj/units_potentials.hpp"

namespace qtraj {

struct ClassicalUnity
{
};

struct ContinuumLimit
{
    double dE = 0.0; // 0 selects 1e-5 E
};

struct DiscreteBeat
{
    int i = 1;
    int j = 2;
    double delta_alpha = 0.0;
};

using EnergyDerivativeModel = std::variant<ClassicalUnity, ContinuumLimit, DiscreteBeat>;

inline std::string describe(const EnergyDerivativeModel& m)
{
    std::ostringstream os;
    if (std::holds_alternative<ClassicalUnity>(m))
        os << "ClassicalUnity";
    else if (auto* c = std::get_if<ContinuumLimit>(&m))
        os << "ContinuumLimit(dE=" << c->dE << ")";
    else if (auto* b = std::get_if<DiscreteBeat>(&m))
        os << "DiscreteBeat(i=" << b->i << ", j=" << b->j << ", delta_alpha=" << b->delta_alpha << ")";
    return os.str();
}

inline double delta_Q_delta_E(double dtde) { return 1.0 - dtde; }

struct QuantumMass
{
    double m_q = 0.0;
};

inline QuantumMass quantum_mass(double mass, double dtde) { return {mass * dtde}; }

inline double beat_period(double e_i, double e_j, const Units& units = {})
{
    if (e_i == e_j)
        raise(ErrorKind::DegenerateBeat, "beat period needs two different energies");
    return 2.0 * std::numbers::pi * units.hbar / std::abs(e_j - e_i);
}

/// Two microstates at E_i < E_j with identical coefficients, and the
/// difference fields entering the beat form of dT/dE.
struct VariationFrame
{
    Microstate ms_i;
    Microstate ms_j;
    int level_i = 0;
    int level_j = 0;
    double delta_e = 0.0;
    double delta_alpha = 0.0;
    RealField delta_w;                // values dW, derivative dW'
    std::vector<double> log_amp_ratio; // ln(R_j/R_i)
    std::vector<double> log_amp_slope; // d/dq ln(R_j/R_i)

    struct Local
    {
        double w_prime_i = 0.0;
        double delta_w = 0.0;
        double delta_w_prime = 0.0;
        double log_amp_slope = 0.0;
    };

    Local local(double q) const
    {
        const auto a = ms_i.local(q);
        const auto b = ms_j.local(q);
        return {a.w_prime, b.w - a.w, b.w_prime - a.w_prime, b.log_r_slope - a.log_r_slope};
    }

    double beat_period() const { return qtraj::beat_period(ms_i.energy, ms_j.energy, ms_i.units); }

    /// Frame of the opposite running waves: W -> -W for both states and
    /// delta_alpha -> -delta_alpha.
    VariationFrame with_reversed_sign() const
    {
        VariationFrame f = *this;
        f.ms_i = ms_i.with_reversed_sign();
        f.ms_j = ms_j.with_reversed_sign();
        f.delta_alpha = -delta_alpha;
        for (auto& x : f.delta_w.values)
            x = -x;
        for (auto& x : f.delta_w.derivative)
            x = -x;
        return f;
    }
};

inline VariationFrame make_variation_frame(const Microstate& ms_i, const Microstate& ms_j, double delta_alpha = 0.0,
                                           int level_i = 0, int level_j = 1)
{
    if (!(ms_i.grid() == ms_j.grid()))
        raise(ErrorKind::InvalidArgument, "frame microstates must share one grid");
    const auto& ci = ms_i.coefficients;
    const auto& cj = ms_j.coefficients;
    if (ci.a != cj.a || ci.b != cj.b || ci.c != cj.c)
        raise(ErrorKind::InvalidArgument, "frame microstates must use identical coefficients");
    if (ms_i.sign != ms_j.sign)
        raise(ErrorKind::InvalidArgument, "frame microstates must run in the same direction");
    if (ms_i.ref_index != ms_j.ref_index)
        raise(ErrorKind::InvalidArgument, "frame microstates must share the action anchor");
    VariationFrame f;
    f.ms_i = ms_i;
    f.ms_j = ms_j;
    f.level_i = level_i;
    f.level_j = level_j;
    f.delta_e = ms_j.energy - ms_i.energy;
    if (!(f.delta_e > 0.0))
        raise(ErrorKind::InvalidArgument, "frame requires E_j > E_i");
    f.delta_alpha = delta_alpha;
    const Grid& g = ms_i.grid();
    f.delta_w = RealField(g);
    f.log_amp_ratio.resize(g.size());
    f.log_amp_slope.resize(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        f.delta_w.values[k] = ms_j.w.values[k] - ms_i.w.values[k];
        f.delta_w.derivative[k] = ms_j.w_prime.values[k] - ms_i.w_prime.values[k];
        f.log_amp_ratio[k] = std::log(ms_j.r[k] / ms_i.r[k]);
        f.log_amp_slope[k] = 0.5 * (ms_j.form_slope[k] / ms_j.form[k] - ms_i.form_slope[k] / ms_i.form[k]);
    }
    return f;
}

/// Frame for family levels i < j (InfiniteWell counts from 1, others from 0),
/// solved on `grid` and built with the same coefficients and anchor.
inline VariationFrame make_variation_frame(const PotentialSpec& spec, const Grid& grid, int level_i, int level_j,
                                           const MicrostateCoefficients& coeffs, double delta_alpha = 0.0,
                                           const Units& units = {}, const BuildOptions& options = {})
{
    if (level_i == level_j)
        raise(ErrorKind::InvalidArgument, "beat frame needs two different levels");
    const int offset = level_offset(spec);
    const int lo = std::min(level_i, level_j) - offset;
    const int hi = std::max(level_i, level_j) - offset;
    if (lo < 0)
        raise(ErrorKind::InvalidArgument, "level index below the ground state");
    const auto eig = find_bound_eigenvalues(spec, grid, hi + 1, 1e-10, units);
    if (static_cast<int>(eig.size()) <= hi) {
        std::ostringstream os;
        os << "only " << eig.size() << " bound levels available";
        raise(ErrorKind::InvalidArgument, os.str());
    }
    auto build = [&](int idx) {
        return build_microstate(solution_pair(eig[idx]), coeffs, spec, units, std::nullopt, options);
    };
    const int a = level_i - offset;
    const int b = level_j - offset;
    if (eig[a].energy < eig[b].energy)
        return make_variation_frame(build(a), build(b), delta_alpha, level_i, level_j);
    return make_variation_frame(build(b), build(a), delta_alpha, level_j, level_i);
}

/// One evaluation of the beat form.
struct BeatValue
{
    double value = numerics::nan; // NaN at a tan pole
    bool pole = false;
    int divergence = 0;        // sign of the divergence at a pole
    double phase = 0.0;        // dS/hbar + delta_alpha
    double cos_phase = 1.0;
    double action_gradient = 0.0; // d/dq (dS/dE) = value * m / W'_i
};

/// dT/dE = (W'_i/(m dE)) [dW' + hbar tan(dS/hbar + da) d/dq ln(R_j/R_i)],
/// dS = dW - dE t.
inline BeatValue delta_T_delta_E_discrete(const VariationFrame& frame, double q, double t,
                                          std::optional<double> delta_alpha = std::nullopt)
{
    const auto& u = frame.ms_i.units;
    const auto loc = frame.local(q);
    const double da = delta_alpha.value_or(frame.delta_alpha);
    BeatValue out;
    out.phase = (loc.delta_w - frame.delta_e * t) / u.hbar + da;
    out.cos_phase = std::cos(out.phase);
    const double pre = loc.w_prime_i / (u.mass * frame.delta_e);
    if (std::abs(out.cos_phase) < 1e-9) {
        out.pole = true;
        const double lead = pre * u.hbar * loc.log_amp_slope * std::sin(out.phase);
        out.divergence = lead == 0.0 ? 0 : (lead * out.cos_phase >= 0.0 ? 1 : -1);
        out.action_gradient = numerics::nan;
        return out;
    }
    const double bracket = loc.delta_w_prime + u.hbar * std::tan(out.phase) * loc.log_amp_slope;
    out.value = pre * bracket;
    out.action_gradient = bracket / frame.delta_e;
    return out;
}

/// Floyd velocity W'_i/(m dT/dE) under the beat form, written with cos and
/// sin so that it passes smoothly through zero at tan poles. Infinite where
/// dT/dE vanishes.
inline double beat_velocity(const VariationFrame& frame, double q, double t)
{
    const auto& u = frame.ms_i.units;
    const auto loc = frame.local(q);
    const double x = (loc.delta_w - frame.delta_e * t) / u.hbar + frame.delta_alpha;
    const double den = loc.delta_w_prime * std::cos(x) + u.hbar * loc.log_amp_slope * std::sin(x);
    return frame.delta_e * std::cos(x) / den;
}

/// Unbound stationary system treated through its analytic scattering state;
/// W' is the phase gradient of that state and dW'/dE is taken by central
/// differences in E.
struct ContinuumSystem
{
    PotentialSpec spec;
    double energy = 0.0;
    double dE = 0.0;
    Units units;
    ScatteringState state;
    ScatteringState up, down, up_half, down_half;

    double w_prime(double q) const { return state.momentum(q); }

    /// Richardson-extrapolated dW'/dE.
    double w_prime_energy_slope(double q) const
    {
        const double d1 = (up.momentum(q) - down.momentum(q)) / (2.0 * dE);
        const double d2 = (up_half.momentum(q) - down_half.momentum(q)) / dE;
        return (4.0 * d2 - d1) / 3.0;
    }

    /// |coarse - fine| difference quotient at q, a measure of the step error.
    double richardson_gap(double q) const
    {
        const double d1 = (up.momentum(q) - down.momentum(q)) / (2.0 * dE);
        const double d2 = (up_half.momentum(q) - down_half.momentum(q)) / dE;
        return std::abs(d1 - d2);
    }
};

inline ContinuumSystem make_continuum_system(const PotentialSpec& spec, double E, double dE = 0.0,
                                             const Units& units = {})
{
    if (spectrum_class(spec) != SpectrumClass::Continuous)
        raise(ErrorKind::InvalidArgument, std::string("continuum limit needs a continuous spectrum, got ")
                                              + to_string(spec.family));
    if (dE < 0.0)
        raise(ErrorKind::InvalidArgument, "energy step must be positive");
    ContinuumSystem s;
    s.spec = spec;
    s.energy = E;
    s.units = units;
    s.dE = dE > 0.0 ? dE : 1e-5 * std::abs(E);
    s.state = scattering_state(spec, E, units);
    s.up = scattering_state(spec, E + s.dE, units);
    s.down = scattering_state(spec, E - s.dE, units);
    s.up_half = scattering_state(spec, E + 0.5 * s.dE, units);
    s.down_half = scattering_state(spec, E - 0.5 * s.dE, units);
    return s;
}

/// dT/dE = (W'/m) d/dq (dW/dE) for a stationary unbound state.
inline double delta_T_delta_E_continuum(const ContinuumSystem& sys, double q)
{
    return sys.w_prime(q) / sys.units.mass * sys.w_prime_energy_slope(q);
}

inline double delta_T_delta_E_continuum(const PotentialSpec& spec, double E, double dE, double q,
                                        const Units& units = {})
{
    return delta_T_delta_E_continuum(make_continuum_system(spec, E, dE, units), q);
}

/// An energy-derivative model bound to the data it needs, evaluated
/// uniformly by the trajectory code.
class VariationModel
{
public:
    struct Point
    {
        double w_prime = 0.0;         // momentum of the Floyd description
        double dtde = 1.0;            // NaN at a tan pole
        double action_gradient = 0.0; // d/dq (dS/dE)
        bool pole = false;
        double cos_phase = 1.0;
    };

    static VariationModel classical(const Microstate& ms)
    {
        VariationModel m;
        m.model_ = ClassicalUnity{};
        m.micro_ = std::make_shared<const Microstate>(ms);
        m.units_ = ms.units;
        m.q_min_ = ms.grid().q_min;
        m.q_max_ = ms.grid().q_max;
        return m;
    }

    static VariationModel continuum(const ContinuumSystem& sys)
    {
        VariationModel m;
        m.model_ = ContinuumLimit{sys.dE};
        m.cont_ = std::make_shared<const ContinuumSystem>(sys);
        m.units_ = sys.units;
        m.q_min_ = sys.spec.q_min;
        m.q_max_ = sys.spec.q_max;
        return m;
    }

    static VariationModel beat(const VariationFrame& frame)
    {
        VariationModel m;
        m.model_ = DiscreteBeat{frame.level_i, frame.level_j, frame.delta_alpha};
        m.frame_ = std::make_shared<const VariationFrame>(frame);
        m.units_ = frame.ms_i.units;
        m.q_min_ = frame.ms_i.grid().q_min;
        m.q_max_ = frame.ms_i.grid().q_max;
        return m;
    }

    const EnergyDerivativeModel& model() const { return model_; }
    const Units& units() const { return units_; }
    double q_min() const { return q_min_; }
    double q_max() const { return q_max_; }
    const VariationFrame* frame() const { return frame_.get(); }
    const ContinuumSystem* continuum_system() const { return cont_.get(); }
    const Microstate* microstate() const { return micro_ ? micro_.get() : (frame_ ? &frame_->ms_i : nullptr); }

    Point at(double q, double t) const
    {
        Point p;
        if (micro_) {
            p.w_prime = micro_->local(q).w_prime;
            p.dtde = 1.0;
            p.action_gradient = units_.mass / p.w_prime;
        }
        else if (cont_) {
            p.w_prime = cont_->w_prime(q);
            p.action_gradient = cont_->w_prime_energy_slope(q);
            p.dtde = p.w_prime / units_.mass * p.action_gradient;
        }
        else {
            const auto b = delta_T_delta_E_discrete(*frame_, q, t);
            p.w_prime = frame_->ms_i.local(q).w_prime;
            p.dtde = b.value;
            p.action_gradient = b.action_gradient;
            p.pole = b.pole;
            p.cos_phase = b.cos_phase;
        }
        return p;
    }

    double delta_T_delta_E(double q, double t) const { return at(q, t).dtde; }

    /// Floyd velocity W'/(m dT/dE).
    double velocity(double q, double t) const
    {
        if (frame_)
            return beat_velocity(*frame_, q, t);
        const auto p = at(q, t);
        return p.w_prime / (units_.mass * p.dtde);
    }

    std::string describe() const { return qtraj::describe(model_); }

private:
    EnergyDerivativeModel model_;
    std::shared_ptr<const Microstate> micro_;
    std::shared_ptr<const ContinuumSystem> cont_;
    std::shared_ptr<const VariationFrame> frame_;
    Units units_;
    double q_min_ = 0.0;
    double q_max_ = 1.0;
};

} // namespace qtraj

#endif // QTRAJ_ENERGY_VARIATION_HPP

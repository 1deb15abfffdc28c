#ifndef QTRAJ_QSHJE_MICROSTATES_HPP
#define QTRAJ_QSHJE_MICROSTATES_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <sstream>
#include <vector>

#include "qtraj/errors.hpp"
#include "qtraj/numerics.hpp"
#include "qtraj/schrodinger1d.hpp"
#include "qtraj/units_potentials.hpp"

namespace qtraj {

/// Coefficients of the quadratic form a phi^2 + b theta^2 + c phi theta.
/// Beyond a, b > 0 the form is required to be positive definite.
struct MicrostateCoefficients
{
    double a = 1.0;
    double b = 1.0;
    double c = 0.0;

    double discriminant() const { return 4.0 * a * b - c * c; }

    void validate() const
    {
        if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(c)) {
            std::ostringstream os;
            os << "need a > 0 and b > 0, got a = " << a << ", b = " << b;
            raise(ErrorKind::InvalidCoefficients, os.str());
        }
        if (!(discriminant() > 0.0)) {
            std::ostringstream os;
            os << "quadratic form not positive definite: 4ab - c^2 = " << discriminant();
            raise(ErrorKind::InvalidCoefficients, os.str());
        }
    }
};

/// Local values of a microstate between grid nodes.
struct LocalAction
{
    double w = 0.0;         // reduced action W
    double w_prime = 0.0;   // W'
    double w_second = 0.0;  // W''
    double log_r_slope = 0.0; // d/dq ln R
};

/// One solution W_mu of the stationary quantum Hamilton-Jacobi equation,
/// sampled on the grid of its solution pair.
struct Microstate
{
    MicrostateCoefficients coefficients;
    double energy = 0.0;
    PotentialSpec potential;
    Units units;
    /// The pair after calibration (both members multiplied by `scale`).
    SolutionPair pair;
    double scale = 1.0;
    int sign = +1; // +1: positive running wave
    double q_ref = 0.0;
    std::size_t ref_index = 0;
    RealField w;          // W (values) and W' (derivative)
    RealField w_prime;    // W' (values) and W'' (derivative)
    std::vector<double> form;       // F = a phi^2 + b theta^2 + c phi theta
    std::vector<double> form_slope; // F'
    std::vector<double> r;          // R, normalized to max R = 1
    double r_constant = 1.0;        // R = r_constant / sqrt|W'|
    std::vector<double> phi_second;
    std::vector<double> theta_second;

    const Grid& grid() const { return w.grid; }

    LocalAction local(double q) const
    {
        const Grid& g = grid();
        const double phi = numerics::hermite<double>(g, pair.phi.values, pair.phi.derivative, q);
        const double dphi = numerics::hermite<double>(g, pair.phi.derivative, phi_second, q);
        const double th = numerics::hermite<double>(g, pair.theta.values, pair.theta.derivative, q);
        const double dth = numerics::hermite<double>(g, pair.theta.derivative, theta_second, q);
        const auto& k = coefficients;
        const double F = k.a * phi * phi + k.b * th * th + k.c * phi * th;
        const double dF = 2.0 * k.a * phi * dphi + 2.0 * k.b * th * dth + k.c * (dphi * th + phi * dth);
        const double root = std::sqrt(2.0 * units.mass);
        LocalAction out;
        out.w_prime = sign * root / F;
        out.w_second = -sign * root * dF / (F * F);
        out.log_r_slope = 0.5 * dF / F;
        out.w = numerics::hermite<double>(g, w.values, w.derivative, q);
        return out;
    }

    /// Microstate of the opposite running wave, W -> -W.
    Microstate with_reversed_sign() const
    {
        Microstate m = *this;
        m.sign = -sign;
        for (auto* v : {&m.w.values, &m.w.derivative, &m.w_prime.values, &m.w_prime.derivative})
            for (auto& x : *v)
                x = -x;
        return m;
    }
};

struct BuildOptions
{
    /// Rescale the pair so that W' solves the QSHJE; off only for diagnostics.
    bool calibrate = true;
    /// Raise CalibrationFailure when the interior residual exceeds this.
    std::optional<double> residual_tolerance = 1e-6;
    std::size_t residual_margin = 5;
};

/// Schwarzian derivative {W; q} = W'''/W' - 3/2 (W''/W')^2 with W'' and W'''
/// from fourth-order central differences of W'. Nodes within reach of the
/// edges are NaN; |W'| < 1e-12 at an evaluated node raises SingularDerivative.
inline std::vector<double> schwarzian(const RealField& w)
{
    const std::size_t n = w.size();
    const double h = w.grid.spacing();
    std::vector<double> wp = w.derivative;
    if (wp.size() != n)
        wp = numerics::central_d1(w.values, h);
    const auto w2 = numerics::central_d1(wp, h);
    const auto w3 = numerics::central_d2(wp, h);
    std::vector<double> out(n, numerics::nan);
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(w2[i]) || std::isnan(w3[i]) || std::isnan(wp[i]))
            continue;
        if (std::abs(wp[i]) < 1e-12) {
            std::ostringstream os;
            os << "|W'| = " << std::abs(wp[i]) << " at q = " << w.grid.at(i);
            raise(ErrorKind::SingularDerivative, os.str());
        }
        const double ratio = w2[i] / wp[i];
        out[i] = w3[i] / wp[i] - 1.5 * ratio * ratio;
    }
    return out;
}

/// Q = hbar^2/(4m) {W_mu; q}.
inline std::vector<double> quantum_potential_schwarzian(const Microstate& ms)
{
    auto s = schwarzian(ms.w);
    const double k = ms.units.hbar * ms.units.hbar / (4.0 * ms.units.mass);
    for (auto& v : s)
        v *= k;
    return s;
}

struct BohmPotential
{
    std::vector<double> values; // NaN at excluded nodes
    std::vector<std::size_t> excluded;
};

/// Q = -hbar^2 R''/(2m R), R'' from the fourth-order central stencil. Nodes
/// where R is not positive (or too close to the edges) are excluded.
inline BohmPotential quantum_potential_bohm(const Grid& grid, const std::vector<double>& r, const Units& units = {})
{
    BohmPotential out;
    const auto d2 = numerics::central_d2(r, grid.spacing());
    out.values.assign(r.size(), numerics::nan);
    double peak = 0.0;
    for (double v : r)
        peak = std::max(peak, std::abs(v));
    const double k = -units.hbar * units.hbar / (2.0 * units.mass);
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (std::isnan(d2[i]))
            continue;
        if (!(r[i] > 1e-14 * peak)) {
            out.excluded.push_back(i);
            continue;
        }
        out.values[i] = k * d2[i] / r[i];
    }
    return out;
}

inline std::vector<double> kinetic_energy(const Microstate& ms)
{
    std::vector<double> t(ms.w_prime.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double p = ms.w_prime.values[i];
        t[i] = p * p / (2.0 * ms.units.mass);
    }
    return t;
}

/// (W')^2/2m + V - E + hbar^2/(4m){W; q} per node; NaN inside the margin.
inline std::vector<double> residual_profile(const Microstate& ms, std::size_t margin = 5)
{
    const auto q = quantum_potential_schwarzian(ms);
    const auto t = kinetic_energy(ms);
    const Grid& g = ms.grid();
    std::vector<double> out(g.size(), numerics::nan);
    for (std::size_t i = margin; i + margin < g.size(); ++i) {
        const double v = evaluate_potential(ms.potential, g.at(i), ms.units);
        out[i] = t[i] + v - ms.energy + q[i];
    }
    return out;
}

/// Max |(W')^2/2m + V - E + hbar^2/(4m){W; q}| over the interior.
inline double qshje_residual(const Microstate& ms, std::size_t margin = 5)
{
    double worst = 0.0;
    for (double r : residual_profile(ms, margin)) {
        if (!std::isnan(r))
            worst = std::max(worst, std::abs(r));
    }
    return worst;
}

/// Builds W'_mu = sqrt(2m)/(a phi^2 + b theta^2 + c phi theta) from a pair.
///
/// Calibration multiplies the pair by one factor so that the QSHJE holds:
/// with F built from the scaled pair, the Schwarzian term equals
/// E - V - hbar^2 (4ab - c^2) Wr^2 / (8 m F^2), so the residual vanishes
/// exactly when the scaled Wronskian satisfies hbar |Wr| sqrt(ab - c^2/4) = sqrt(2m).
inline Microstate build_microstate(const SolutionPair& pair, const MicrostateCoefficients& coeffs,
                                   const PotentialSpec& potential, const Units& units = {},
                                   std::optional<double> q_ref = std::nullopt, const BuildOptions& options = {})
{
    coeffs.validate();
    units.validate();
    const Grid& g = pair.phi.grid;
    Microstate ms;
    ms.coefficients = coeffs;
    ms.energy = pair.energy;
    ms.potential = potential;
    ms.units = units;
    ms.pair = pair;

    const double root = std::sqrt(2.0 * units.mass);
    if (options.calibrate) {
        const double wr = std::abs(pair.wronskian);
        ms.scale = std::sqrt(root / (units.hbar * wr * std::sqrt(0.25 * coeffs.discriminant())));
    }
    for (auto* v : {&ms.pair.phi.values, &ms.pair.phi.derivative, &ms.pair.theta.values, &ms.pair.theta.derivative})
        for (auto& x : *v)
            x *= ms.scale;
    ms.pair.wronskian *= ms.scale * ms.scale;

    const std::size_t n = g.size();
    const auto uu = detail::scaled_potential(potential, pair.energy, g, units);
    ms.phi_second.resize(n);
    ms.theta_second.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        ms.phi_second[i] = uu[i] * ms.pair.phi.values[i];
        ms.theta_second[i] = uu[i] * ms.pair.theta.values[i];
    }

    ms.form.resize(n);
    ms.form_slope.resize(n);
    ms.w_prime = RealField(g);
    for (std::size_t i = 0; i < n; ++i) {
        const double f = ms.pair.phi.values[i], df = ms.pair.phi.derivative[i];
        const double t = ms.pair.theta.values[i], dt = ms.pair.theta.derivative[i];
        const double F = coeffs.a * f * f + coeffs.b * t * t + coeffs.c * f * t;
        const double dF = 2.0 * coeffs.a * f * df + 2.0 * coeffs.b * t * dt + coeffs.c * (df * t + f * dt);
        ms.form[i] = F;
        ms.form_slope[i] = dF;
        ms.w_prime.values[i] = root / F;
        ms.w_prime.derivative[i] = -root * dF / (F * F);
    }

    ms.ref_index = q_ref ? g.nearest(*q_ref) : g.midpoint_index();
    ms.q_ref = g.at(ms.ref_index);
    ms.w = RealField(g);
    ms.w.values = numerics::cumulative_integral(ms.w_prime.values, g.spacing(), ms.ref_index);
    ms.w.derivative = ms.w_prime.values;

    double r_max = 0.0;
    for (double v : ms.w_prime.values)
        r_max = std::max(r_max, 1.0 / std::sqrt(std::abs(v)));
    ms.r_constant = 1.0 / r_max;
    ms.r.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        ms.r[i] = ms.r_constant / std::sqrt(std::abs(ms.w_prime.values[i]));

    if (options.calibrate && options.residual_tolerance) {
        const double res = qshje_residual(ms, options.residual_margin);
        if (!(res <= *options.residual_tolerance)) {
            std::ostringstream os;
            os << "QSHJE residual " << res << " exceeds " << *options.residual_tolerance << " at E = " << ms.energy;
            raise(ErrorKind::CalibrationFailure, os.str());
        }
    }
    return ms;
}

/// Running-wave amplitudes of a wave function over a microstate:
/// psi = A+ R e^{iW/hbar} + A- R e^{-iW/hbar}, fitted by linear least squares.
struct BipolarWave
{
    double energy = 0.0;
    std::complex<double> a_plus;
    std::complex<double> a_minus;
    double scale_plus = 0.0;
    double scale_minus = 0.0;
    double phase_plus = 0.0;
    double phase_minus = 0.0;
    /// RMS misfit relative to the RMS of psi.
    double fit_residual = 0.0;
};

inline BipolarWave bipolar_decomposition(const Microstate& ms, const ComplexField& psi)
{
    if (!(psi.grid == ms.grid()))
        raise(ErrorKind::InvalidArgument, "wave function and microstate grids differ");
    using cd = std::complex<double>;
    cd g11 = 0.0, g12 = 0.0, g21 = 0.0, g22 = 0.0, b1 = 0.0, b2 = 0.0;
    const double hbar = ms.units.hbar;
    std::vector<cd> u(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        u[i] = ms.r[i] * std::polar(1.0, ms.w.values[i] / hbar);
        const cd ub = std::conj(u[i]);
        g11 += std::norm(u[i]);
        g12 += std::conj(u[i]) * ub;
        g21 += std::conj(ub) * u[i];
        g22 += std::norm(ub);
        b1 += std::conj(u[i]) * psi.values[i];
        b2 += std::conj(ub) * psi.values[i];
    }
    const cd det = g11 * g22 - g12 * g21;
    BipolarWave out;
    out.energy = ms.energy;
    out.a_plus = (b1 * g22 - g12 * b2) / det;
    out.a_minus = (g11 * b2 - g21 * b1) / det;
    out.scale_plus = std::abs(out.a_plus);
    out.scale_minus = std::abs(out.a_minus);
    out.phase_plus = std::arg(out.a_plus);
    out.phase_minus = std::arg(out.a_minus);
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        err += std::norm(psi.values[i] - out.a_plus * u[i] - out.a_minus * std::conj(u[i]));
        ref += std::norm(psi.values[i]);
    }
    out.fit_residual = std::sqrt(err / ref);
    return out;
}

inline ComplexField as_complex(const RealField& f)
{
    ComplexField out(f.grid);
    for (std::size_t i = 0; i < f.size(); ++i) {
        out.values[i] = f.values[i];
        out.derivative[i] = f.derivative[i];
    }
    return out;
}

} // namespace qtraj

#endif // QTRAJ_QSHJE_MICROSTATES_HPP

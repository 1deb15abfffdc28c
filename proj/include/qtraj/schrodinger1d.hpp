#ifndef QTRAJ_SCHRODINGER1D_HPP
#define QTRAJ_SCHRODINGER1D_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include "qtraj/errors.hpp"
#include "qtraj/numerics.hpp"
#include "qtraj/units_potentials.hpp"

namespace qtraj {

enum class Direction { Forward, Backward };

/// Two real solutions of the stationary equation at one energy, with their
/// Wronskian phi*theta' - phi'*theta (grid mean).
struct SolutionPair
{
    RealField phi;
    RealField theta;
    double wronskian = 0.0;
    double energy = 0.0;
    /// Relative log-derivative mismatch of phi at the shooting match point;
    /// zero for anchor-integrated phi, ~0 when energy is an eigenvalue.
    double match_defect = 0.0;
};

struct EigenSolution
{
    int index = 0; // node count
    int level = 0; // family quantum number (index + level_offset)
    double energy = 0.0;
    RealField psi;
    RealField partner;
};

namespace detail {

inline double scaled_potential(const PotentialSpec& spec, double E, double q, const Units& u)
{
    return 2.0 * u.mass * (evaluate_potential(spec, q, u) - E) / (u.hbar * u.hbar);
}

/// Node samples of 2m(V - E)/hbar^2. A node sitting on a jump of a
/// piecewise-constant family takes the mean of the one-sided limits.
inline std::vector<double> scaled_potential(const PotentialSpec& spec, double E, const Grid& g, const Units& u)
{
    std::vector<double> out(g.size());
    const bool jumps = spec.family == PotentialFamily::FiniteWell || spec.family == PotentialFamily::Step;
    const double eps = 1e-9 * g.spacing();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double q = g.at(i);
        if (jumps && i > 0 && i + 1 < g.size())
            out[i] = 0.5 * (scaled_potential(spec, E, q - eps, u) + scaled_potential(spec, E, q + eps, u));
        else
            out[i] = scaled_potential(spec, E, q, u);
    }
    return out;
}

/// psi(q0 + dq) from (psi, psi') at q0 by RK4 substeps on psi'' = u psi.
inline double first_step(const PotentialSpec& spec, double E, const Units& u, double q0, double dq, double value,
                         double slope)
{
    constexpr int sub = 32;
    const double h = dq / sub;
    double y = value;
    double p = slope;
    double q = q0;
    auto uq = [&](double x) {
        const double lo = std::min(q0, q0 + dq);
        const double hi = std::max(q0, q0 + dq);
        return scaled_potential(spec, E, std::clamp(x, lo, hi), u);
    };
    for (int s = 0; s < sub; ++s) {
        const double u0 = uq(q);
        const double um = uq(q + 0.5 * h);
        const double u1 = uq(q + h);
        const double k1y = p, k1p = u0 * y;
        const double k2y = p + 0.5 * h * k1p, k2p = um * (y + 0.5 * h * k1y);
        const double k3y = p + 0.5 * h * k2p, k3p = um * (y + 0.5 * h * k2y);
        const double k4y = p + h * k3p, k4p = u1 * (y + h * k3y);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        q += h;
    }
    return y;
}

struct SpanResult
{
    bool overflow = false;
};

/// Numerov recurrence from node `start` towards increasing (dir = +1) or
/// decreasing (dir = -1) index. With renormalize set, the already computed
/// part of the run is rescaled whenever it grows past 1e100; otherwise a
/// magnitude above 1e150 stops the run and leaves the rest as NaN.
inline SpanResult numerov_span(const PotentialSpec& spec, double E, const Grid& g, const Units& u,
                               const std::vector<double>& uu, std::vector<double>& psi, std::size_t start,
                               double value, double slope, int dir, bool renormalize,
                               std::optional<std::size_t> stop = std::nullopt,
                               std::optional<double> next = std::nullopt)
{
    SpanResult res;
    const double h = g.spacing();
    const std::size_t n = g.size();
    psi[start] = value;
    const long last = stop ? static_cast<long>(*stop) : (dir > 0 ? static_cast<long>(n) - 1 : 0);
    if (static_cast<long>(start) == last)
        return res;
    const std::size_t s1 = static_cast<std::size_t>(static_cast<long>(start) + dir);
    psi[s1] = next ? *next : first_step(spec, E, u, g.at(start), g.at(s1) - g.at(start), value, slope);
    const double c = h * h / 12.0;
    long i = static_cast<long>(s1);
    while (i != last) {
        const std::size_t im = static_cast<std::size_t>(i - dir);
        const std::size_t i0 = static_cast<std::size_t>(i);
        const std::size_t ip = static_cast<std::size_t>(i + dir);
        psi[ip] = (2.0 * (1.0 + 5.0 * c * uu[i0]) * psi[i0] - (1.0 - c * uu[im]) * psi[im]) / (1.0 - c * uu[ip]);
        const double mag = std::abs(psi[ip]);
        if (renormalize && mag > 1e100) {
            for (long k = static_cast<long>(start); k != i + 2 * dir; k += dir)
                psi[static_cast<std::size_t>(k)] *= 1e-100;
        }
        else if (!renormalize && (mag > 1e150 || !std::isfinite(mag))) {
            res.overflow = true;
            for (long k = i + dir; k != last + dir; k += dir)
                psi[static_cast<std::size_t>(k)] = numerics::nan;
            return res;
        }
        i += dir;
    }
    return res;
}

/// Slope at an end node from psi'' = u psi, O(h^5); dir = -1 uses the nodes
/// below e, dir = +1 the nodes above.
inline double end_slope(const std::vector<double>& psi, const std::vector<double>& uu, double h, std::size_t e,
                        int dir)
{
    auto at = [&](int k) {
        return static_cast<std::size_t>(static_cast<long>(e) + static_cast<long>(dir) * k);
    };
    auto g = [&](int k) { return uu[at(k)] * psi[at(k)]; };
    // derivatives with respect to x = -dir * q
    const double g1 = (25 * g(0) - 48 * g(1) + 36 * g(2) - 16 * g(3) + 3 * g(4)) / (12 * h);
    const double g2 = (45 * g(0) - 154 * g(1) + 214 * g(2) - 156 * g(3) + 61 * g(4) - 10 * g(5)) / (12 * h * h);
    const double g3 = (17 * g(0) - 71 * g(1) + 118 * g(2) - 98 * g(3) + 41 * g(4) - 7 * g(5)) / (4 * h * h * h);
    const double dx = (psi[at(0)] - psi[at(1)]) / h + 0.5 * h * g(0) - h * h / 6.0 * g1 + h * h * h / 24.0 * g2
                      - h * h * h * h / 120.0 * g3;
    return -static_cast<double>(dir) * dx;
}

/// Derivative samples consistent with the Numerov solution: sixth order in
/// the interior, fifth order at the two nodes nearest each edge.
inline std::vector<double> numerov_derivative(const std::vector<double>& psi, const std::vector<double>& uu, double h)
{
    const std::size_t n = psi.size();
    std::vector<double> d(n, numerics::nan);
    if (n < 6) {
        for (std::size_t i = 1; i + 1 < n; ++i)
            d[i] = (psi[i + 1] - psi[i - 1]) / (2 * h);
        if (n >= 2) {
            d[0] = (psi[1] - psi[0]) / h;
            d[n - 1] = (psi[n - 1] - psi[n - 2]) / h;
        }
        return d;
    }
    for (std::size_t i = 2; i + 2 < n; ++i) {
        const double gm2 = uu[i - 2] * psi[i - 2], gm1 = uu[i - 1] * psi[i - 1];
        const double gp1 = uu[i + 1] * psi[i + 1], gp2 = uu[i + 2] * psi[i + 2];
        const double g1 = (-gp2 + 8.0 * gp1 - 8.0 * gm1 + gm2) / (12.0 * h);
        const double g3 = (gp2 - 2.0 * gp1 + 2.0 * gm1 - gm2) / (2.0 * h * h * h);
        d[i] = (psi[i + 1] - psi[i - 1]) / (2.0 * h) - h * h / 6.0 * g1 - h * h * h * h / 120.0 * g3;
    }
    d[0] = end_slope(psi, uu, h, 0, +1);
    d[1] = end_slope(psi, uu, h, 1, +1);
    d[n - 1] = end_slope(psi, uu, h, n - 1, -1);
    d[n - 2] = end_slope(psi, uu, h, n - 2, -1);
    return d;
}

inline void check_grid_in_domain(const PotentialSpec& spec, const Grid& g)
{
    g.validate();
    if (!in_domain(spec, g.q_min) || !in_domain(spec, g.q_max))
        raise(ErrorKind::Domain, "grid extends outside the potential domain");
}

} // namespace detail

/// Numerov solution of -hbar^2 psi''/2m + (V - E) psi = 0 from one end of the
/// grid. Overflow is flagged through Field::unbounded, not thrown.
inline RealField numerov_integrate(const PotentialSpec& spec, double E, const Grid& grid, double start_value,
                                   double start_slope, Direction direction = Direction::Forward,
                                   const Units& units = {})
{
    units.validate();
    detail::check_grid_in_domain(spec, grid);
    RealField out(grid);
    if (start_value == 0.0 && start_slope == 0.0)
        return out;
    const auto uu = detail::scaled_potential(spec, E, grid, units);
    const bool fwd = direction == Direction::Forward;
    const std::size_t start = fwd ? 0 : grid.size() - 1;
    auto res = detail::numerov_span(spec, E, grid, units, uu, out.values, start, start_value, start_slope,
                                    fwd ? +1 : -1, false);
    out.unbounded = res.overflow;
    if (!out.unbounded) {
        out.derivative = detail::numerov_derivative(out.values, uu, grid.spacing());
        out.derivative[start] = start_slope;
    }
    else {
        std::fill(out.derivative.begin(), out.derivative.end(), numerics::nan);
    }
    return out;
}

/// Wronskian phi*theta' - phi'*theta at every node.
inline std::vector<double> wronskian_profile(const RealField& phi, const RealField& theta)
{
    std::vector<double> w(phi.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = phi.values[i] * theta.derivative[i] - phi.derivative[i] * theta.values[i];
    return w;
}

/// Assembles a pair from two given solutions, certifying independence
/// through the Wronskian.
inline SolutionPair make_solution_pair(RealField phi, RealField theta, double energy)
{
    if (!(phi.grid == theta.grid))
        raise(ErrorKind::InvalidArgument, "pair members must share a grid");
    const auto w = wronskian_profile(phi, theta);
    double sum = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        sum += w[i];
        scale = std::max({scale, std::abs(phi.values[i] * theta.derivative[i]),
                          std::abs(phi.derivative[i] * theta.values[i])});
    }
    const double mean = sum / static_cast<double>(w.size());
    if (!std::isfinite(mean) || std::abs(mean) < 1e-12 || std::abs(mean) < 1e-12 * scale) {
        std::ostringstream os;
        os << "Wronskian " << mean << " is numerically zero";
        raise(ErrorKind::DegeneratePair, os.str());
    }
    SolutionPair p;
    p.phi = std::move(phi);
    p.theta = std::move(theta);
    p.wronskian = mean;
    p.energy = energy;
    return p;
}

namespace detail {

/// Number of sign changes on (q_min, q_max] of the solution launched from
/// q_min with Dirichlet data; equals the count of eigenvalues below E.
inline int count_nodes(const PotentialSpec& spec, double E, const Grid& g, const Units& u)
{
    const auto uu = scaled_potential(spec, E, g, u);
    const double h = g.spacing();
    const double c = h * h / 12.0;
    double prev = 0.0;
    double cur = first_step(spec, E, u, g.at(0), h, 0.0, 1.0);
    int nodes = 0;
    double last_sign = cur;
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
        double next = (2.0 * (1.0 + 5.0 * c * uu[i]) * cur - (1.0 - c * uu[i - 1]) * prev) / (1.0 - c * uu[i + 1]);
        if (std::abs(next) > 1e100) {
            next *= 1e-100;
            cur *= 1e-100;
        }
        if (next != 0.0) {
            if ((next < 0.0) != (last_sign < 0.0) && last_sign != 0.0)
                ++nodes;
            last_sign = next;
        }
        prev = cur;
        cur = next;
    }
    return nodes;
}

/// Match point for two-sided shooting: the midpoint for the infinite well,
/// otherwise the outermost classical turning point on the right.
inline std::size_t match_index(const PotentialSpec& spec, double E, const Grid& g, const Units& u)
{
    const std::size_t n = g.size();
    std::size_t m = g.midpoint_index();
    if (spec.family != PotentialFamily::InfiniteWell) {
        for (std::size_t i = n - 1; i > 0; --i) {
            if (evaluate_potential(spec, g.at(i), u) <= E) {
                m = i;
                break;
            }
        }
    }
    return std::clamp<std::size_t>(m, 3, n - 4);
}

struct Shot
{
    std::vector<double> left;  // valid on [0, m + 2]
    std::vector<double> right; // valid on [m - 2, n - 1]
    std::vector<double> uu;
    std::size_t m = 0;
    double lv = 0.0, ld = 0.0, rv = 0.0, rd = 0.0;
    double mismatch = 0.0; // normalized left/right Wronskian at m
};

inline double slope_at(const std::vector<double>& p, const std::vector<double>& uu, double h, std::size_t m)
{
    const double gm2 = uu[m - 2] * p[m - 2], gm1 = uu[m - 1] * p[m - 1];
    const double gp1 = uu[m + 1] * p[m + 1], gp2 = uu[m + 2] * p[m + 2];
    const double g1 = (-gp2 + 8.0 * gp1 - 8.0 * gm1 + gm2) / (12.0 * h);
    const double g3 = (gp2 - 2.0 * gp1 + 2.0 * gm1 - gm2) / (2.0 * h * h * h);
    return (p[m + 1] - p[m - 1]) / (2.0 * h) - h * h / 6.0 * g1 - h * h * h * h / 120.0 * g3;
}

inline Shot shoot(const PotentialSpec& spec, double E, const Grid& g, const Units& u, std::size_t m)
{
    Shot s;
    s.m = m;
    s.uu = scaled_potential(spec, E, g, u);
    s.left.assign(g.size(), 0.0);
    s.right.assign(g.size(), 0.0);
    const double h = g.spacing();
    numerov_span(spec, E, g, u, s.uu, s.left, 0, 0.0, 1.0, +1, true, m + 2);
    numerov_span(spec, E, g, u, s.uu, s.right, g.size() - 1, 0.0, -1.0, -1, true, m - 2);
    s.lv = s.left[m];
    s.ld = slope_at(s.left, s.uu, h, m);
    s.rv = s.right[m];
    s.rd = slope_at(s.right, s.uu, h, m);
    s.mismatch = (s.lv * s.rd - s.ld * s.rv) / (std::hypot(s.lv, s.ld) * std::hypot(s.rv, s.rd));
    return s;
}

/// Joins the two shots at the match node with a least-squares amplitude
/// over (value, slope) and normalizes to unit L2 norm.
inline RealField assemble(const Shot& s, const Grid& g, double* defect)
{
    const double h = g.spacing();
    const std::size_t m = s.m;
    const std::size_t n = g.size();
    const double ell = (g.q_max - g.q_min) / (2.0 * std::numbers::pi);
    const double scale = (s.lv * s.rv + ell * ell * s.ld * s.rd) / (s.rv * s.rv + ell * ell * s.rd * s.rd);
    std::vector<double> psi(n);
    for (std::size_t i = 0; i < n; ++i)
        psi[i] = i <= m ? s.left[i] : scale * s.right[i];
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i)
        sq[i] = psi[i] * psi[i];
    const double norm = std::sqrt(numerics::simpson(sq, h));
    for (auto& v : psi)
        v /= norm;
    if (defect)
        *defect = std::abs(s.mismatch);
    RealField out(g);
    out.values = std::move(psi);
    out.derivative = numerov_derivative(out.values, s.uu, h);
    return out;
}

/// Left-wall run across the whole grid, normalized to unit L2 norm.
inline RealField single_run(const PotentialSpec& spec, double E, const Grid& g, const Units& u)
{
    RealField out(g);
    const auto uu = scaled_potential(spec, E, g, u);
    numerov_span(spec, E, g, u, uu, out.values, 0, 0.0, 1.0, +1, true);
    std::vector<double> sq(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        sq[i] = out.values[i] * out.values[i];
    const double norm = std::sqrt(numerics::simpson(sq, g.spacing()));
    for (auto& v : out.values)
        v /= norm;
    out.derivative = numerov_derivative(out.values, uu, g.spacing());
    return out;
}

inline double anchor_wavenumber(const PotentialSpec& spec, double E, const Grid& g, std::size_t c, const Units& u)
{
    const double k = std::sqrt(2.0 * u.mass * std::abs(E - evaluate_potential(spec, g.at(c), u))) / u.hbar;
    if (k > 1e-8)
        return k;
    return 1.0 / (g.q_max - g.q_min);
}

/// Solution with the given (value, slope) at node c, integrated outward to
/// both edges. The backward run continues the forward recurrence through c,
/// so there is no kink at the anchor.
inline RealField anchored_solution(const PotentialSpec& spec, double E, const Grid& g, const Units& u, std::size_t c,
                                   double value, double slope)
{
    RealField f(g);
    const auto uu = scaled_potential(spec, E, g, u);
    auto r1 = numerov_span(spec, E, g, u, uu, f.values, c, value, slope, +1, false);
    std::optional<double> back;
    if (c > 0 && c + 1 < g.size() && !r1.overflow) {
        const double k = g.spacing() * g.spacing() / 12.0;
        back = (2.0 * (1.0 + 5.0 * k * uu[c]) * value - (1.0 - k * uu[c + 1]) * f.values[c + 1])
               / (1.0 - k * uu[c - 1]);
    }
    auto r2 = numerov_span(spec, E, g, u, uu, f.values, c, value, slope, -1, false, std::nullopt, back);
    f.unbounded = r1.overflow || r2.overflow;
    if (f.unbounded) {
        std::fill(f.derivative.begin(), f.derivative.end(), numerics::nan);
        return f;
    }
    f.derivative = numerov_derivative(f.values, uu, g.spacing());
    return f;
}

inline bool is_bound_energy(const PotentialSpec& spec, double E, const Units& u)
{
    switch (spectrum_class(spec)) {
        case SpectrumClass::DiscreteBound:
            return true;
        case SpectrumClass::Continuous:
            return false;
        case SpectrumClass::Mixed:
            return E < std::min(evaluate_potential(spec, spec.q_min, u), evaluate_potential(spec, spec.q_max, u));
    }
    return false;
}

/// Partner of phi from the anchor protocol: theta(c) = -phi'(c)/kappa,
/// theta'(c) = kappa phi(c), so the Wronskian at c is kappa phi^2 + phi'^2/kappa.
inline RealField partner_of(const PotentialSpec& spec, double E, const RealField& phi, const Units& u)
{
    const Grid& g = phi.grid;
    const std::size_t c = g.midpoint_index();
    const double kappa = anchor_wavenumber(spec, E, g, c, u);
    return anchored_solution(spec, E, g, u, c, -phi.derivative[c] / kappa, kappa * phi.values[c]);
}

} // namespace detail

/// Independent solution pair at energy E on the grid.
///
/// Bound families: phi is the two-sided shooting solution at E normalized
/// to unit L2 norm (the eigenfunction when E is an eigenvalue; otherwise the
/// derivative kink is reported as match_defect). Continuous families: phi
/// has phi(c) = 1, phi'(c) = 0 at the midpoint node c. theta always follows
/// the anchor protocol of detail::partner_of.
inline SolutionPair solution_pair(const PotentialSpec& spec, double E, const Grid& grid, const Units& units = {})
{
    units.validate();
    detail::check_grid_in_domain(spec, grid);
    RealField phi;
    double defect = 0.0;
    if (detail::is_bound_energy(spec, E, units)) {
        const std::size_t m = detail::match_index(spec, E, grid, units);
        auto shot = detail::shoot(spec, E, grid, units, m);
        phi = detail::assemble(shot, grid, &defect);
    }
    else {
        phi = detail::anchored_solution(spec, E, grid, units, grid.midpoint_index(), 1.0, 0.0);
    }
    auto theta = detail::partner_of(spec, E, phi, units);
    if (phi.unbounded || theta.unbounded)
        raise(ErrorKind::NotConverged, "solution overflowed on the grid");
    auto pair = make_solution_pair(std::move(phi), std::move(theta), E);
    pair.match_defect = defect;
    return pair;
}

/// Bound states by shooting: brackets from Sturm node counting, then
/// bisection on the sign of the left/right Wronskian at the match point.
/// Mixed spectra return only the states below the lower domain-edge value.
inline std::vector<EigenSolution> find_bound_eigenvalues(const PotentialSpec& spec, const Grid& grid, int n_max,
                                                         double tol = 1e-10, const Units& units = {})
{
    units.validate();
    detail::check_grid_in_domain(spec, grid);
    if (!(tol > 0.0))
        raise(ErrorKind::InvalidArgument, "eigenvalue tolerance must be positive");
    if (n_max < 1)
        raise(ErrorKind::InvalidArgument, "n_max must be at least 1");
    const auto cls = spectrum_class(spec);
    if (cls == SpectrumClass::Continuous)
        raise(ErrorKind::InvalidArgument, std::string("no bound states for ") + to_string(spec.family));

    double v_min = evaluate_potential(spec, grid.at(0), units);
    for (std::size_t i = 1; i < grid.size(); ++i)
        v_min = std::min(v_min, evaluate_potential(spec, grid.at(i), units));
    auto count = [&](double E) { return detail::count_nodes(spec, E, grid, units); };

    const double e_lo = v_min;
    double e_hi;
    int wanted = n_max;
    if (cls == SpectrumClass::Mixed) {
        e_hi = std::min(evaluate_potential(spec, grid.q_min, units), evaluate_potential(spec, grid.q_max, units));
        e_hi -= 1e-12 * std::max(1.0, std::abs(e_hi));
        wanted = std::min(n_max, count(e_hi));
    }
    else {
        double span = 1.0;
        e_hi = e_lo + span;
        int guard = 0;
        while (count(e_hi) < n_max) {
            span *= 2.0;
            e_hi = e_lo + span;
            if (++guard > 200)
                raise(ErrorKind::NotConverged, "energy scan limit reached before bracketing the requested levels");
        }
    }

    std::vector<EigenSolution> out;
    for (int n = 0; n < wanted; ++n) {
        // bracket with count(lo) == n and count(hi) == n + 1: exactly one level inside
        double lo = e_lo;
        double hi = e_hi;
        int c_lo = count(lo);
        int c_hi = count(hi);
        for (int it = 0; it < 400 && !(c_lo == n && c_hi == n + 1); ++it) {
            const double mid = 0.5 * (lo + hi);
            const int c = count(mid);
            if (c <= n) {
                lo = mid;
                c_lo = c;
            }
            else {
                hi = mid;
                c_hi = c;
            }
        }
        if (!(c_lo == n && c_hi == n + 1)) {
            std::ostringstream os;
            os << "could not isolate level " << n << " in [" << lo << ", " << hi << "]";
            raise(ErrorKind::NotConverged, os.str());
        }
        const std::size_t m = detail::match_index(spec, 0.5 * (lo + hi), grid, units);
        double f_lo = detail::shoot(spec, lo, grid, units, m).mismatch;
        // refine past tol down to adjacent doubles: any residual mismatch
        // shows up as a kink at the match node
        for (int it = 0; it < 300; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (!(mid > lo && mid < hi))
                break;
            const double fm = detail::shoot(spec, mid, grid, units, m).mismatch;
            if ((fm < 0.0) == (f_lo < 0.0)) {
                lo = mid;
                f_lo = fm;
            }
            else {
                hi = mid;
            }
        }
        EigenSolution sol;
        sol.index = n;
        sol.level = n + level_offset(spec);
        sol.energy = 0.5 * (lo + hi);
        if (spec.family == PotentialFamily::InfiniteWell) {
            // no forbidden region: one run from the left wall, no join
            sol.psi = detail::single_run(spec, sol.energy, grid, units);
        }
        else {
            auto shot = detail::shoot(spec, sol.energy, grid, units, m);
            sol.psi = detail::assemble(shot, grid, nullptr);
        }
        sol.partner = detail::partner_of(spec, sol.energy, sol.psi, units);
        out.push_back(std::move(sol));
    }
    return out;
}

/// Pair built from an eigen solution: phi is the eigenfunction, theta its
/// non-normalizable partner.
inline SolutionPair solution_pair(const EigenSolution& eig)
{
    return make_solution_pair(eig.psi, eig.partner, eig.energy);
}

inline int count_interior_nodes(const RealField& psi, double rel_floor = 1e-10)
{
    double peak = 0.0;
    for (double v : psi.values)
        peak = std::max(peak, std::abs(v));
    int nodes = 0;
    double last = 0.0;
    for (std::size_t i = 1; i + 1 < psi.size(); ++i) {
        const double v = psi.values[i];
        if (std::abs(v) < rel_floor * peak)
            continue;
        if (last != 0.0 && (v < 0.0) != (last < 0.0))
            ++nodes;
        last = v;
    }
    return nodes;
}

/// Analytic plane-wave scattering state for a constant potential or a step:
/// e^{ik1 q} + r e^{-ik1 q} for q < 0 and t e^{ik2 q} for q >= 0, with k2
/// imaginary (evanescent) below the step.
struct ScatteringState
{
    double energy = 0.0;
    double v_left = 0.0;
    double v_right = 0.0;
    Units units;
    double k1 = 0.0;
    std::complex<double> k2;
    std::complex<double> r;
    std::complex<double> t;

    std::complex<double> psi(double q) const
    {
        using namespace std::complex_literals;
        if (q < 0.0)
            return std::exp(1i * k1 * q) + r * std::exp(-1i * k1 * q);
        return t * std::exp(1i * k2 * q);
    }

    std::complex<double> dpsi(double q) const
    {
        using namespace std::complex_literals;
        if (q < 0.0)
            return 1i * k1 * (std::exp(1i * k1 * q) - r * std::exp(-1i * k1 * q));
        return 1i * k2 * t * std::exp(1i * k2 * q);
    }

    /// Phase gradient W' = hbar Im(psi'/psi) of the stationary state.
    double momentum(double q) const { return units.hbar * std::imag(dpsi(q) / psi(q)); }

    ComplexField sample(const Grid& g) const
    {
        ComplexField f(g);
        for (std::size_t i = 0; i < g.size(); ++i) {
            f.values[i] = psi(g.at(i));
            f.derivative[i] = dpsi(g.at(i));
        }
        return f;
    }
};

inline ScatteringState scattering_state(const PotentialSpec& spec, double E, const Units& units = {})
{
    units.validate();
    ScatteringState s;
    s.energy = E;
    s.units = units;
    switch (spec.family) {
        case PotentialFamily::Constant:
            s.v_left = s.v_right = spec.value;
            break;
        case PotentialFamily::Step:
            s.v_left = 0.0;
            s.v_right = spec.height;
            break;
        default:
            raise(ErrorKind::InvalidArgument, "scattering states are defined for Constant and Step potentials");
    }
    if (!(E > s.v_left))
        raise(ErrorKind::InvalidArgument, "scattering energy must exceed the left-side potential");
    const double two_m = 2.0 * units.mass;
    s.k1 = std::sqrt(two_m * (E - s.v_left)) / units.hbar;
    s.k2 = std::sqrt(std::complex<double>(two_m * (E - s.v_right), 0.0)) / units.hbar;
    s.r = (s.k1 - s.k2) / (s.k1 + s.k2);
    s.t = 2.0 * s.k1 / (s.k1 + s.k2);
    return s;
}

/// j = (hbar/m) Im(conj(psi) psi').
inline std::vector<double> probability_current(const ComplexField& psi, const Units& units = {})
{
    std::vector<double> j(psi.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        j[i] = units.hbar / units.mass * std::imag(std::conj(psi.values[i]) * psi.derivative[i]);
    return j;
}

} // namespace qtraj

#endif // QTRAJ_SCHRODINGER1D_HPP

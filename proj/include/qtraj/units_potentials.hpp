#ifndef QTRAJ_UNITS_POTENTIALS_HPP
#define QTRAJ_UNITS_POTENTIALS_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qtraj/errors.hpp"

namespace qtraj {

/// Action and mass units. Natural units (hbar = m = 1) by default.
struct Units
{
    double hbar = 1.0;
    double mass = 1.0;

    void validate() const
    {
        if (!(hbar > 0.0) || !std::isfinite(hbar))
            raise(ErrorKind::InvalidArgument, "hbar must be positive");
        if (!(mass > 0.0) || !std::isfinite(mass))
            raise(ErrorKind::InvalidArgument, "mass must be positive");
    }
};

enum class PotentialFamily { Constant, InfiniteWell, FiniteWell, Harmonic, Step, Tabulated };

enum class SpectrumClass { DiscreteBound, Continuous, Mixed };

inline const char* to_string(PotentialFamily f)
{
    switch (f) {
        case PotentialFamily::Constant: return "Constant";
        case PotentialFamily::InfiniteWell: return "InfiniteWell";
        case PotentialFamily::FiniteWell: return "FiniteWell";
        case PotentialFamily::Harmonic: return "Harmonic";
        case PotentialFamily::Step: return "Step";
        case PotentialFamily::Tabulated: return "Tabulated";
    }
    return "?";
}

inline const char* to_string(SpectrumClass c)
{
    switch (c) {
        case SpectrumClass::DiscreteBound: return "DiscreteBound";
        case SpectrumClass::Continuous: return "Continuous";
        case SpectrumClass::Mixed: return "Mixed";
    }
    return "?";
}

inline std::optional<PotentialFamily> parse_family(std::string_view name)
{
    for (auto f : {PotentialFamily::Constant, PotentialFamily::InfiniteWell, PotentialFamily::FiniteWell,
                   PotentialFamily::Harmonic, PotentialFamily::Step, PotentialFamily::Tabulated}) {
        if (name == to_string(f))
            return f;
    }
    return std::nullopt;
}

struct TableNode
{
    double q;
    double v;
};

/// A one-dimensional potential family with its parameters and domain.
///
/// Conventions: the infinite well occupies [0, L] with the walls at the
/// domain edges; the finite well is V = 0 for |q| < L/2 and V0 outside;
/// the harmonic oscillator and the step are centred on q = 0, with the step
/// taking its upper value V0 for q >= 0.
struct PotentialSpec
{
    PotentialFamily family = PotentialFamily::Constant;
    double value = 0.0;  // Constant
    double width = 1.0;  // InfiniteWell, FiniteWell
    double height = 0.0; // FiniteWell depth, Step height
    double omega = 1.0;  // Harmonic
    std::vector<TableNode> table;
    double q_min = 0.0;
    double q_max = 1.0;

    static PotentialSpec constant(double v, double q_min, double q_max)
    {
        PotentialSpec s;
        s.family = PotentialFamily::Constant;
        s.value = v;
        s.q_min = q_min;
        s.q_max = q_max;
        s.validate();
        return s;
    }

    static PotentialSpec infinite_well(double width)
    {
        PotentialSpec s;
        s.family = PotentialFamily::InfiniteWell;
        s.width = width;
        s.q_min = 0.0;
        s.q_max = width;
        s.validate();
        return s;
    }

    static PotentialSpec finite_well(double width, double depth, double q_min, double q_max)
    {
        PotentialSpec s;
        s.family = PotentialFamily::FiniteWell;
        s.width = width;
        s.height = depth;
        s.q_min = q_min;
        s.q_max = q_max;
        s.validate();
        return s;
    }

    static PotentialSpec harmonic(double omega, double q_min, double q_max)
    {
        PotentialSpec s;
        s.family = PotentialFamily::Harmonic;
        s.omega = omega;
        s.q_min = q_min;
        s.q_max = q_max;
        s.validate();
        return s;
    }

    static PotentialSpec step(double height, double q_min, double q_max)
    {
        PotentialSpec s;
        s.family = PotentialFamily::Step;
        s.height = height;
        s.q_min = q_min;
        s.q_max = q_max;
        s.validate();
        return s;
    }

    static PotentialSpec tabulated(std::vector<TableNode> nodes)
    {
        PotentialSpec s;
        s.family = PotentialFamily::Tabulated;
        s.table = std::move(nodes);
        if (!s.table.empty()) {
            s.q_min = s.table.front().q;
            s.q_max = s.table.back().q;
        }
        s.validate();
        return s;
    }

    void validate() const
    {
        if (!(q_max > q_min) || !std::isfinite(q_min) || !std::isfinite(q_max))
            raise(ErrorKind::InvalidArgument, "potential domain must be a finite interval with q_max > q_min");
        switch (family) {
            case PotentialFamily::InfiniteWell:
            case PotentialFamily::FiniteWell:
                if (!(width > 0.0))
                    raise(ErrorKind::InvalidArgument, "well width must be positive");
                if (family == PotentialFamily::FiniteWell && !(height > 0.0))
                    raise(ErrorKind::InvalidArgument, "finite well depth must be positive");
                break;
            case PotentialFamily::Harmonic:
                if (!(omega > 0.0))
                    raise(ErrorKind::InvalidArgument, "harmonic frequency must be positive");
                break;
            case PotentialFamily::Tabulated:
                if (table.size() < 2)
                    raise(ErrorKind::InvalidArgument, "tabulated potential needs at least two nodes");
                for (std::size_t i = 1; i < table.size(); ++i) {
                    if (!(table[i].q > table[i - 1].q))
                        raise(ErrorKind::InvalidArgument, "tabulated nodes must be strictly increasing in q");
                }
                break;
            default:
                break;
        }
    }
};

inline SpectrumClass spectrum_class(const PotentialSpec& spec)
{
    switch (spec.family) {
        case PotentialFamily::InfiniteWell:
        case PotentialFamily::Harmonic:
            return SpectrumClass::DiscreteBound;
        case PotentialFamily::Constant:
        case PotentialFamily::Step:
            return SpectrumClass::Continuous;
        case PotentialFamily::FiniteWell:
        case PotentialFamily::Tabulated:
            return SpectrumClass::Mixed;
    }
    return SpectrumClass::Mixed;
}

/// Offset between node count and the family's conventional quantum number
/// (the infinite well counts levels from 1).
inline int level_offset(const PotentialSpec& spec)
{
    return spec.family == PotentialFamily::InfiniteWell ? 1 : 0;
}

inline bool in_domain(const PotentialSpec& spec, double q)
{
    const double slack = 1e-12 * std::max(1.0, spec.q_max - spec.q_min);
    return q >= spec.q_min - slack && q <= spec.q_max + slack;
}

inline double evaluate_potential(const PotentialSpec& spec, double q, const Units& units = {})
{
    if (!in_domain(spec, q) || !std::isfinite(q)) {
        std::ostringstream os;
        os << "q = " << q << " outside [" << spec.q_min << ", " << spec.q_max << "]";
        raise(ErrorKind::Domain, os.str());
    }
    switch (spec.family) {
        case PotentialFamily::Constant:
        case PotentialFamily::InfiniteWell:
            return spec.family == PotentialFamily::Constant ? spec.value : 0.0;
        case PotentialFamily::FiniteWell:
            return std::abs(q) < 0.5 * spec.width ? 0.0 : spec.height;
        case PotentialFamily::Harmonic:
            return 0.5 * units.mass * spec.omega * spec.omega * q * q;
        case PotentialFamily::Step:
            return q < 0.0 ? 0.0 : spec.height;
        case PotentialFamily::Tabulated: {
            const auto& t = spec.table;
            auto it = std::lower_bound(t.begin(), t.end(), q, [](const TableNode& n, double x) { return n.q < x; });
            if (it == t.begin())
                return t.front().v;
            if (it == t.end())
                return t.back().v;
            if (it->q == q)
                return it->v;
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            const double s = (q - lo.q) / (hi.q - lo.q);
            return lo.v + s * (hi.v - lo.v);
        }
    }
    return 0.0;
}

namespace detail {

template <class F>
double bisect_root(F&& f, double lo, double hi, double tol)
{
    double flo = f(lo);
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        }
        else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Bound-state energies of the finite square well of infinite extent from
/// the even/odd transcendental equations in z = kL/2.
inline std::vector<double> finite_well_levels(const PotentialSpec& spec, int n_max, const Units& u)
{
    const double half = 0.5 * spec.width;
    const double z0 = half * std::sqrt(2.0 * u.mass * spec.height) / u.hbar;
    const double pi = std::numbers::pi;
    std::vector<double> out;
    for (int n = 0; n < n_max; ++n) {
        const double lo = 0.5 * pi * n;
        if (lo >= z0)
            break;
        const double hi = std::min(0.5 * pi * (n + 1), z0);
        const double eps = 1e-15;
        // even: z tan z - sqrt(z0^2 - z^2) = 0 ; odd: -z cot z - sqrt(z0^2 - z^2) = 0
        auto g = [&](double z) {
            const double rhs = std::sqrt(std::max(0.0, z0 * z0 - z * z));
            if (n % 2 == 0)
                return z * std::sin(z) - rhs * std::cos(z);
            return -z * std::cos(z) - rhs * std::sin(z);
        };
        const double a = lo + eps;
        const double b = hi - eps;
        if ((g(a) < 0.0) == (g(b) < 0.0))
            break;
        const double z = bisect_root(g, a, b, 1e-12 * std::max(1.0, z0));
        const double k = 2.0 * z / spec.width;
        out.push_back(u.hbar * u.hbar * k * k / (2.0 * u.mass));
    }
    return out;
}

} // namespace detail

/// Closed-form (or transcendental-root) spectrum for the families that have
/// one; the first n_max levels in ascending order. Continuous families and
/// tabulated potentials return std::nullopt.
inline std::optional<std::vector<double>> analytic_spectrum(const PotentialSpec& spec, int n_max, const Units& units = {})
{
    if (n_max < 1)
        raise(ErrorKind::InvalidArgument, "n_max must be at least 1");
    units.validate();
    const double pi = std::numbers::pi;
    std::vector<double> out;
    switch (spec.family) {
        case PotentialFamily::InfiniteWell:
            for (int n = 1; n <= n_max; ++n)
                out.push_back(n * n * pi * pi * units.hbar * units.hbar / (2.0 * units.mass * spec.width * spec.width));
            return out;
        case PotentialFamily::Harmonic:
            for (int n = 0; n < n_max; ++n)
                out.push_back((n + 0.5) * units.hbar * spec.omega);
            return out;
        case PotentialFamily::FiniteWell:
            return detail::finite_well_levels(spec, n_max, units);
        default:
            return std::nullopt;
    }
}

} // namespace qtraj

#endif // QTRAJ_UNITS_POTENTIALS_HPP

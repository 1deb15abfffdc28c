#ifndef QTRAJ_NUMERICS_HPP
#define QTRAJ_NUMERICS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "qtraj/errors.hpp"

namespace qtraj {

/// Uniform grid on [q_min, q_max].
struct Grid
{
    double q_min = 0.0;
    double q_max = 1.0;
    std::size_t n_points = 2001;

    Grid() = default;

    Grid(double lo, double hi, std::size_t n)
        : q_min(lo)
        , q_max(hi)
        , n_points(n)
    {
        validate();
    }

    void validate() const
    {
        if (n_points < 3)
            raise(ErrorKind::InvalidArgument, "grid needs at least 3 points");
        if (!(q_max > q_min))
            raise(ErrorKind::InvalidArgument, "grid requires q_max > q_min");
    }

    double spacing() const { return (q_max - q_min) / static_cast<double>(n_points - 1); }

    double at(std::size_t i) const
    {
        if (i + 1 == n_points)
            return q_max;
        return q_min + spacing() * static_cast<double>(i);
    }

    std::size_t size() const { return n_points; }

    /// Index of the node nearest to q (clamped to the grid).
    std::size_t nearest(double q) const
    {
        const double s = std::round((q - q_min) / spacing());
        if (s <= 0.0)
            return 0;
        return std::min(n_points - 1, static_cast<std::size_t>(s));
    }

    std::size_t midpoint_index() const { return nearest(0.5 * (q_min + q_max)); }

    bool contains(double q) const
    {
        const double slack = 1e-12 * (q_max - q_min);
        return q >= q_min - slack && q <= q_max + slack;
    }

    bool operator==(const Grid& o) const
    {
        return q_min == o.q_min && q_max == o.q_max && n_points == o.n_points;
    }
};

/// Samples of a function and of its first derivative on a grid.
template <class T>
struct Field
{
    Grid grid;
    std::vector<T> values;
    std::vector<T> derivative;
    /// Set when the integration producing the field hit the overflow guard;
    /// samples past that point are NaN.
    bool unbounded = false;

    Field() = default;

    explicit Field(const Grid& g)
        : grid(g)
        , values(g.size(), T{})
        , derivative(g.size(), T{})
    {
    }

    std::size_t size() const { return values.size(); }
};

using RealField = Field<double>;
using ComplexField = Field<std::complex<double>>;

namespace numerics {

inline constexpr double nan = std::numeric_limits<double>::quiet_NaN();

/// Composite Simpson rule on uniformly spaced samples; the trailing interval
/// of an even sample count is closed with the 3/8 rule.
inline double simpson(std::span<const double> f, double h)
{
    const std::size_t n = f.size();
    if (n < 2)
        return 0.0;
    if (n == 2)
        return 0.5 * h * (f[0] + f[1]);
    if (n == 4)
        return 3.0 * h / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]);
    std::size_t last = (n % 2 == 1) ? n - 1 : n - 4;
    double s = f[0] + f[last];
    for (std::size_t i = 1; i < last; ++i)
        s += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
    double total = s * h / 3.0;
    if (n % 2 == 0)
        total += 3.0 * h / 8.0 * (f[n - 4] + 3.0 * f[n - 3] + 3.0 * f[n - 2] + f[n - 1]);
    return total;
}

/// Running integral F(q_i) = \int_{q_anchor}^{q_i} f dq on a uniform grid,
/// fourth-order accurate: Simpson over node pairs, with the half-interval
/// rule h(5f0 + 8f1 - f2)/12 for odd offsets.
inline std::vector<double> cumulative_integral(std::span<const double> f, double h, std::size_t anchor)
{
    const std::size_t n = f.size();
    if (n < 3)
        raise(ErrorKind::InvalidArgument, "cumulative integral needs at least 3 samples");
    if (anchor >= n)
        raise(ErrorKind::InvalidArgument, "integration anchor outside the samples");
    // integral over [q_i, q_{i+1}] from three neighbouring nodes
    auto segment = [&](std::size_t i) {
        if (i + 2 < n)
            return h * (5.0 * f[i] + 8.0 * f[i + 1] - f[i + 2]) / 12.0;
        return h * (-f[i - 1] + 8.0 * f[i] + 5.0 * f[i + 1]) / 12.0;
    };
    auto pair = [&](std::size_t i) { return h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]); };

    std::vector<double> out(n, 0.0);
    for (std::size_t i = anchor + 1; i < n; ++i) {
        if ((i - anchor) % 2 == 0)
            out[i] = out[i - 2] + pair(i - 2);
        else
            out[i] = out[i - 1] + segment(i - 1);
    }
    for (std::size_t k = 1; k <= anchor; ++k) {
        const std::size_t i = anchor - k;
        if (k % 2 == 0)
            out[i] = out[i + 2] - pair(i);
        else
            out[i] = out[i + 1] - segment(i);
    }
    return out;
}

/// Fourth-order central first derivative; NaN within 2 nodes of the edges.
inline std::vector<double> central_d1(std::span<const double> f, double h)
{
    const std::size_t n = f.size();
    std::vector<double> d(n, nan);
    for (std::size_t i = 2; i + 2 < n; ++i)
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
    return d;
}

/// Fourth-order central second derivative; NaN within 2 nodes of the edges.
inline std::vector<double> central_d2(std::span<const double> f, double h)
{
    const std::size_t n = f.size();
    std::vector<double> d(n, nan);
    for (std::size_t i = 2; i + 2 < n; ++i)
        d[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) / (12.0 * h * h);
    return d;
}

/// Cubic Hermite interpolation from values and slopes on a uniform grid.
template <class T>
T hermite(const Grid& g, std::span<const T> v, std::span<const T> d, double q)
{
    const double h = g.spacing();
    double s = (q - g.q_min) / h;
    std::size_t i;
    if (s <= 0.0) {
        i = 0;
        s = std::max(s, 0.0);
    }
    else {
        i = std::min(static_cast<std::size_t>(s), g.size() - 2);
    }
    const double x = std::clamp(s - static_cast<double>(i), 0.0, 1.0);
    const double x2 = x * x;
    const double x3 = x2 * x;
    const double h00 = 2.0 * x3 - 3.0 * x2 + 1.0;
    const double h10 = x3 - 2.0 * x2 + x;
    const double h01 = -2.0 * x3 + 3.0 * x2;
    const double h11 = x3 - x2;
    return h00 * v[i] + h10 * h * d[i] + h01 * v[i + 1] + h11 * h * d[i + 1];
}

/// Cubic Lagrange interpolation through the four nodes around q.
inline double lagrange4(const Grid& g, std::span<const double> v, double q)
{
    const double h = g.spacing();
    const double s = (q - g.q_min) / h;
    const long n = static_cast<long>(g.size());
    if (n < 4)
        raise(ErrorKind::InvalidArgument, "cubic interpolation needs at least 4 nodes");
    long i0 = static_cast<long>(std::floor(s)) - 1;
    i0 = std::clamp(i0, 0L, n - 4);
    double out = 0.0;
    for (long a = 0; a < 4; ++a) {
        double w = 1.0;
        for (long b = 0; b < 4; ++b) {
            if (b != a)
                w *= (s - static_cast<double>(i0 + b)) / static_cast<double>(a - b);
        }
        out += w * v[static_cast<std::size_t>(i0 + a)];
    }
    return out;
}

/// Hermite interpolation of a field at an arbitrary position.
template <class T>
T interpolate(const Field<T>& f, double q)
{
    return hermite<T>(f.grid, f.values, f.derivative, q);
}

} // namespace numerics
} // namespace qtraj

#endif // QTRAJ_NUMERICS_HPP

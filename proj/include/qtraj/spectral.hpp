#ifndef QTRAJ_SPECTRAL_HPP
#define QTRAJ_SPECTRAL_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <fftw3.h>

#include "qtraj/energy_variation.hpp"
#include "qtraj/errors.hpp"

namespace qtraj {

struct SpectralPeak
{
    std::size_t bin = 0;
    double frequency = 0.0;
    double bin_width = 0.0;
    double magnitude = 0.0;
    std::size_t finite_samples = 0;
};

/// Amplitude spectrum |X_k| of uniformly spaced real samples (mean removed).
/// Non-finite samples are replaced by zero and counted out of finite_samples.
inline std::vector<double> amplitude_spectrum(std::vector<double> x, std::size_t* finite = nullptr)
{
    const std::size_t n = x.size();
    if (n < 4)
        raise(ErrorKind::InvalidArgument, "spectrum needs at least 4 samples");
    double mean = 0.0;
    std::size_t good = 0;
    for (double v : x) {
        if (std::isfinite(v)) {
            mean += v;
            ++good;
        }
    }
    mean = good ? mean / static_cast<double>(good) : 0.0;
    for (double& v : x)
        v = std::isfinite(v) ? v - mean : 0.0;
    if (finite)
        *finite = good;

    std::vector<std::complex<double>> out(n / 2 + 1);
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), x.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                          FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    std::vector<double> mag(out.size());
    for (std::size_t k = 0; k < out.size(); ++k)
        mag[k] = std::abs(out[k]);
    return mag;
}

/// Largest non-DC component of samples spaced dt apart.
inline SpectralPeak dominant_frequency(const std::vector<double>& x, double dt)
{
    if (!(dt > 0.0))
        raise(ErrorKind::InvalidArgument, "sample spacing must be positive");
    SpectralPeak p;
    const auto mag = amplitude_spectrum(x, &p.finite_samples);
    p.bin_width = 1.0 / (dt * static_cast<double>(x.size()));
    for (std::size_t k = 1; k < mag.size(); ++k) {
        if (mag[k] > p.magnitude) {
            p.magnitude = mag[k];
            p.bin = k;
        }
    }
    p.frequency = static_cast<double>(p.bin) * p.bin_width;
    return p;
}

/// v(q0, t) of the Floyd description under a beat frame, at n uniform times
/// covering `periods` beat periods from t0 (end point excluded).
inline std::vector<double> beat_velocity_series(const VariationFrame& frame, double q0, double t0, int periods,
                                                std::size_t n, double* dt_out = nullptr)
{
    if (periods < 1 || n < 4)
        raise(ErrorKind::InvalidArgument, "velocity series needs at least one period and 4 samples");
    const double dt = frame.beat_period() * periods / static_cast<double>(n);
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k)
        v[k] = beat_velocity(frame, q0, t0 + dt * static_cast<double>(k));
    if (dt_out)
        *dt_out = dt;
    return v;
}

} // namespace qtraj

#endif // QTRAJ_SPECTRAL_HPP

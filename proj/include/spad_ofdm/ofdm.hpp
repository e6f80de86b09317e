#pragma once

// DCO-OFDM framing: Hermitian spectrum assembly, unitary transforms, data-aided
// Bussgang gain estimation and single-tap equalization.

#include "spad_ofdm/clipping.hpp"
#include "spad_ofdm/fft.hpp"
#include "spad_ofdm/qam.hpp"

#include <cmath>
#include <complex>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spad_ofdm {

/// Number of data-bearing subcarriers, K/2 - 1.
inline std::size_t data_subcarriers(std::size_t fft_size) { return fft_size / 2 - 1; }

/// Per-subcarrier symbol variance that gives the time signal unit variance.
inline double subcarrier_variance(std::size_t fft_size)
{
    return static_cast<double>(fft_size) / static_cast<double>(fft_size - 2);
}

/// One OFDM symbol through the transmitter: spectrum, real time signal,
/// clipped signal and emitted optical power.
struct OfdmFrame
{
    std::size_t fft_size = 0;
    std::vector<cplx> spectrum;
    std::vector<double> samples;
    std::vector<double> clipped;
    std::vector<double> optical;
};

inline void check_fft_size(std::size_t fft_size)
{
    if (fft_size < 4 || !is_power_of_two(fft_size))
        throw std::invalid_argument("FFT size must be a power of two >= 4");
}

/// Builds the Hermitian spectrum: X[0] = X[K/2] = 0, data on 1..K/2-1 and the
/// mirrored conjugates on the upper half.
inline std::vector<cplx> build_frame(std::span<const cplx> symbols, std::size_t fft_size)
{
    check_fft_size(fft_size);
    const std::size_t half = fft_size / 2;
    if (symbols.size() != half - 1)
        throw std::invalid_argument("build_frame: expected " + std::to_string(half - 1) +
                                    " symbols, got " + std::to_string(symbols.size()));
    std::vector<cplx> spectrum(fft_size, cplx{});
    for (std::size_t k = 1; k < half; ++k)
    {
        spectrum[k] = symbols[k - 1];
        spectrum[fft_size - k] = std::conj(symbols[k - 1]);
    }
    return spectrum;
}

inline bool is_hermitian(std::span<const cplx> spectrum, double rel_tol = 1e-12)
{
    const std::size_t n = spectrum.size();
    double scale = 0.0;
    for (const auto& v : spectrum)
        scale = std::max(scale, std::abs(v));
    const double tol = rel_tol * std::max(scale, 1.0);
    if (std::abs(spectrum[0].imag()) > tol || std::abs(spectrum[n / 2].imag()) > tol)
        return false;
    for (std::size_t k = 1; k < n / 2; ++k)
        if (std::abs(spectrum[n - k] - std::conj(spectrum[k])) > tol)
            return false;
    return true;
}

/// Real time signal of a Hermitian spectrum (unitary IDFT).
inline std::vector<double> inverse_transform(std::span<const cplx> spectrum)
{
    check_fft_size(spectrum.size());
    if (!is_hermitian(spectrum))
        throw std::invalid_argument("inverse_transform: spectrum is not Hermitian");
    std::vector<cplx> time(spectrum.size());
    thread_fft(spectrum.size()).inverse(spectrum, time);
    std::vector<double> out(time.size());
    for (std::size_t n = 0; n < time.size(); ++n)
        out[n] = time[n].real();
    return out;
}

inline std::vector<cplx> forward_transform(std::span<const double> samples)
{
    if (samples.empty())
        throw std::invalid_argument("forward_transform: empty input");
    std::vector<cplx> in(samples.begin(), samples.end());
    std::vector<cplx> out(samples.size());
    thread_fft(samples.size()).forward(in, out);
    return out;
}

/// Runs symbols through framing, IDFT, clipping and the drive mapping.
inline OfdmFrame transmit_frame(std::span<const cplx> symbols, std::size_t fft_size,
                                const ClippingConfig& cfg)
{
    OfdmFrame frame;
    frame.fft_size = fft_size;
    frame.spectrum = build_frame(symbols, fft_size);
    frame.samples = inverse_transform(frame.spectrum);
    frame.clipped = clip(frame.samples, cfg);
    frame.optical = scale_and_bias(frame.clipped, cfg);
    return frame;
}

/// Least-squares gain sum(x y) / sum(x^2).
inline double estimate_bussgang_gain(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw std::invalid_argument("estimate_bussgang_gain: length mismatch");
    const double sxx = std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
    if (sxx == 0.0)
        throw std::invalid_argument("estimate_bussgang_gain: x is identically zero");
    return std::inner_product(x.begin(), x.end(), y.begin(), 0.0) / sxx;
}

/// Raised when the receiver gain is too close to zero to equalize.
class SaturationError : public std::runtime_error
{
public:
    explicit SaturationError(double gain)
        : std::runtime_error("saturation point, link unusable (|alpha| = " + std::to_string(std::abs(gain)) + ")"),
          gain_(gain)
    {}
    double gain() const { return gain_; }

private:
    double gain_;
};

/// Single-tap equalizer over data subcarriers 1..K/2-1; the DC bin is dropped.
inline std::vector<cplx> equalize(std::span<const cplx> spectrum, double gain, double epsilon = 1e-12)
{
    if (!(std::abs(gain) >= epsilon) || gain == 0.0)
        throw SaturationError(gain);
    const std::size_t used = data_subcarriers(spectrum.size());
    std::vector<cplx> out(used);
    for (std::size_t k = 0; k < used; ++k)
        out[k] = spectrum[k + 1] / gain;
    return out;
}

} // namespace spad_ofdm

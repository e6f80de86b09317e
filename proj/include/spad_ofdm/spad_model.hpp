#pragma once

// Passively-quenched SPAD array: incident rate, dead-time-limited count
// statistics and the Gaussian count model used by the link simulator.

#include "spad_ofdm/clipping.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace spad_ofdm {

inline constexpr double kPlanck = 6.62607015e-34;      // J s
inline constexpr double kSpeedOfLight = 299792458.0;   // m/s

inline double photon_energy(double wavelength)
{
    return kPlanck * kSpeedOfLight / wavelength;
}

/// Receiver parameters. Defaults are the reference array used throughout the
/// experiments (450 nm, 8192 pixels, 10 ns dead time, 20 ns samples).
struct SpadParams
{
    int n_pixels = 8192;
    double dead_time = 10e-9;        // s; 0 selects the ideal photon counter
    double pde = 0.35;
    double dark_count_rate = 0.5e6;  // counts/s, whole array
    double afterpulse_prob = 0.0075;
    double crosstalk_prob = 0.025;
    double background_power = 10e-9; // W
    double wavelength = 450e-9;      // m
    double sample_duration = 20e-9;  // s

    void validate() const
    {
        if (n_pixels < 1)
            throw std::invalid_argument("n_pixels: must be >= 1");
        if (!(pde > 0.0 && pde <= 1.0))
            throw std::invalid_argument("pde: must lie in (0, 1]");
        if (!(dead_time >= 0.0))
            throw std::invalid_argument("dead_time: must be >= 0");
        if (!(sample_duration > 0.0))
            throw std::invalid_argument("sample_duration: must be > 0");
        if (sample_duration < dead_time)
            throw std::invalid_argument("sample_duration >= dead_time violated");
        if (!(dark_count_rate >= 0.0) || !(background_power >= 0.0))
            throw std::invalid_argument("dark_count_rate/background_power: must be >= 0");
        if (!(afterpulse_prob >= 0.0) || !(crosstalk_prob >= 0.0))
            throw std::invalid_argument("afterpulse_prob/crosstalk_prob: must be >= 0");
        if (!(wavelength > 0.0))
            throw std::invalid_argument("wavelength: must be > 0");
    }

    double photon_energy() const { return spad_ofdm::photon_energy(wavelength); }
    double excess_factor() const { return 1.0 + afterpulse_prob + crosstalk_prob; }
    double background_rate() const { return pde * background_power / photon_energy(); }
    /// tau_d / N_a, the per-count paralysis constant of the whole array.
    double paralysis() const { return dead_time / n_pixels; }
};

/// Affine map from transmitted optical power to incident count rate, and its
/// composition with the transmitter drive (psi1, psi2).
struct RateCoeffs
{
    double c_s = 0.0;  // counts/s per W transmitted
    double c_n = 0.0;  // counts/s
    double psi1 = 0.0; // counts/s per unit normalized amplitude
    double psi2 = 0.0; // counts/s at zero amplitude
};

inline RateCoeffs rate_coeffs(const SpadParams& p, double zeta, const ClippingConfig& clip)
{
    if (!(zeta > 0.0))
        throw std::invalid_argument("channel loss zeta must be > 0");
    RateCoeffs r;
    r.c_s = p.pde * zeta * p.excess_factor() / p.photon_energy();
    r.c_n = (p.dark_count_rate + p.background_rate()) * p.excess_factor();
    r.psi1 = r.c_s * clip.delta;
    r.psi2 = r.c_s * clip.p_bias + r.c_n;
    return r;
}

inline double photon_rate(double tx_power, const RateCoeffs& coeffs)
{
    if (tx_power < 0.0)
        throw std::invalid_argument("photon_rate: negative optical power");
    return coeffs.c_s * tx_power + coeffs.c_n;
}

/// Incident rate produced by a constant received optical power.
inline double incident_rate_from_received(double rx_power, const SpadParams& p)
{
    return (p.pde * rx_power / p.photon_energy() + p.dark_count_rate + p.background_rate()) *
           p.excess_factor();
}

/// Inverse of incident_rate_from_received.
inline double received_power_for_rate(double rate, const SpadParams& p)
{
    return (rate / p.excess_factor() - p.dark_count_rate - p.background_rate()) *
           p.photon_energy() / p.pde;
}

inline double mean_count(double rate, const SpadParams& p)
{
    return rate * p.sample_duration * std::exp(-rate * p.paralysis());
}

inline double var_count(double rate, const SpadParams& p)
{
    const double a = p.paralysis();
    const double ts = p.sample_duration;
    const double e1 = std::exp(-rate * a);
    return rate * ts * e1 - rate * rate * ts * a * e1 * e1 * (2.0 - p.dead_time / ts);
}

/// Single-pixel form N_a * [mu_s - mu_s^2 (1 - (1 - tau_d/T_s)^2)].
inline double var_count_per_pixel_form(double rate, const SpadParams& p)
{
    const double mu_s = mean_count(rate, p) / p.n_pixels;
    const double r = 1.0 - p.dead_time / p.sample_duration;
    return p.n_pixels * (mu_s - mu_s * mu_s * (1.0 - r * r));
}

/// One detected count under the Gaussian (large-array) model; not rounded.
template <typename Rng>
double sample_count(double rate, const SpadParams& p, Rng& rng)
{
    const double mean = mean_count(rate, p);
    const double var = var_count(rate, p);
    if (!(var > 0.0))
        return mean;
    std::normal_distribution<double> normal(mean, std::sqrt(var));
    return normal(rng);
}

inline double saturation_rate(const SpadParams& p)
{
    if (p.dead_time == 0.0)
        return std::numeric_limits<double>::infinity();
    return p.n_pixels / p.dead_time;
}

inline double saturation_count(const SpadParams& p)
{
    if (p.dead_time == 0.0)
        return std::numeric_limits<double>::infinity();
    return p.n_pixels * p.sample_duration / (std::numbers::e * p.dead_time);
}

} // namespace spad_ofdm

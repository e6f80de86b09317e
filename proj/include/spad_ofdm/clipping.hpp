#pragma once

// Transmitter dynamic-range handling for DCO-OFDM: double-sided clipping of
// the unit-variance time signal, then an affine map onto the LED power range.

#include "spad_ofdm/special.hpp"

#include <algorithm>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spad_ofdm {

/// Normalized clipping levels and the affine drive mapping derived from them.
/// All powers in watts; delta is watts per unit of normalized amplitude.
struct ClippingConfig
{
    double kappa_t = 3.2;
    double kappa_b = -3.2;
    double delta = 0.0;
    double p_bias = 0.0;
    double p_min = 0.0;
    double p_max = 10e-3;

    static ClippingConfig make(double kappa_t, double kappa_b, double p_min, double p_max)
    {
        if (!(kappa_b < kappa_t))
            throw std::invalid_argument("clipping: kappa_b must be below kappa_t");
        if (!(p_min >= 0.0) || !(p_min < p_max))
            throw std::invalid_argument("clipping: need 0 <= p_min < p_max");
        ClippingConfig cfg;
        cfg.kappa_t = kappa_t;
        cfg.kappa_b = kappa_b;
        cfg.p_min = p_min;
        cfg.p_max = p_max;
        cfg.delta = (p_max - p_min) / (kappa_t - kappa_b);
        cfg.p_bias = (p_min * kappa_t - p_max * kappa_b) / (kappa_t - kappa_b);
        return cfg;
    }

    static ClippingConfig symmetric(double kappa, double p_min, double p_max)
    {
        return make(kappa, -kappa, p_min, p_max);
    }
};

inline double clip_sample(double x, const ClippingConfig& cfg)
{
    return std::min(std::max(x, cfg.kappa_b), cfg.kappa_t);
}

inline std::vector<double> clip(std::span<const double> x, const ClippingConfig& cfg)
{
    std::vector<double> out(x.size());
    std::transform(x.begin(), x.end(), out.begin(),
                   [&](double v) { return clip_sample(v, cfg); });
    return out;
}

inline std::vector<double> scale_and_bias(std::span<const double> clipped, const ClippingConfig& cfg)
{
    std::vector<double> out(clipped.size());
    std::transform(clipped.begin(), clipped.end(), out.begin(), [&](double v) {
        // Rounding can push the end points a hair outside [p_min, p_max].
        return std::clamp(cfg.delta * v + cfg.p_bias, cfg.p_min, cfg.p_max);
    });
    return out;
}

/// Mean optical power of delta*clip(x)+p_bias for x ~ N(0,1).
inline double average_tx_power(const ClippingConfig& cfg)
{
    const double kt = cfg.kappa_t;
    const double kb = cfg.kappa_b;
    const double shape = normal_pdf(kb) - normal_pdf(kt) + kt * q_function(kt) + kb * q_function(-kb);
    return cfg.delta * shape + cfg.p_bias;
}

} // namespace spad_ofdm

#pragma once

// Closed-form link analysis of a clipped DCO-OFDM signal seen through a
// dead-time-limited SPAD array.
//
// The received mean count is mu(x) = u T e^{-a u} with u = psi1 clip(x) + psi2
// and a = tau_d / N_a. All Gaussian expectations of mu, x mu, mu^2 and the
// shot-noise variance reduce to two families of terms, evaluated here in
// quad precision:
//
//   edge(m, k)  = f(k) exp(-m a u(k))
//   tail(m, k)  = exp(-m a psi2 + s^2/2) Q(k + s),   s = m a psi1
//
// tail() is formed in the log domain so it stays finite when a psi2 and s^2
// are in the thousands (received power far above saturation).

#include "spad_ofdm/clipping.hpp"
#include "spad_ofdm/ofdm.hpp"
#include "spad_ofdm/spad_model.hpp"
#include "spad_ofdm/special.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace spad_ofdm {

struct OperatingPoint
{
    SpadParams spad;
    ClippingConfig clip;
    RateCoeffs coeffs;
    std::size_t fft_size = 1024;
    double zeta = 0.0;
    double received_power = 0.0; // mean received optical power, W
};

/// Operating point at a given mean received optical power; the channel loss is
/// whatever maps the clipped transmitter's mean power onto it.
inline OperatingPoint make_operating_point(const SpadParams& spad, const ClippingConfig& clip,
                                           double received_power, std::size_t fft_size = 1024)
{
    spad.validate();
    if (!(received_power > 0.0))
        throw std::invalid_argument("received power must be positive");
    OperatingPoint op;
    op.spad = spad;
    op.clip = clip;
    op.fft_size = fft_size;
    op.received_power = received_power;
    op.zeta = received_power / average_tx_power(clip);
    op.coeffs = rate_coeffs(spad, op.zeta, clip);
    return op;
}

struct LinkMetrics
{
    double alpha = 0.0;
    double var_wd = 0.0;
    double var_ws = 0.0;
    double sdnr = 0.0;
    double ssnr = 0.0;
    double snr = 0.0;
    double ber = 0.0;
    double se_upper = 0.0;
};

struct SnrBreakdown
{
    double sdnr = 0.0;
    double ssnr = 0.0;
    double snr = 0.0;
};

namespace detail {

struct ClosedForm
{
    quad psi1, psi2, a, ts, td, kt, kb;

    explicit ClosedForm(const OperatingPoint& op)
        : psi1(op.coeffs.psi1), psi2(op.coeffs.psi2), a(quad(op.spad.dead_time) / quad(op.spad.n_pixels)),
          ts(op.spad.sample_duration), td(op.spad.dead_time), kt(op.clip.kappa_t), kb(op.clip.kappa_b)
    {}

    quad rate(quad k) const { return psi1 * k + psi2; }

    quad edge(int m, quad k) const { return normal_pdf(k) * xmath::exp(-m * a * rate(k)); }

    quad tail(int m, quad k) const
    {
        const quad s = m * a * psi1;
        return xmath::exp(-m * a * psi2 + s * s / 2 + log_q_function(k + s));
    }

    quad mean_at(quad k) const
    {
        const quad u = rate(k);
        return u * ts * xmath::exp(-a * u);
    }

    quad shot_var_at(quad k) const
    {
        const quad u = rate(k);
        const quad e = xmath::exp(-a * u);
        return u * ts * e - a * (2 * ts - td) * u * u * e * e;
    }

    // E{x mu(x)}
    quad gain() const
    {
        const quad c = a * psi1;
        return psi1 * ts * c * (edge(1, kt) - edge(1, kb)) +
               psi1 * ts * (1 + c * c - a * psi2) * (tail(1, kb) - tail(1, kt));
    }

    // integral of mu f over the unclipped range
    quad interior_mean() const
    {
        return ts * psi1 * (edge(1, kb) - edge(1, kt)) +
               ts * (psi2 - a * psi1 * psi1) * (tail(1, kb) - tail(1, kt));
    }

    // integral of mu^2 f over the unclipped range
    quad interior_square() const
    {
        const quad d = psi2 - 2 * a * psi1 * psi1;
        const quad lin = 2 * psi1 * psi2 - 2 * a * psi1 * psi1 * psi1;
        return ts * ts *
               ((psi1 * psi1 + d * d) * (tail(2, kb) - tail(2, kt)) +
                (psi1 * psi1 * kb + lin) * edge(2, kb) - (psi1 * psi1 * kt + lin) * edge(2, kt));
    }

    quad mean() const
    {
        return mean_at(kb) * q_function(-kb) + mean_at(kt) * q_function(kt) + interior_mean();
    }

    quad second_moment() const
    {
        const quad mb = mean_at(kb);
        const quad mt = mean_at(kt);
        return mb * mb * q_function(-kb) + mt * mt * q_function(kt) + interior_square();
    }

    quad shot_var() const
    {
        return shot_var_at(kb) * q_function(-kb) + shot_var_at(kt) * q_function(kt) + interior_mean() -
               a * (2 * ts - td) / (ts * ts) * interior_square();
    }

    quad distortion_var() const
    {
        const quad m2 = second_moment();
        const quad m1 = mean();
        const quad g = gain();
        const quad v = m2 - m1 * m1 - g * g;
        if (v >= 0)
            return v;
        if (-v > quad(1e-9) * m2)
            throw std::logic_error("distortion_noise_var: negative variance beyond rounding");
        std::clog << "spad_ofdm: clamped distortion variance " << to_double(v) << " to 0\n";
        return 0;
    }
};

} // namespace detail

/// Bussgang gain E{x mu(x)} (counts per unit normalized amplitude).
inline double gain_factor(const OperatingPoint& op) { return to_double(detail::ClosedForm(op).gain()); }

/// E{mu(x)}.
inline double mean_distorted(const OperatingPoint& op) { return to_double(detail::ClosedForm(op).mean()); }

/// E{mu(x)^2}.
inline double second_moment_distorted(const OperatingPoint& op)
{
    return to_double(detail::ClosedForm(op).second_moment());
}

/// Variance of the distortion noise, E{mu^2} - E{mu}^2 - alpha^2. Equal in
/// the time and frequency domains.
inline double distortion_noise_var(const OperatingPoint& op)
{
    return to_double(detail::ClosedForm(op).distortion_var());
}

/// Per-subcarrier shot-noise variance, E{sigma_a^2(x)}.
inline double shot_noise_var_freq(const OperatingPoint& op)
{
    return to_double(detail::ClosedForm(op).shot_var());
}

// Ideal photon counter (tau_d = 0) forms, written in their textbook shape.

inline double alpha_ideal(double psi1, double ts, double kappa_t, double kappa_b)
{
    const quad p1 = psi1, t = ts, kt = kappa_t, kb = kappa_b;
    return to_double(p1 * t * (q_function(kb) - q_function(kt)));
}

inline double distortion_var_ideal(double psi1, double ts, double kappa_t, double kappa_b)
{
    const quad p1 = psi1, t = ts, kt = kappa_t, kb = kappa_b;
    const quad scale = p1 * p1 * t * t;
    const quad pass = q_function(kb) - q_function(kt);
    const quad clipped_mean =
        normal_pdf(kb) - normal_pdf(kt) + kb * q_function(-kb) + kt * q_function(kt);
    return to_double(scale * (pass + kb * normal_pdf(kb) - kt * normal_pdf(kt)) +
                     scale * (kb * kb * q_function(-kb) + kt * kt * q_function(kt) - pass * pass) -
                     scale * clipped_mean * clipped_mean);
}

inline double shot_var_ideal(double psi1, double psi2, double ts, double kappa_t, double kappa_b)
{
    const quad p1 = psi1, p2 = psi2, t = ts, kt = kappa_t, kb = kappa_b;
    return to_double((p1 * kb + p2) * t - p1 * kb * q_function(kb) * t + p1 * kt * q_function(kt) * t +
                     p1 * t * normal_pdf(kb) - p1 * t * normal_pdf(kt));
}

inline SnrBreakdown snr_from(double alpha, double var_wd, double var_ws, std::size_t fft_size)
{
    const double signal = alpha * alpha * subcarrier_variance(fft_size);
    const double inf = std::numeric_limits<double>::infinity();
    SnrBreakdown r;
    r.sdnr = var_wd > 0.0 ? signal / var_wd : inf;
    r.ssnr = var_ws > 0.0 ? signal / var_ws : inf;
    const double noise = var_wd + var_ws;
    r.snr = noise > 0.0 ? signal / noise : inf;
    return r;
}

inline SnrBreakdown snr(const OperatingPoint& op)
{
    const detail::ClosedForm cf(op);
    return snr_from(to_double(cf.gain()), to_double(cf.distortion_var()), to_double(cf.shot_var()),
                    op.fft_size);
}

/// Gray-coded square M-QAM bit error rate at per-subcarrier SNR gamma.
inline double ber_mqam(double gamma, int order)
{
    if (order < 4)
        throw std::invalid_argument("ber_mqam: order must be >= 4");
    if (!(gamma >= 0.0))
        throw std::invalid_argument("ber_mqam: gamma must be >= 0");
    const double m = order;
    const double root = std::sqrt(m);
    const double bits = std::log2(m);
    const double arg = std::sqrt(3.0 * gamma / (m - 1.0));
    return 4.0 * (root - 1.0) / (root * bits) * q_function(arg) +
           4.0 * (root - 2.0) / (root * bits) * q_function(3.0 * arg);
}

/// log2(1 + gamma), bits/s/Hz.
inline double se_upper(double gamma) { return std::log1p(gamma) / std::numbers::ln2; }

inline LinkMetrics link_metrics(const OperatingPoint& op, int order)
{
    const detail::ClosedForm cf(op);
    LinkMetrics m;
    m.alpha = to_double(cf.gain());
    m.var_wd = to_double(cf.distortion_var());
    m.var_ws = to_double(cf.shot_var());
    const SnrBreakdown s = snr_from(m.alpha, m.var_wd, m.var_ws, op.fft_size);
    m.sdnr = s.sdnr;
    m.ssnr = s.ssnr;
    m.snr = s.snr;
    m.ber = ber_mqam(m.snr, order);
    m.se_upper = se_upper(m.snr);
    return m;
}

} // namespace spad_ofdm

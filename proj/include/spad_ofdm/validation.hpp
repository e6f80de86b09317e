#pragma once

// Quadrature references for the closed-form link statistics. These integrate
// the defining Gaussian expectations directly with adaptive Gauss-Kronrod in
// long double and share no code with analytics.hpp.

#include "spad_ofdm/analytics.hpp"
#include "spad_ofdm/experiments.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace spad_ofdm::validation {

using real = long double;

struct ReferenceMoments
{
    real gain = 0;
    real mean = 0;
    real second_moment = 0;
    real distortion_var = 0;
    real shot_var = 0;
};

class QuadratureReference
{
public:
    explicit QuadratureReference(const OperatingPoint& op, real tolerance = 1e-13L)
        : psi1_(op.coeffs.psi1), psi2_(op.coeffs.psi2), ts_(op.spad.sample_duration),
          td_(op.spad.dead_time), na_(op.spad.n_pixels), kt_(op.clip.kappa_t), kb_(op.clip.kappa_b),
          tol_(tolerance)
    {}

    real density(real x) const
    {
        return std::exp(-x * x / 2) / std::sqrt(2 * std::numbers::pi_v<real>);
    }

    real mean_count(real x) const
    {
        const real xc = std::min(std::max(x, kb_), kt_);
        const real lambda = psi1_ * xc + psi2_;
        return lambda * ts_ * std::exp(-lambda * td_ / na_);
    }

    real count_var(real x) const
    {
        const real xc = std::min(std::max(x, kb_), kt_);
        const real lambda = psi1_ * xc + psi2_;
        const real e = std::exp(-lambda * td_ / na_);
        return lambda * ts_ * e - lambda * lambda * ts_ * td_ / na_ * e * e * (2 - td_ / ts_);
    }

    /// Integral of g(x) f(x) over the real line, split at the clip points.
    real expect(const std::function<real(real)>& g) const
    {
        auto integrand = [&](real x) { return g(x) * density(x); };
        using gk = boost::math::quadrature::gauss_kronrod<real, 61>;
        const real inf = std::numeric_limits<real>::infinity();
        real total = gk::integrate(integrand, -inf, kb_, 12, tol_);
        total += gk::integrate(integrand, kt_, inf, 12, tol_);
        // The interior integrand decays like exp(-a psi1 (x - kb)); resolve the
        // boundary layer explicitly when it is thin.
        const real width = kt_ - kb_;
        const real layer = std::min(width, 1 / std::max(psi1_ * td_ / na_, real(1e-300)));
        real lo = kb_;
        for (real step = layer / 64; lo < kt_; step *= 4)
        {
            const real hi = std::min(kt_, lo + step);
            total += gk::integrate(integrand, lo, hi, 12, tol_);
            lo = hi;
        }
        return total;
    }

    ReferenceMoments moments() const
    {
        ReferenceMoments r;
        r.gain = expect([&](real x) { return x * mean_count(x); });
        r.mean = expect([&](real x) { return mean_count(x); });
        r.second_moment = expect([&](real x) { const real m = mean_count(x); return m * m; });
        const real g = r.gain;
        const real m = r.mean;
        r.distortion_var = expect([&](real x) {
            const real w = mean_count(x) - m - g * x;
            return w * w;
        });
        r.shot_var = expect([&](real x) { return count_var(x); });
        return r;
    }

private:
    real psi1_, psi2_, ts_, td_, na_, kt_, kb_, tol_;
};


/// One named pass/fail outcome with a human-readable summary.
struct CheckResult
{
    std::string name;
    bool passed = false;
    std::string detail;
};

inline double rel_diff(double a, double b)
{
    if (a == b)
        return 0.0;
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

/// Closed forms against the quadrature references at random operating points:
/// P_rx log-uniform on [1 nW, 1 mW], kappa_t and -kappa_b uniform on [1, 6].
inline CheckResult check_quadrature(const LinkTemplate& link, int points, std::uint64_t seed, double tol = 1e-8)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> log_p(-9.0, -3.0);
    std::uniform_real_distribution<double> kappa(1.0, 6.0);
    const char* names[5] = {"gain", "mean", "second_moment", "distortion_var", "shot_var"};
    double worst[5] = {};
    for (int i = 0; i < points; ++i)
    {
        const double p = std::pow(10.0, log_p(rng));
        const double kt = kappa(rng);
        const double kb = -kappa(rng);
        const OperatingPoint op = make_operating_point(
            link.spad, ClippingConfig::make(kt, kb, link.p_min, link.p_max), p, link.fft_size);
        const ReferenceMoments ref = QuadratureReference(op).moments();
        const double closed[5] = {gain_factor(op), mean_distorted(op), second_moment_distorted(op),
                                  distortion_noise_var(op), shot_noise_var_freq(op)};
        const real quad[5] = {ref.gain, ref.mean, ref.second_moment, ref.distortion_var, ref.shot_var};
        for (int j = 0; j < 5; ++j)
            worst[j] = std::max(worst[j], rel_diff(closed[j], static_cast<double>(quad[j])));
    }
    CheckResult r{"closed form vs quadrature", true, ""};
    std::ostringstream d;
    d << points << " points, worst rel err:";
    for (int j = 0; j < 5; ++j)
    {
        d << ' ' << names[j] << '=' << worst[j];
        r.passed = r.passed && worst[j] < tol;
    }
    r.detail = d.str();
    return r;
}

/// General closed forms with tau_d = 0 against the ideal-receiver forms.
inline CheckResult check_ideal_reductions(const LinkTemplate& link, double tol = 1e-12)
{
    LinkTemplate ideal = link;
    ideal.spad.dead_time = 0.0;
    double worst[3] = {};
    int n = 0;
    for (double kappa : linear_grid(1.0, 6.0, 0.25))
        for (double p : log_grid(1e-9, 1e-3, 25))
        {
            const OperatingPoint op = ideal.at(p, kappa);
            const double ts = op.spad.sample_duration;
            const double kt = op.clip.kappa_t, kb = op.clip.kappa_b;
            worst[0] = std::max(worst[0], rel_diff(gain_factor(op), alpha_ideal(op.coeffs.psi1, ts, kt, kb)));
            worst[1] = std::max(worst[1],
                                rel_diff(distortion_noise_var(op), distortion_var_ideal(op.coeffs.psi1, ts, kt, kb)));
            worst[2] = std::max(worst[2], rel_diff(shot_noise_var_freq(op),
                                                   shot_var_ideal(op.coeffs.psi1, op.coeffs.psi2, ts, kt, kb)));
            ++n;
        }
    CheckResult r{"ideal-receiver reductions", worst[0] < tol && worst[1] < tol && worst[2] < tol, ""};
    std::ostringstream d;
    d << n << " points, worst rel err: alpha=" << worst[0] << " var_wd=" << worst[1] << " var_ws=" << worst[2];
    r.detail = d.str();
    return r;
}

struct McComparison
{
    double received_power = 0.0;
    double kappa = 0.0;
    int order = 0;
    LinkMetrics analytic;
    EmpiricalMetrics empirical;
};

/// Runs the Monte Carlo chain over a grid for the analytic/empirical checks.
inline std::vector<McComparison> run_mc_grid(const LinkTemplate& link, std::span<const double> powers,
                                             std::span<const double> kappas, std::span<const int> orders,
                                             int frames, std::uint64_t seed, unsigned threads = 0)
{
    std::vector<McComparison> out(powers.size() * kappas.size() * orders.size());
    parallel_for(out.size(), threads, [&](std::size_t idx) {
        McComparison& c = out[idx];
        c.order = orders[idx % orders.size()];
        c.kappa = kappas[(idx / orders.size()) % kappas.size()];
        c.received_power = powers[idx / (orders.size() * kappas.size())];
        const OperatingPoint op = link.at(c.received_power, c.kappa);
        c.analytic = link_metrics(op, c.order);
        McOptions opt;
        opt.n_frames = frames;
        opt.seed = seed;
        opt.stream = idx;
        c.empirical = run_mc_point(op, c.order, opt);
    });
    return out;
}

/// Three verdicts: gain within alpha_tol, shot-noise variance within var_tol,
/// BER within ber_sigmas binomial standard errors of the analytic value.
inline std::vector<CheckResult> check_mc(std::span<const McComparison> grid, double alpha_tol = 0.02,
                                         double var_tol = 0.02, double ber_sigmas = 3.0)
{
    int usable = 0, a_fail = 0, w_fail = 0, b_fail = 0;
    int a_stat = 0, w_stat = 0; // misses that also exceed 3 batch standard errors
    double a_worst = 0.0, w_worst = 0.0, b_worst = 0.0;
    std::string a_where, w_where, b_where;
    auto where = [](const McComparison& c) {
        std::ostringstream s;
        s << "(P=" << c.received_power << " W, kappa=" << c.kappa << ", M=" << c.order << ")";
        return s.str();
    };
    for (const McComparison& c : grid)
    {
        const EmpiricalMetrics& e = c.empirical;
        if (e.saturated)
            continue;
        ++usable;
        const double da = std::abs(e.alpha - c.analytic.alpha) / std::abs(c.analytic.alpha);
        const double dw = std::abs(e.var_ws - c.analytic.var_ws) / c.analytic.var_ws;
        const double p = c.analytic.ber;
        const double se = std::sqrt(std::min(p, 1.0) * std::max(1.0 - p, 0.0) / static_cast<double>(e.bits));
        const double z = se > 0.0 ? std::abs(e.ber - p) / se : (e.ber == p ? 0.0 : std::numeric_limits<double>::infinity());
        if (da >= alpha_tol)
        {
            ++a_fail;
            a_stat += std::abs(e.alpha - c.analytic.alpha) > 3.0 * e.alpha_stderr;
        }
        if (dw >= var_tol)
        {
            ++w_fail;
            w_stat += std::abs(e.var_ws - c.analytic.var_ws) > 3.0 * e.var_ws_stderr;
        }
        b_fail += !(z <= ber_sigmas);
        if (da > a_worst)
            a_worst = da, a_where = where(c);
        if (dw > w_worst)
            w_worst = dw, w_where = where(c);
        if (z > b_worst)
            b_worst = z, b_where = where(c);
    }
    std::vector<CheckResult> out;
    std::ostringstream a, w, b;
    a << usable << " non-saturated points, " << a_fail << " outside " << alpha_tol * 100 << "% (" << a_stat
      << " of them beyond 3 batch stderr); worst " << a_worst * 100 << "% at " << a_where;
    w << usable << " non-saturated points, " << w_fail << " outside " << var_tol * 100 << "% (" << w_stat
      << " of them beyond 3 batch stderr); worst " << w_worst * 100 << "% at " << w_where;
    b << usable << " non-saturated points, " << b_fail << " outside " << ber_sigmas << " stderr; worst "
      << b_worst << " stderr at " << b_where;
    out.push_back({"MC gain alpha-hat vs alpha", a_fail == 0, a.str()});
    out.push_back({"MC shot-noise variance vs closed form", w_fail == 0, w.str()});
    out.push_back({"MC BER vs analytic BER", b_fail == 0, b.str()});
    return out;
}

} // namespace spad_ofdm::validation

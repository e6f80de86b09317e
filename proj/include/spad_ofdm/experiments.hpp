#pragma once

// Sweep harness: Monte Carlo transmission of whole OFDM frames through the
// SPAD array, analytic sweeps over received power and clipping level, the
// exhaustive clipping search and QAM link adaptation.

#include "spad_ofdm/analytics.hpp"
#include "spad_ofdm/ofdm.hpp"
#include "spad_ofdm/qam.hpp"
#include "spad_ofdm/spad_model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace spad_ofdm {

enum class GainSource
{
    data_aided, // least-squares alpha-hat from the known transmitted frames
    analytic,   // closed-form alpha
};

struct EmpiricalMetrics
{
    double alpha = 0.0;      // from the noisy counts
    double alpha_dist = 0.0; // from the noise-free counts
    double var_wd = 0.0;
    double var_ws = 0.0;
    // batch-means standard errors of alpha and var_ws
    double alpha_stderr = 0.0;
    double var_ws_stderr = 0.0;
    double ber = 0.0;
    double ber_stderr = 0.0;
    std::uint64_t bit_errors = 0;
    std::uint64_t bits = 0;
    std::uint64_t samples = 0;
    double orthogonality = 0.0; // corr(x, y - alpha x), analytic alpha
    // its standard error without assuming the residual spread is independent of x
    double orthogonality_stderr = 0.0;
    bool saturated = false;
};

struct McOptions
{
    int n_frames = 2000;
    std::uint64_t seed = 1;
    std::uint64_t stream = 0; // independent substream of seed
    GainSource gain_source = GainSource::data_aided;
    bool shot_noise = true;
};

namespace detail {

inline std::mt19937_64 stream_rng(std::uint64_t master, std::uint64_t index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

// Per-frame buffers and the transmit/receive path shared by both passes.
struct FrameSim
{
    const OperatingPoint& op;
    const QamConstellation& qam;
    std::size_t k;
    double amplitude;
    std::vector<std::uint8_t> bits;
    std::vector<cplx> symbols, spectrum, time, y_spec, yd_spec;
    std::vector<double> x, y, yd;
    std::vector<cplx> scratch;

    FrameSim(const OperatingPoint& o, const QamConstellation& q)
        : op(o), qam(q), k(o.fft_size), amplitude(std::sqrt(subcarrier_variance(o.fft_size))),
          bits(data_subcarriers(k) * static_cast<std::size_t>(q.bits_per_symbol())), time(k), y_spec(k),
          yd_spec(k), x(k), y(k), yd(k), scratch(k)
    {}

    template <typename Rng>
    void run(Rng& rng, bool shot_noise)
    {
        for (auto& b : bits)
            b = static_cast<std::uint8_t>(rng() >> 63);
        symbols = qam_modulate(bits, qam, amplitude);
        spectrum = build_frame(symbols, k);
        Fft& fft = thread_fft(k);
        fft.inverse(spectrum, time);
        const SpadParams& p = op.spad;
        std::normal_distribution<double> normal;
        for (std::size_t n = 0; n < k; ++n)
        {
            x[n] = time[n].real();
            const double tx = op.clip.delta * clip_sample(x[n], op.clip) + op.clip.p_bias;
            const double rate = photon_rate(std::max(tx, 0.0), op.coeffs);
            yd[n] = mean_count(rate, p);
            const double var = var_count(rate, p);
            y[n] = shot_noise && var > 0.0 ? yd[n] + std::sqrt(var) * normal(rng) : yd[n];
        }
    }

    void transform()
    {
        Fft& fft = thread_fft(k);
        std::copy(y.begin(), y.end(), scratch.begin());
        fft.forward(scratch, y_spec);
        std::copy(yd.begin(), yd.end(), scratch.begin());
        fft.forward(scratch, yd_spec);
    }
};

} // namespace detail

/// Full-chain Monte Carlo at one operating point. Two passes over the same
/// random stream: the first fixes alpha-hat, the second equalizes with it.
inline EmpiricalMetrics run_mc_point(const OperatingPoint& op, int order, const McOptions& opt)
{
    if (opt.n_frames < 1)
        throw std::invalid_argument("run_mc_point: n_frames must be >= 1");
    check_fft_size(op.fft_size);
    const QamConstellation qam(order);
    detail::FrameSim sim(op, qam);
    const std::size_t k = op.fft_size;
    const std::size_t used = data_subcarriers(k);

    EmpiricalMetrics r;
    double sxx = 0.0, sxy = 0.0, sxyd = 0.0, sy = 0.0, syy = 0.0, sx = 0.0;
    double ws = 0.0, yd_x = 0.0, yd_yd = 0.0, xx_bins = 0.0;
    double sx2y = 0.0, sx3 = 0.0, sx2y2 = 0.0, sx3y = 0.0, sx4 = 0.0;
    const int n_batches = std::min(opt.n_frames, 20);
    std::vector<double> batch_sxx(n_batches), batch_sxy(n_batches), batch_ws(n_batches), batch_bins(n_batches);
    auto rng = detail::stream_rng(opt.seed, opt.stream);
    for (int f = 0; f < opt.n_frames; ++f)
    {
        sim.run(rng, opt.shot_noise);
        sim.transform();
        const double sxx0 = sxx, sxy0 = sxy, ws0 = ws;
        for (std::size_t n = 0; n < k; ++n)
        {
            sx += sim.x[n];
            sxx += sim.x[n] * sim.x[n];
            sxy += sim.x[n] * sim.y[n];
            sxyd += sim.x[n] * sim.yd[n];
            sy += sim.y[n];
            syy += sim.y[n] * sim.y[n];
            const double x2 = sim.x[n] * sim.x[n];
            sx2y += x2 * sim.y[n];
            sx3 += x2 * sim.x[n];
            sx2y2 += x2 * sim.y[n] * sim.y[n];
            sx3y += x2 * sim.x[n] * sim.y[n];
            sx4 += x2 * x2;
        }
        for (std::size_t b = 1; b <= used; ++b)
        {
            ws += std::norm(sim.y_spec[b] - sim.yd_spec[b]);
            yd_x += std::real(sim.yd_spec[b] * std::conj(sim.spectrum[b]));
            yd_yd += std::norm(sim.yd_spec[b]);
            xx_bins += std::norm(sim.spectrum[b]);
        }
        const auto batch = static_cast<std::size_t>(f % n_batches);
        batch_sxx[batch] += sxx - sxx0;
        batch_sxy[batch] += sxy - sxy0;
        batch_ws[batch] += ws - ws0;
        batch_bins[batch] += static_cast<double>(used);
    }
    const double n_samples = static_cast<double>(opt.n_frames) * static_cast<double>(k);
    const double n_bins = static_cast<double>(opt.n_frames) * static_cast<double>(used);
    r.samples = static_cast<std::uint64_t>(n_samples);
    r.alpha = sxy / sxx;
    r.alpha_dist = sxyd / sxx;
    r.var_ws = ws / n_bins;
    if (n_batches > 1)
    {
        double da = 0.0, dw = 0.0;
        for (int b = 0; b < n_batches; ++b)
        {
            da += std::pow(batch_sxy[b] / batch_sxx[b] - r.alpha, 2);
            dw += std::pow(batch_ws[b] / batch_bins[b] - r.var_ws, 2);
        }
        r.alpha_stderr = std::sqrt(da / (n_batches - 1) / n_batches);
        r.var_ws_stderr = std::sqrt(dw / (n_batches - 1) / n_batches);
    }
    // mean |Yd - alpha_d X|^2 expanded in accumulated moments
    r.var_wd = (yd_yd - 2.0 * r.alpha_dist * yd_x + r.alpha_dist * r.alpha_dist * xx_bins) / n_bins;
    {
        // corr(x, e) with e = y - alpha x and alpha the analytic Bussgang gain;
        // with alpha-hat in its place the covariance would vanish identically
        const double a = gain_factor(op);
        const double mx = sx / n_samples;
        const double my = sy / n_samples;
        const double cov_xy = sxy / n_samples - mx * my;
        const double var_x = sxx / n_samples - mx * mx;
        const double var_y = syy / n_samples - my * my;
        const double cov_xe = cov_xy - a * var_x;
        const double var_e = var_y - 2.0 * a * cov_xy + a * a * var_x;
        r.orthogonality = var_e > 0.0 ? cov_xe / std::sqrt(var_x * var_e) : 0.0;
        // sandwich estimate: sum x^2 (e - e_bar)^2, expanded in accumulated moments
        const double me = my - a * mx;
        const double x2e2 = sx2y2 - 2.0 * a * sx3y + a * a * sx4;
        const double x2e = sx2y - a * sx3;
        const double spread = x2e2 - 2.0 * me * x2e + me * me * sxx;
        r.orthogonality_stderr =
            var_e > 0.0 && spread > 0.0 ? std::sqrt(spread) / n_samples / std::sqrt(var_x * var_e) : 0.0;
    }

    const double eps = 1e-6 * op.coeffs.psi1 * op.spad.sample_duration;
    const double gain = opt.gain_source == GainSource::data_aided ? r.alpha : gain_factor(op);
    r.bits = static_cast<std::uint64_t>(opt.n_frames) * used * static_cast<std::uint64_t>(qam.bits_per_symbol());
    if (std::abs(r.alpha) < eps || std::abs(gain) < eps)
    {
        r.saturated = true;
        r.ber = 0.5;
        r.ber_stderr = std::sqrt(0.25 / static_cast<double>(r.bits));
        return r;
    }

    rng = detail::stream_rng(opt.seed, opt.stream);
    std::vector<std::uint8_t> decided(sim.bits.size());
    for (int f = 0; f < opt.n_frames; ++f)
    {
        sim.run(rng, opt.shot_noise);
        sim.transform();
        const std::vector<cplx> eq = equalize(sim.y_spec, gain);
        qam_demodulate_into(eq, qam, sim.amplitude, decided);
        for (std::size_t i = 0; i < decided.size(); ++i)
            r.bit_errors += decided[i] != sim.bits[i];
    }
    r.ber = static_cast<double>(r.bit_errors) / static_cast<double>(r.bits);
    r.ber_stderr = std::sqrt(r.ber * (1.0 - r.ber) / static_cast<double>(r.bits));
    return r;
}

inline EmpiricalMetrics run_mc_point(const OperatingPoint& op, int order, int n_frames, std::uint64_t seed,
                                     std::uint64_t stream = 0)
{
    McOptions opt;
    opt.n_frames = n_frames;
    opt.seed = seed;
    opt.stream = stream;
    return run_mc_point(op, order, opt);
}

/// Detected-count statistics at a constant received power.
struct MomentPoint
{
    double received_power = 0.0;
    double rate = 0.0;
    double mean = 0.0;
    double var = 0.0;
    double mean_ideal = 0.0;
    double var_ideal = 0.0;
};

inline std::vector<MomentPoint> sweep_moments(const SpadParams& spad, std::span<const double> received_power)
{
    spad.validate();
    SpadParams ideal = spad;
    ideal.dead_time = 0.0;
    std::vector<MomentPoint> out;
    out.reserve(received_power.size());
    for (double p : received_power)
    {
        MomentPoint m;
        m.received_power = p;
        m.rate = incident_rate_from_received(p, spad);
        m.mean = mean_count(m.rate, spad);
        m.var = var_count(m.rate, spad);
        m.mean_ideal = mean_count(m.rate, ideal);
        m.var_ideal = var_count(m.rate, ideal);
        out.push_back(m);
    }
    return out;
}

/// Everything fixed except the clipping level and received power.
struct LinkTemplate
{
    SpadParams spad;
    double p_min = 0.0;
    double p_max = 10e-3;
    std::size_t fft_size = 1024;

    OperatingPoint at(double received_power, double kappa) const
    {
        return make_operating_point(spad, ClippingConfig::symmetric(kappa, p_min, p_max), received_power,
                                    fft_size);
    }
};

struct KappaChoice
{
    double kappa = 0.0;
    double snr = 0.0;
};

/// Exhaustive search of symmetric clipping levels for the highest analytic
/// SNR; ties go to the smaller level.
inline KappaChoice optimize_kappa(const LinkTemplate& link, double received_power, std::span<const double> kappa_grid)
{
    if (kappa_grid.empty())
        throw std::invalid_argument("optimize_kappa: empty kappa grid");
    std::vector<double> grid(kappa_grid.begin(), kappa_grid.end());
    std::sort(grid.begin(), grid.end());
    KappaChoice best{grid.front(), -1.0};
    for (double kappa : grid)
    {
        const double g = snr(link.at(received_power, kappa)).snr;
        if (g > best.snr)
            best = {kappa, g};
    }
    return best;
}

inline std::vector<double> linear_grid(double lo, double hi, double step)
{
    if (!(step > 0.0) || !(hi >= lo))
        throw std::invalid_argument("linear_grid: need step > 0 and hi >= lo");
    std::vector<double> g;
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i)
        g.push_back(lo + static_cast<double>(i) * step);
    return g;
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t points)
{
    if (!(lo > 0.0) || !(hi >= lo) || points == 0)
        throw std::invalid_argument("log_grid: need 0 < lo <= hi and points >= 1");
    std::vector<double> g(points);
    if (points == 1)
    {
        g[0] = lo;
        return g;
    }
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (std::size_t i = 0; i < points; ++i)
        g[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    g.back() = hi;
    return g;
}

/// Largest log2(M) whose analytic BER meets the target, 0 if none does.
inline double adaptive_se(double snr_linear, std::span<const int> mod_orders, double ber_target)
{
    double best = 0.0;
    for (int m : mod_orders)
        if (ber_mqam(snr_linear, m) <= ber_target)
            best = std::max(best, std::log2(static_cast<double>(m)));
    return best;
}

inline double adaptive_se(const OperatingPoint& op, std::span<const int> mod_orders, double ber_target)
{
    return adaptive_se(snr(op).snr, mod_orders, ber_target);
}

/// Link adaptation paired with the clipping search at each power.
inline double adaptive_se_optimized(const LinkTemplate& link, double received_power, std::span<const double> kappa_grid,
                                    std::span<const int> mod_orders, double ber_target)
{
    const KappaChoice best = optimize_kappa(link, received_power, kappa_grid);
    return adaptive_se(best.snr, mod_orders, ber_target);
}

struct SweepSpec
{
    LinkTemplate link;
    std::vector<double> received_power_grid;
    std::vector<double> kappa_grid;
    std::vector<int> mod_orders{16};
    // alphabet for the link-adaptation column
    std::vector<int> adaptation_orders{4, 8, 16, 32, 64};
    int frames_per_point = 2000;
    std::uint64_t master_seed = 1;
    double ber_target = 3e-3;
    bool simulate = false;
    GainSource gain_source = GainSource::data_aided;
    // replace kappa_grid per power by its argmax-SNR member
    bool optimize_kappa = false;
    unsigned threads = 0; // 0: hardware concurrency, capped by SPAD_OFDM_THREADS

    void validate() const
    {
        link.spad.validate();
        if (received_power_grid.empty() || kappa_grid.empty() || mod_orders.empty() || adaptation_orders.empty())
            throw std::invalid_argument("sweep: grids and mod_orders must be non-empty");
        if (!std::is_sorted(received_power_grid.begin(), received_power_grid.end()) ||
            !std::is_sorted(kappa_grid.begin(), kappa_grid.end()))
            throw std::invalid_argument("sweep: grids must be sorted ascending");
        if (frames_per_point < 1)
            throw std::invalid_argument("sweep: frames_per_point must be >= 1");
        if (!(ber_target > 0.0 && ber_target < 1.0))
            throw std::invalid_argument("sweep: ber_target must lie in (0, 1)");
    }
};

struct SweepPoint
{
    double received_power = 0.0;
    double kappa = 0.0;
    int mod_order = 0;
    LinkMetrics analytic;
    double se_qam = 0.0;
    std::optional<EmpiricalMetrics> empirical;
};

struct SweepResult
{
    std::vector<SweepPoint> points;
};

/// Worker count: requested (or hardware) threads, capped by SPAD_OFDM_THREADS.
inline unsigned worker_count(unsigned requested, std::size_t jobs)
{
    unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SPAD_OFDM_THREADS"))
    {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1)
            n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, jobs)));
}

/// Runs fn(i) for i in [0, jobs) on a small pool; the first exception wins.
inline void parallel_for(std::size_t jobs, unsigned threads, const std::function<void(std::size_t)>& fn)
{
    const unsigned workers = worker_count(threads, jobs);
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < jobs; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < jobs && !failed; i = next++)
            {
                try
                {
                    fn(i);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    failed = true;
                }
            }
        });
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

/// Evaluates every (power, kappa, order) point; row order is power-major, then
/// kappa, then order. Output depends only on the spec.
inline SweepResult sweep_all(const SweepSpec& spec)
{
    spec.validate();
    const std::size_t n_kappa = spec.optimize_kappa ? 1 : spec.kappa_grid.size();
    const std::size_t n_order = spec.mod_orders.size();
    SweepResult result;
    result.points.resize(spec.received_power_grid.size() * n_kappa * n_order);
    parallel_for(result.points.size(), spec.threads, [&](std::size_t idx) {
        const std::size_t ip = idx / (n_kappa * n_order);
        const std::size_t ik = (idx / n_order) % n_kappa;
        const int order = spec.mod_orders[idx % n_order];
        const double p = spec.received_power_grid[ip];
        const double kappa =
            spec.optimize_kappa ? optimize_kappa(spec.link, p, spec.kappa_grid).kappa : spec.kappa_grid[ik];
        const OperatingPoint op = spec.link.at(p, kappa);
        SweepPoint& pt = result.points[idx];
        pt.received_power = p;
        pt.kappa = kappa;
        pt.mod_order = order;
        pt.analytic = link_metrics(op, order);
        pt.se_qam = adaptive_se(pt.analytic.snr, spec.adaptation_orders, spec.ber_target);
        if (spec.simulate)
        {
            McOptions opt;
            opt.n_frames = spec.frames_per_point;
            opt.seed = spec.master_seed;
            opt.stream = idx;
            opt.gain_source = spec.gain_source;
            pt.empirical = run_mc_point(op, order, opt);
        }
    });
    return result;
}

} // namespace spad_ofdm

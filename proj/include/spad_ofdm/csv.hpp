#pragma once

// CSV output for sweeps. Numbers use 9 significant digits ("%.9g"), so a
// given result always produces the same bytes.

#include "spad_ofdm/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>

namespace spad_ofdm {

inline std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline double to_db(double ratio) { return 10.0 * std::log10(ratio); }

inline constexpr const char* kSweepHeader =
    "p_rx_w,kappa,alpha_analytic,alpha_mc,var_wd_analytic,var_wd_mc,var_ws_analytic,var_ws_mc,"
    "sdnr_db,ssnr_db,snr_db,ber_analytic,ber_mc,ber_stderr,se_qam,se_upper,mod_order";

inline void write_sweep_csv(std::ostream& out, const SweepResult& result)
{
    out << kSweepHeader << '\n';
    for (const SweepPoint& p : result.points)
    {
        const LinkMetrics& a = p.analytic;
        const auto& e = p.empirical;
        auto mc = [&](double v) { return e ? format_number(v) : std::string(); };
        out << format_number(p.received_power) << ',' << format_number(p.kappa) << ','
            << format_number(a.alpha) << ',' << mc(e ? e->alpha : 0.0) << ',' << format_number(a.var_wd) << ','
            << mc(e ? e->var_wd : 0.0) << ',' << format_number(a.var_ws) << ',' << mc(e ? e->var_ws : 0.0)
            << ',' << format_number(to_db(a.sdnr)) << ',' << format_number(to_db(a.ssnr)) << ','
            << format_number(to_db(a.snr)) << ',' << format_number(a.ber) << ',' << mc(e ? e->ber : 0.0)
            << ',' << mc(e ? e->ber_stderr : 0.0) << ',' << format_number(p.se_qam) << ','
            << format_number(a.se_upper) << ',' << p.mod_order << '\n';
    }
}

inline constexpr const char* kMomentsHeader =
    "p_rx_w,incident_rate,mean_count,var_count,mean_count_ideal,var_count_ideal";

inline void write_moments_csv(std::ostream& out, std::span<const MomentPoint> moments)
{
    out << kMomentsHeader << '\n';
    for (const MomentPoint& m : moments)
        out << format_number(m.received_power) << ',' << format_number(m.rate) << ','
            << format_number(m.mean) << ',' << format_number(m.var) << ',' << format_number(m.mean_ideal)
            << ',' << format_number(m.var_ideal) << '\n';
}

inline void emit_csv(const SweepResult& result, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    write_sweep_csv(out, result);
    if (!out)
        throw std::runtime_error("write to '" + path + "' failed");
}

inline void emit_moments_csv(std::span<const MomentPoint> moments, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    write_moments_csv(out, moments);
    if (!out)
        throw std::runtime_error("write to '" + path + "' failed");
}

} // namespace spad_ofdm

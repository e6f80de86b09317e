#pragma once

// Flat `key = value` run configuration with SI unit suffixes.
//
//   # comment
//   dead_time = 10 ns
//   background_power = 10nW
//   kappa = 2, 3.2, 4
//
// Unknown keys, a suffix of the wrong dimension and physically inconsistent
// combinations are errors that name the offending field.

#include "spad_ofdm/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spad_ofdm {

class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig
{
    SpadParams spad;
    double p_min = 0.0;
    double p_max = 10e-3;
    std::size_t fft_size = 1024;

    std::vector<double> kappa{3.2};
    double p_rx_min = 1e-9;
    double p_rx_max = 1e-3;
    std::size_t p_rx_points = 61;
    std::vector<int> mod_orders{16};
    std::vector<int> adaptation_orders{4, 8, 16, 32, 64};
    double ber_target = 3e-3;

    bool simulate = false;
    int frames_per_point = 2000;
    std::uint64_t seed = 1;
    GainSource gain_source = GainSource::data_aided;
    unsigned threads = 0;

    bool optimize_kappa = false;
    double kappa_search_min = 1.0;
    double kappa_search_max = 10.0;
    double kappa_search_step = 0.25;

    int validate_points = 100;
    int validate_frames = 1000;

    LinkTemplate link() const { return {spad, p_min, p_max, fft_size}; }
    std::vector<double> power_grid() const { return log_grid(p_rx_min, p_rx_max, p_rx_points); }
    std::vector<double> kappa_search_grid() const
    {
        return linear_grid(kappa_search_min, kappa_search_max, kappa_search_step);
    }

    void validate() const;
};

namespace detail {

enum class Dim
{
    none,
    fraction, // dimensionless; '%' accepted
    time,
    power,
    length,
    rate,
};

inline const char* dim_name(Dim d)
{
    switch (d)
    {
    case Dim::none: return "dimensionless";
    case Dim::fraction: return "fraction";
    case Dim::time: return "time";
    case Dim::power: return "power";
    case Dim::length: return "length";
    case Dim::rate: return "rate";
    }
    return "?";
}

struct Unit
{
    Dim dim;
    double scale;
};

inline const std::map<std::string, Unit, std::less<>>& unit_table()
{
    static const std::map<std::string, Unit, std::less<>> table{
        {"ps", {Dim::time, 1e-12}}, {"ns", {Dim::time, 1e-9}},   {"us", {Dim::time, 1e-6}},
        {"ms", {Dim::time, 1e-3}},  {"s", {Dim::time, 1.0}},     {"pW", {Dim::power, 1e-12}},
        {"nW", {Dim::power, 1e-9}}, {"uW", {Dim::power, 1e-6}},  {"mW", {Dim::power, 1e-3}},
        {"W", {Dim::power, 1.0}},   {"nm", {Dim::length, 1e-9}}, {"um", {Dim::length, 1e-6}},
        {"mm", {Dim::length, 1e-3}}, {"m", {Dim::length, 1.0}},  {"Hz", {Dim::rate, 1.0}},
        {"kHz", {Dim::rate, 1e3}},  {"MHz", {Dim::rate, 1e6}},   {"GHz", {Dim::rate, 1e9}},
        {"/s", {Dim::rate, 1.0}},   {"%", {Dim::fraction, 1e-2}},
    };
    return table;
}

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_list(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i)
        if (i == s.size() || s[i] == ',')
        {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    return out;
}

inline double parse_quantity(std::string_view key, std::string_view text, Dim dim)
{
    text = trim(text);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc())
        throw ConfigError(std::string(key) + ": cannot parse number from '" + std::string(text) + "'");
    const std::string_view suffix = trim(std::string_view(end, text.data() + text.size() - end));
    if (suffix.empty())
        return value;
    const auto it = unit_table().find(suffix);
    if (it == unit_table().end())
        throw ConfigError(std::string(key) + ": unknown unit '" + std::string(suffix) + "'");
    if (it->second.dim != dim)
        throw ConfigError(std::string(key) + ": unit mismatch, '" + std::string(suffix) + "' is a " +
                          dim_name(it->second.dim) + " unit but the field is " + dim_name(dim));
    return value * it->second.scale;
}

template <typename Int>
Int parse_integer(std::string_view key, std::string_view text)
{
    text = trim(text);
    Int value{};
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size())
        throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(text) + "'");
    return value;
}

inline bool parse_bool(std::string_view key, std::string_view text)
{
    text = trim(text);
    if (text == "true" || text == "yes" || text == "on" || text == "1")
        return true;
    if (text == "false" || text == "no" || text == "off" || text == "0")
        return false;
    throw ConfigError(std::string(key) + ": expected true/false, got '" + std::string(text) + "'");
}

inline std::string canonical_key(std::string_view key)
{
    static const std::map<std::string, std::string, std::less<>> aliases{
        {"t_s", "sample_duration"}, {"tau_d", "dead_time"},      {"n_a", "n_pixels"},
        {"dcr", "dark_count_rate"}, {"p_b", "background_power"}, {"k", "fft_size"},
    };
    const auto it = aliases.find(key);
    return it == aliases.end() ? std::string(key) : it->second;
}

inline void apply(RunConfig& c, std::string_view raw_key, std::string_view value)
{
    const std::string key = canonical_key(trim(raw_key));
    auto q = [&](Dim d) { return parse_quantity(key, value, d); };
    if (key == "n_pixels")
        c.spad.n_pixels = parse_integer<int>(key, value);
    else if (key == "dead_time")
        c.spad.dead_time = q(Dim::time);
    else if (key == "sample_duration")
        c.spad.sample_duration = q(Dim::time);
    else if (key == "pde")
        c.spad.pde = q(Dim::fraction);
    else if (key == "dark_count_rate")
        c.spad.dark_count_rate = q(Dim::rate);
    else if (key == "afterpulse_prob")
        c.spad.afterpulse_prob = q(Dim::fraction);
    else if (key == "crosstalk_prob")
        c.spad.crosstalk_prob = q(Dim::fraction);
    else if (key == "background_power")
        c.spad.background_power = q(Dim::power);
    else if (key == "wavelength")
        c.spad.wavelength = q(Dim::length);
    else if (key == "p_min")
        c.p_min = q(Dim::power);
    else if (key == "p_max")
        c.p_max = q(Dim::power);
    else if (key == "fft_size")
        c.fft_size = parse_integer<std::size_t>(key, value);
    else if (key == "kappa")
    {
        c.kappa.clear();
        for (auto item : split_list(value))
            c.kappa.push_back(parse_quantity(key, item, Dim::none));
    }
    else if (key == "p_rx_min")
        c.p_rx_min = q(Dim::power);
    else if (key == "p_rx_max")
        c.p_rx_max = q(Dim::power);
    else if (key == "p_rx_points")
        c.p_rx_points = parse_integer<std::size_t>(key, value);
    else if (key == "mod_orders")
    {
        c.mod_orders.clear();
        for (auto item : split_list(value))
            c.mod_orders.push_back(parse_integer<int>(key, item));
    }
    else if (key == "adaptation_orders")
    {
        c.adaptation_orders.clear();
        for (auto item : split_list(value))
            c.adaptation_orders.push_back(parse_integer<int>(key, item));
    }
    else if (key == "ber_target")
        c.ber_target = q(Dim::fraction);
    else if (key == "simulate")
        c.simulate = parse_bool(key, value);
    else if (key == "frames_per_point")
        c.frames_per_point = parse_integer<int>(key, value);
    else if (key == "seed")
        c.seed = parse_integer<std::uint64_t>(key, value);
    else if (key == "gain_source")
    {
        const auto v = trim(value);
        if (v == "data" || v == "data_aided")
            c.gain_source = GainSource::data_aided;
        else if (v == "analytic")
            c.gain_source = GainSource::analytic;
        else
            throw ConfigError("gain_source: expected 'data' or 'analytic', got '" + std::string(v) + "'");
    }
    else if (key == "threads")
        c.threads = parse_integer<unsigned>(key, value);
    else if (key == "optimize_kappa")
        c.optimize_kappa = parse_bool(key, value);
    else if (key == "kappa_search_min")
        c.kappa_search_min = q(Dim::none);
    else if (key == "kappa_search_max")
        c.kappa_search_max = q(Dim::none);
    else if (key == "kappa_search_step")
        c.kappa_search_step = q(Dim::none);
    else if (key == "validate_points")
        c.validate_points = parse_integer<int>(key, value);
    else if (key == "validate_frames")
        c.validate_frames = parse_integer<int>(key, value);
    else
        throw ConfigError("unknown key '" + std::string(trim(raw_key)) + "'");
}

inline std::pair<std::string_view, std::string_view> split_assignment(std::string_view line, std::string_view where)
{
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError(std::string(where) + ": expected 'key = value', got '" + std::string(line) + "'");
    const auto key = trim(line.substr(0, eq));
    if (key.empty())
        throw ConfigError(std::string(where) + ": missing key");
    return {key, trim(line.substr(eq + 1))};
}

} // namespace detail

inline void RunConfig::validate() const
{
    auto fail = [](const std::string& msg) { throw ConfigError("constraint violated: " + msg); };
    if (spad.n_pixels < 1)
        fail("n_pixels >= 1");
    if (!(spad.dead_time >= 0.0))
        fail("dead_time >= 0");
    if (!(spad.sample_duration > 0.0))
        fail("sample_duration > 0");
    if (spad.sample_duration < spad.dead_time)
    {
        std::ostringstream msg;
        msg << "sample_duration >= dead_time (sample_duration = " << spad.sample_duration
            << " s, dead_time = " << spad.dead_time << " s)";
        fail(msg.str());
    }
    if (!(spad.pde > 0.0 && spad.pde <= 1.0))
        fail("0 < pde <= 1");
    if (!(spad.dark_count_rate >= 0.0) || !(spad.background_power >= 0.0))
        fail("dark_count_rate >= 0 and background_power >= 0");
    if (!(spad.afterpulse_prob >= 0.0 && spad.afterpulse_prob < 1.0) ||
        !(spad.crosstalk_prob >= 0.0 && spad.crosstalk_prob < 1.0))
        fail("afterpulse_prob and crosstalk_prob in [0, 1)");
    if (!(spad.wavelength > 0.0))
        fail("wavelength > 0");
    if (!(p_min >= 0.0 && p_min < p_max))
        fail("0 <= p_min < p_max");
    if (fft_size < 4 || !is_power_of_two(fft_size))
        fail("fft_size is a power of two >= 4");
    if (kappa.empty())
        fail("kappa list is non-empty");
    for (double k : kappa)
        if (!(k > 0.0))
            fail("kappa > 0");
    if (!std::is_sorted(kappa.begin(), kappa.end()))
        fail("kappa list sorted ascending");
    if (!(p_rx_min > 0.0 && p_rx_min <= p_rx_max))
        fail("0 < p_rx_min <= p_rx_max");
    if (p_rx_points < 1)
        fail("p_rx_points >= 1");
    if (mod_orders.empty())
        fail("mod_orders is non-empty");
    if (adaptation_orders.empty())
        fail("adaptation_orders is non-empty");
    auto supported = [](int m) { return m == 4 || m == 8 || m == 16 || m == 32 || m == 64; };
    for (int m : mod_orders)
        if (!supported(m))
            fail("mod_orders in {4, 8, 16, 32, 64}");
    for (int m : adaptation_orders)
        if (!supported(m))
            fail("adaptation_orders in {4, 8, 16, 32, 64}");
    if (!(ber_target > 0.0 && ber_target < 1.0))
        fail("0 < ber_target < 1");
    if (frames_per_point < 1)
        fail("frames_per_point >= 1");
    if (!(kappa_search_min > 0.0 && kappa_search_min <= kappa_search_max && kappa_search_step > 0.0))
        fail("0 < kappa_search_min <= kappa_search_max, kappa_search_step > 0");
    if (validate_points < 1 || validate_frames < 1)
        fail("validate_points >= 1 and validate_frames >= 1");
}

/// Parses config text, then applies `key=value` overrides in order; missing
/// keys keep their defaults (the reference receiver).
inline RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {})
{
    RunConfig c;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size())
    {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto [key, value] = detail::split_assignment(line, "line " + std::to_string(line_no));
        detail::apply(c, key, value);
    }
    for (const auto& o : overrides)
    {
        const auto [key, value] = detail::split_assignment(o, "--set");
        detail::apply(c, key, value);
    }
    c.validate();
    return c;
}

inline RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {})
{
    std::string text;
    if (!path.empty())
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open config file '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    return parse_config(text, overrides);
}

inline SweepSpec sweep_spec(const RunConfig& c)
{
    SweepSpec s;
    s.link = c.link();
    s.received_power_grid = c.power_grid();
    s.kappa_grid = c.optimize_kappa ? c.kappa_search_grid() : c.kappa;
    s.mod_orders = c.mod_orders;
    s.adaptation_orders = c.adaptation_orders;
    s.frames_per_point = c.frames_per_point;
    s.master_seed = c.seed;
    s.ber_target = c.ber_target;
    s.simulate = c.simulate;
    s.gain_source = c.gain_source;
    s.optimize_kappa = c.optimize_kappa;
    s.threads = c.threads;
    return s;
}

} // namespace spad_ofdm

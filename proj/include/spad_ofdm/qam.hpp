#pragma once

// Gray-labelled QAM alphabets with unit average energy.
//
// Square orders (4, 16, 64) are exact Gray maps built from two Gray-coded PAM
// axes. 8-QAM is the 4x2 rectangular grid. 32-QAM is the 6x6 cross obtained by
// folding the outer columns of an 8x4 Gray rectangle onto the top and bottom
// rows, (+-7, q) -> (+-(4-|q|), 5 sgn q); that fold minimizes the total
// Hamming distance over nearest-neighbour pairs.

#include "spad_ofdm/fft.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spad_ofdm {

class QamConstellation
{
public:
    explicit QamConstellation(int order) : order_(order)
    {
        int bits_i = 0;
        int bits_q = 0;
        bool cross = false;
        switch (order)
        {
        case 4: bits_i = 1; bits_q = 1; break;
        case 8: bits_i = 2; bits_q = 1; break;
        case 16: bits_i = 2; bits_q = 2; break;
        case 32: bits_i = 3; bits_q = 2; cross = true; break;
        case 64: bits_i = 3; bits_q = 3; break;
        default:
            throw std::invalid_argument("unsupported QAM order " + std::to_string(order));
        }
        bits_ = bits_i + bits_q;

        const int levels_i = 1 << bits_i;
        const int levels_q = 1 << bits_q;
        by_label_.assign(order, cplx{});
        std::vector<std::pair<int, int>> grid(order);
        for (int i = 0; i < levels_i; ++i)
        {
            for (int q = 0; q < levels_q; ++q)
            {
                int re = 2 * i - (levels_i - 1);
                int im = 2 * q - (levels_q - 1);
                if (cross && std::abs(re) == 7)
                {
                    const int sign = re > 0 ? 1 : -1;
                    re = sign * (4 - std::abs(im));
                    im = im > 0 ? 5 : -5;
                }
                const auto label = static_cast<std::uint32_t>((gray(i) << bits_q) | gray(q));
                grid[label] = {re, im};
            }
        }

        double energy = 0.0;
        for (const auto& [re, im] : grid)
            energy += re * re + im * im;
        energy /= order;
        scale_ = 1.0 / std::sqrt(energy);

        for (std::uint32_t label = 0; label < static_cast<std::uint32_t>(order); ++label)
        {
            const auto [re, im] = grid[label];
            by_label_[label] = cplx(re * scale_, im * scale_);
            extent_re_ = std::max(extent_re_, std::abs(re));
            extent_im_ = std::max(extent_im_, std::abs(im));
        }
        // Slicer lookup over the odd-integer lattice; -1 marks holes (cross corners).
        lattice_.assign(static_cast<std::size_t>((extent_re_ + 1) * (extent_im_ + 1)), -1);
        for (std::uint32_t label = 0; label < static_cast<std::uint32_t>(order); ++label)
        {
            const auto [re, im] = grid[label];
            lattice_[lattice_index(re, im)] = static_cast<int>(label);
        }
    }

    int order() const { return order_; }
    int bits_per_symbol() const { return bits_; }

    /// Point carrying the given bit label (MSB first).
    cplx point(std::uint32_t label) const { return by_label_.at(label); }
    std::span<const cplx> points() const { return by_label_; }

    /// Minimum-distance decision.
    std::uint32_t nearest(cplx s) const
    {
        const int re = snap(s.real() / scale_, extent_re_);
        const int im = snap(s.imag() / scale_, extent_im_);
        const int hit = lattice_[lattice_index(re, im)];
        if (hit >= 0)
            return static_cast<std::uint32_t>(hit);
        std::uint32_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::uint32_t label = 0; label < by_label_.size(); ++label)
        {
            const double d = std::norm(s - by_label_[label]);
            if (d < best_d)
            {
                best_d = d;
                best = label;
            }
        }
        return best;
    }

private:
    static int gray(int i) { return i ^ (i >> 1); }

    // nearest odd integer, clamped to the lattice
    static int snap(double v, int extent)
    {
        const double k = std::floor(std::clamp(v, -double(extent), double(extent)) / 2.0) * 2.0 + 1.0;
        return std::clamp(static_cast<int>(k), -extent, extent);
    }

    std::size_t lattice_index(int re, int im) const
    {
        const int cols = extent_re_ + 1;
        return static_cast<std::size_t>(((im + extent_im_) / 2) * cols + (re + extent_re_) / 2);
    }

    int order_;
    int bits_ = 0;
    double scale_ = 1.0;
    int extent_re_ = 0;
    int extent_im_ = 0;
    std::vector<cplx> by_label_;
    std::vector<int> lattice_;
};

/// Maps consecutive bit groups (MSB first, one bit per byte) to symbols
/// scaled by `amplitude`.
inline std::vector<cplx> qam_modulate(std::span<const std::uint8_t> bits,
                                      const QamConstellation& qam, double amplitude = 1.0)
{
    const auto m = static_cast<std::size_t>(qam.bits_per_symbol());
    if (bits.size() % m != 0)
        throw std::invalid_argument("qam_modulate: bit count not a multiple of log2(M)");
    std::vector<cplx> out(bits.size() / m);
    for (std::size_t s = 0; s < out.size(); ++s)
    {
        std::uint32_t label = 0;
        for (std::size_t b = 0; b < m; ++b)
            label = (label << 1) | (bits[s * m + b] & 1u);
        out[s] = qam.point(label) * amplitude;
    }
    return out;
}

inline std::vector<cplx> qam_modulate(std::span<const std::uint8_t> bits, int order,
                                      double amplitude = 1.0)
{
    return qam_modulate(bits, QamConstellation(order), amplitude);
}

inline void qam_demodulate_into(std::span<const cplx> symbols, const QamConstellation& qam,
                                double amplitude, std::span<std::uint8_t> bits)
{
    const auto m = static_cast<std::size_t>(qam.bits_per_symbol());
    if (bits.size() != symbols.size() * m)
        throw std::invalid_argument("qam_demodulate: output size mismatch");
    for (std::size_t s = 0; s < symbols.size(); ++s)
    {
        const std::uint32_t label = qam.nearest(symbols[s] / amplitude);
        for (std::size_t b = 0; b < m; ++b)
            bits[s * m + b] = static_cast<std::uint8_t>((label >> (m - 1 - b)) & 1u);
    }
}

inline std::vector<std::uint8_t> qam_demodulate(std::span<const cplx> symbols,
                                                const QamConstellation& qam, double amplitude = 1.0)
{
    std::vector<std::uint8_t> bits(symbols.size() * static_cast<std::size_t>(qam.bits_per_symbol()));
    qam_demodulate_into(symbols, qam, amplitude, bits);
    return bits;
}

} // namespace spad_ofdm

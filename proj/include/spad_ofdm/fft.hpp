#pragma once

// Unitary DFT of fixed size on top of FFTW. One Fft instance per thread;
// execution is reentrant, plan creation is serialized.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

namespace spad_ofdm {

using cplx = std::complex<double>;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

class Fft
{
public:
    explicit Fft(std::size_t size) : size_(size)
    {
        if (size == 0)
            throw std::invalid_argument("Fft: size must be positive");
        in_ = fftw_alloc_complex(size);
        out_ = fftw_alloc_complex(size);
        if (in_ == nullptr || out_ == nullptr)
        {
            release();
            throw std::bad_alloc();
        }
        std::lock_guard<std::mutex> lock(planner_mutex());
        const int n = static_cast<int>(size);
        forward_ = fftw_plan_dft_1d(n, in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_1d(n, in_, out_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
    ~Fft() { release(); }

    std::size_t size() const { return size_; }

    /// Y[k] = K^{-1/2} sum_n y[n] exp(-2 pi j n k / K)
    void forward(std::span<const cplx> in, std::span<cplx> out) { run(forward_, in, out); }

    /// x[n] = K^{-1/2} sum_k X[k] exp(+2 pi j n k / K)
    void inverse(std::span<const cplx> in, std::span<cplx> out) { run(backward_, in, out); }

private:
    static std::mutex& planner_mutex()
    {
        static std::mutex m;
        return m;
    }

    void run(fftw_plan plan, std::span<const cplx> in, std::span<cplx> out)
    {
        if (in.size() != size_ || out.size() != size_)
            throw std::invalid_argument("Fft: length mismatch");
        auto* src = reinterpret_cast<cplx*>(in_);
        std::copy(in.begin(), in.end(), src);
        fftw_execute(plan);
        const double scale = 1.0 / std::sqrt(static_cast<double>(size_));
        const auto* dst = reinterpret_cast<const cplx*>(out_);
        for (std::size_t i = 0; i < size_; ++i)
            out[i] = dst[i] * scale;
    }

    void release()
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (forward_ != nullptr)
            fftw_destroy_plan(forward_);
        if (backward_ != nullptr)
            fftw_destroy_plan(backward_);
        fftw_free(in_);
        fftw_free(out_);
        forward_ = backward_ = nullptr;
        in_ = out_ = nullptr;
    }

    std::size_t size_;
    fftw_complex* in_ = nullptr;
    fftw_complex* out_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

/// Per-thread transform of the requested size, for the free-function API.
inline Fft& thread_fft(std::size_t size)
{
    thread_local std::vector<std::unique_ptr<Fft>> cache;
    for (auto& f : cache)
        if (f->size() == size)
            return *f;
    cache.push_back(std::make_unique<Fft>(size));
    return *cache.back();
}

} // namespace spad_ofdm

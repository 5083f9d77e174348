#include "nemclock/fft.hpp"

#include "nemclock/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <memory>
#include <mutex>

namespace nemclock {

namespace {

// FFTW's planner is not thread-safe; execution with distinct arrays is.
std::mutex g_planner;

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using fftw_buffer = std::unique_ptr<T[], FftwFree>;

template <class T>
fftw_buffer<T> allocate(std::size_t n) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
    if (p == nullptr) {
        throw NumericalError("FFT buffer allocation failed");
    }
    return fftw_buffer<T>(p);
}

// Real forward transform, pointwise map of the spectrum, inverse transform.
template <class Map>
std::vector<double> transform_roundtrip(std::span<const double> input, std::size_t n, std::size_t keep, Map&& map) {
    const std::size_t half = n / 2 + 1;
    auto real = allocate<double>(n);
    auto spec = allocate<fftw_complex>(half);
    fftw_plan forward;
    fftw_plan backward;
    {
        std::lock_guard lock(g_planner);
        forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), real.get(), spec.get(), FFTW_ESTIMATE);
        backward = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec.get(), real.get(), FFTW_ESTIMATE);
    }
    std::fill(real.get(), real.get() + n, 0.0);
    std::copy(input.begin(), input.end(), real.get());
    fftw_execute(forward);
    for (std::size_t k = 0; k < half; ++k) {
        std::complex<double> z(spec[k][0], spec[k][1]);
        z = map(z);
        spec[k][0] = z.real();
        spec[k][1] = z.imag();
    }
    fftw_execute(backward);
    {
        std::lock_guard lock(g_planner);
        fftw_destroy_plan(forward);
        fftw_destroy_plan(backward);
    }
    std::vector<double> out(keep);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < keep; ++i) {
        out[i] = real[i] * scale;
    }
    return out;
}

} // namespace

std::size_t fft_size(std::size_t n) {
    std::size_t best = 1;
    while (best < n) {
        best *= 2;
    }
    for (std::size_t a = 1; a <= best; a *= 2) {
        for (std::size_t b = a; b <= best; b *= 3) {
            for (std::size_t c = b; c <= best; c *= 5) {
                if (c >= n && c < best) {
                    best = c;
                }
            }
        }
    }
    return best;
}

std::vector<double> lagged_product_sums(std::span<const double> y, std::size_t max_lag) {
    if (max_lag >= y.size()) {
        throw NumericalError("lagged products: series shorter than the maximum lag");
    }
    const std::size_t n = fft_size(y.size() + max_lag + 1);
    return transform_roundtrip(y, n, max_lag + 1, [](std::complex<double> z) { return std::complex<double>(std::norm(z), 0.0); });
}

std::vector<double> self_convolution(std::span<const double> p, unsigned n) {
    if (n == 0) {
        throw NumericalError("self-convolution order must be >= 1");
    }
    if (p.empty()) {
        return {};
    }
    if (n == 1) {
        return {p.begin(), p.end()};
    }
    const std::size_t out_len = n * (p.size() - 1) + 1;
    const std::size_t size = fft_size(out_len);
    return transform_roundtrip(p, size, out_len, [n](std::complex<double> z) {
        std::complex<double> result(1.0, 0.0);
        std::complex<double> base = z;
        for (unsigned e = n; e > 0; e >>= 1) {
            if (e & 1U) {
                result *= base;
            }
            base *= base;
        }
        return result;
    });
}

} // namespace nemclock

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nemclock {

/// Smallest size >= n of the form 2^a 3^b 5^c (fast FFT lengths).
[[nodiscard]] std::size_t fft_size(std::size_t n);

/// Lagged products s_k = sum_t y_t y_{t+k} for k = 0..max_lag, computed by
/// zero-padded FFT (no circular wrap-around).
[[nodiscard]] std::vector<double> lagged_product_sums(std::span<const double> y, std::size_t max_lag);

/// Linear self-convolution of p with itself n times (n >= 1), length
/// n (p.size() - 1) + 1, via one forward and one inverse transform.
[[nodiscard]] std::vector<double> self_convolution(std::span<const double> p, unsigned n);

} // namespace nemclock

#pragma once

#include <complex>
#include <vector>

namespace torusflow::fft {

inline constexpr int forward = -1;   // e^{-i...}, matches FFTW_FORWARD
inline constexpr int backward = +1;  // e^{+i...}, matches FFTW_BACKWARD

/// Unnormalized in-place 1-D DFT of `howmany` contiguous transforms of
/// length n, laid out back to back in `data`. Plans are cached per
/// (n, howmany, sign); execution is thread-safe on distinct buffers.
void dft_1d_batched(std::complex<double>* data, int n, int howmany, int sign);

/// Unnormalized in-place 3-D DFT (row-major n x n x n blocks, `howmany`
/// blocks back to back).
void dft_3d_batched(std::complex<double>* data, int n, int howmany, int sign);

/// Serial O(n^2) reference transform, same convention as dft_1d_batched
/// with howmany = 1. Kept for testing and benchmarking.
std::vector<std::complex<double>> naive_dft_1d(const std::vector<std::complex<double>>& in,
                                               int sign);

}  // namespace torusflow::fft

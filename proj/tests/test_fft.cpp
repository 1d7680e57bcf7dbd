#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "torusflow/fft.hpp"
#include "torusflow/rng.hpp"

#include <complex>
#include <vector>

using namespace torusflow;
using cd = std::complex<double>;

namespace {

std::vector<cd> random_signal(int n, std::uint64_t stream) {
    auto eng = rng::engine_for(7, stream);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<cd> v(n);
    for (auto& x : v) x = cd(gauss(eng), gauss(eng));
    return v;
}

}  // namespace

TEST_CASE("fftw matches the serial reference transform") {
    for (int n : {1, 2, 7, 16, 34, 65}) {
        auto sig = random_signal(n, n);
        auto ref = fft::naive_dft_1d(sig, fft::forward);
        auto buf = sig;
        fft::dft_1d_batched(buf.data(), n, 1, fft::forward);
        double worst = 0.0;
        for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(buf[i] - ref[i]));
        CHECK(worst < 1e-10 * n);
    }
}

TEST_CASE("forward then backward recovers the signal up to n") {
    const int n = 48;
    auto sig = random_signal(n, 3);
    auto buf = sig;
    fft::dft_1d_batched(buf.data(), n, 1, fft::forward);
    fft::dft_1d_batched(buf.data(), n, 1, fft::backward);
    for (int i = 0; i < n; ++i) CHECK(std::abs(buf[i] / double(n) - sig[i]) < 1e-12);
}

TEST_CASE("batched transforms act independently per block") {
    const int n = 17, howmany = 5;
    std::vector<cd> blocks(static_cast<std::size_t>(n) * howmany);
    for (int b = 0; b < howmany; ++b) {
        auto sig = random_signal(n, 100 + b);
        std::copy(sig.begin(), sig.end(), blocks.begin() + static_cast<std::size_t>(b) * n);
    }
    auto batched = blocks;
    fft::dft_1d_batched(batched.data(), n, howmany, fft::forward);
    for (int b = 0; b < howmany; ++b) {
        std::vector<cd> one(blocks.begin() + static_cast<std::size_t>(b) * n,
                            blocks.begin() + static_cast<std::size_t>(b + 1) * n);
        fft::dft_1d_batched(one.data(), n, 1, fft::forward);
        for (int i = 0; i < n; ++i)
            CHECK(std::abs(one[i] - batched[static_cast<std::size_t>(b) * n + i]) == 0.0);
    }
}

TEST_CASE("3d transform agrees with iterated 1d reference on a small cube") {
    const int n = 4;
    auto data = random_signal(n * n * n, 42);

    // reference: apply the 1-d serial transform along each axis in turn
    auto ref = data;
    auto apply_axis = [&](int axis) {
        std::vector<cd> line(n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                for (int i = 0; i < n; ++i) {
                    const int idx = axis == 0 ? (i * n + a) * n + b
                                   : axis == 1 ? (a * n + i) * n + b
                                               : (a * n + b) * n + i;
                    line[i] = ref[idx];
                }
                auto out = fft::naive_dft_1d(line, fft::forward);
                for (int i = 0; i < n; ++i) {
                    const int idx = axis == 0 ? (i * n + a) * n + b
                                   : axis == 1 ? (a * n + i) * n + b
                                               : (a * n + b) * n + i;
                    ref[idx] = out[i];
                }
            }
    };
    apply_axis(0);
    apply_axis(1);
    apply_axis(2);

    fft::dft_3d_batched(data.data(), n, 1, fft::forward);
    for (std::size_t i = 0; i < data.size(); ++i) CHECK(std::abs(data[i] - ref[i]) < 1e-10);
}

// Timing comparison of the OpenMP kernels against their serial reference
// implementations.

#include "torusflow/fft.hpp"
#include "torusflow/freespace.hpp"
#include "torusflow/rbound.hpp"
#include "torusflow/rng.hpp"
#include "torusflow/stokes_box.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace torusflow;

namespace {

double time_median_ms(const std::function<void()>& fn, int reps = 5) {
    std::vector<double> times;
    fn();  // warmup
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        times.push_back(
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count());
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

void row(const std::string& name, double serial_ms, double parallel_ms) {
    std::printf("%-44s %10.2f ms %10.2f ms %8.2fx\n", name.c_str(), serial_ms, parallel_ms,
                serial_ms / parallel_ms);
}

}  // namespace

int main() {
    const int max_threads = omp_get_max_threads();
    std::printf("threads available: %d\n", max_threads);
    std::printf("%-44s %13s %13s %9s\n", "kernel", "reference", "parallel", "speedup");

    {
        const int n = 2048;
        auto eng = rng::engine_for(1, 0);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<std::complex<double>> sig(n);
        for (auto& v : sig) v = {gauss(eng), gauss(eng)};
        const double naive = time_median_ms([&] { fft::naive_dft_1d(sig, fft::forward); });
        const double fast = time_median_ms([&] {
            auto buf = sig;
            fft::dft_1d_batched(buf.data(), n, 1, fft::forward);
        });
        row("dft n=2048: naive vs fftw", naive, fast);
    }

    {
        SpectralField V = random_solenoidal_field(12, 4, 1.0, 3, 4, 4);
        const double direct = time_median_ms([&] { nonlinearity_direct(V); }, 3);
        const double fftpath = time_median_ms([&] { nonlinearity(V); }, 3);
        row("nonlinearity N=12 K=4: convolution vs fft", direct, fftpath);
    }

    {
        auto eng = rng::engine_for(2, 0);
        std::normal_distribution<double> gauss(0.0, 1.0);
        OperatorFamily fam;
        for (int o = 0; o < 3; ++o) {
            Eigen::MatrixXcd M(3, 3);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) M(i, j) = {gauss(eng), gauss(eng)};
            fam.ops.push_back(std::move(M));
        }
        omp_set_num_threads(1);
        const double serial =
            time_median_ms([&] { estimate_rbound(fam, 4000, 4, 2.0, 9); }, 3);
        omp_set_num_threads(max_threads);
        const double parallel =
            time_median_ms([&] { estimate_rbound(fam, 4000, 4, 2.0, 9); }, 3);
        row("rbound 4000 trials: 1 thread vs all", serial, parallel);
    }

    {
        GammaPerpOptions opt;
        opt.K_time = 8;
        std::vector<Vec3> xs;
        for (double r = 2.0; r <= 16.0; r *= 1.3) xs.push_back({r, 0.3, 0.4});
        omp_set_num_threads(1);
        const double serial = time_median_ms([&] { gamma_perp_eval(xs, opt); }, 3);
        omp_set_num_threads(max_threads);
        const double parallel = time_median_ms([&] { gamma_perp_eval(xs, opt); }, 3);
        row("gamma_perp quadrature: 1 thread vs all", serial, parallel);
    }

    {
        SpectralField F = random_solenoidal_field(16, 8, 0.01, 4, 4, 4);
        omp_set_num_threads(1);
        const double serial = time_median_ms([&] { solve_tp_stokes(F, 1.0); }, 3);
        omp_set_num_threads(max_threads);
        const double parallel = time_median_ms([&] { solve_tp_stokes(F, 1.0); }, 3);
        row("tp-stokes solve N=16 K=8: 1 thread vs all", serial, parallel);
    }

    return 0;
}

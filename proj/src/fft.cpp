#include "torusflow/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace torusflow::fft {

namespace {

// The FFTW planner is not reentrant; execution on distinct buffers is.
std::mutex planner_mutex;

using PlanKey = std::tuple<int, int, int, int>;  // rank, n, howmany, sign
std::map<PlanKey, fftw_plan>& plan_cache() {
    static std::map<PlanKey, fftw_plan> cache;
    return cache;
}

fftw_plan get_plan(int rank, int n, int howmany, int sign, fftw_complex* buf) {
    std::lock_guard<std::mutex> lock(planner_mutex);
    auto& cache = plan_cache();
    PlanKey key{rank, n, howmany, sign};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    // FFTW_UNALIGNED keeps the plan valid for any buffer passed to
    // fftw_execute_dft, FFTW_ESTIMATE keeps planning deterministic.
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = nullptr;
    if (rank == 1) {
        plan = fftw_plan_many_dft(1, &n, howmany, buf, nullptr, 1, n, buf, nullptr, 1, n,
                                  sign, flags);
    } else {
        int dims[3] = {n, n, n};
        const int block = n * n * n;
        plan = fftw_plan_many_dft(3, dims, howmany, buf, nullptr, 1, block, buf, nullptr,
                                  1, block, sign, flags);
    }
    cache.emplace(key, plan);
    return plan;
}

}  // namespace

void dft_1d_batched(std::complex<double>* data, int n, int howmany, int sign) {
    if (n <= 0 || howmany <= 0) return;
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_plan plan = get_plan(1, n, howmany, sign, buf);
    fftw_execute_dft(plan, buf, buf);
}

void dft_3d_batched(std::complex<double>* data, int n, int howmany, int sign) {
    if (n <= 0 || howmany <= 0) return;
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_plan plan = get_plan(3, n, howmany, sign, buf);
    fftw_execute_dft(plan, buf, buf);
}

std::vector<std::complex<double>> naive_dft_1d(const std::vector<std::complex<double>>& in,
                                               int sign) {
    const int n = static_cast<int>(in.size());
    std::vector<std::complex<double>> out(n);
    for (int m = 0; m < n; ++m) {
        std::complex<double> acc = 0.0;
        for (int j = 0; j < n; ++j) {
            const double phase = sign * 2.0 * std::numbers::pi * double(m) * double(j) / double(n);
            acc += in[j] * std::complex<double>(std::cos(phase), std::sin(phase));
        }
        out[m] = acc;
    }
    return out;
}

}  // namespace torusflow::fft

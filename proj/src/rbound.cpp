#include "torusflow/rbound.hpp"

#include "torusflow/parallel.hpp"
#include "torusflow/rng.hpp"
#include "torusflow/torus.hpp"
#include "torusflow/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace torusflow {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double batch_stderr(const std::vector<double>& values) {
    const int B = std::min<int>(8, static_cast<int>(values.size()));
    if (B < 2) return 0.0;
    const int per = static_cast<int>(values.size()) / B;
    std::vector<double> maxima(B, 0.0);
    for (int b = 0; b < B; ++b) {
        const int lo = b * per;
        const int hi = (b == B - 1) ? static_cast<int>(values.size()) : lo + per;
        maxima[b] = *std::max_element(values.begin() + lo, values.begin() + hi);
    }
    double mean = 0.0;
    for (double m : maxima) mean += m;
    mean /= B;
    double var = 0.0;
    for (double m : maxima) var += (m - mean) * (m - mean);
    var /= (B - 1);
    return std::sqrt(var / B);
}

/// (mean over sign patterns of ||sum eps_k g_k||^p)^{1/p} with exact
/// enumeration of the 2^n patterns.
double rademacher_avg_exact(const std::vector<Eigen::VectorXcd>& g, double p) {
    const int n = static_cast<int>(g.size());
    const std::uint64_t patterns = 1ULL << n;
    double acc = 0.0;
    Eigen::VectorXcd sum(g.front().size());
    for (std::uint64_t bits = 0; bits < patterns; ++bits) {
        sum.setZero();
        for (int k = 0; k < n; ++k)
            sum += (bits >> k) & 1 ? g[k] : Eigen::VectorXcd(-g[k]);
        acc += std::pow(sum.norm(), p);
    }
    return std::pow(acc / double(patterns), 1.0 / p);
}

double rademacher_avg_mc(const std::vector<Eigen::VectorXcd>& g, double p, int n_draws,
                         std::mt19937_64& eng) {
    const int n = static_cast<int>(g.size());
    std::uniform_int_distribution<int> coin(0, 1);
    double acc = 0.0;
    Eigen::VectorXcd sum(g.front().size());
    for (int d = 0; d < n_draws; ++d) {
        sum.setZero();
        for (int k = 0; k < n; ++k) sum += coin(eng) ? g[k] : Eigen::VectorXcd(-g[k]);
        acc += std::pow(sum.norm(), p);
    }
    return std::pow(acc / double(n_draws), 1.0 / p);
}

double rademacher_ratio(const std::vector<const Eigen::MatrixXcd*>& sel,
                        const std::vector<Eigen::VectorXcd>& f, double p, int n_draws,
                        std::mt19937_64& eng) {
    const int n = static_cast<int>(f.size());
    std::vector<Eigen::VectorXcd> Tf(n);
    for (int k = 0; k < n; ++k) Tf[k] = (*sel[k]) * f[k];
    double num, den;
    if ((1ULL << n) <= 1024) {  // exact sign enumeration where feasible
        num = rademacher_avg_exact(Tf, p);
        den = rademacher_avg_exact(f, p);
    } else {
        num = rademacher_avg_mc(Tf, p, n_draws, eng);
        den = rademacher_avg_mc(f, p, n_draws, eng);
    }
    if (den == 0.0) throw std::invalid_argument("rbound: degenerate all-zero test vectors");
    return num / den;
}

RboundEstimate estimate_rbound_impl(const OperatorFamily& fam, int n_trials, int n_max, double p,
                                    std::uint64_t seed,
                                    const std::vector<Eigen::VectorXcd>* probe_set) {
    fam.validate();
    if (n_max < 1) throw std::invalid_argument("estimate_rbound: n_max must be >= 1");
    if (p < 1.0) throw std::invalid_argument("estimate_rbound: p must be >= 1");
    if (probe_set) {
        bool all_zero = true;
        for (const auto& v : *probe_set)
            if (v.norm() > 0.0) all_zero = false;
        if (probe_set->empty() || all_zero)
            throw std::invalid_argument("estimate_rbound: degenerate probe set");
    }

    const int cols = fam.cols();
    std::vector<double> trial_max(n_trials, 0.0);

    ParallelErrorGuard guard;
#pragma omp parallel for schedule(static)
    for (int trial = 0; trial < n_trials; ++trial) {
        guard.protect([&] {
        auto eng = rng::engine_for(seed, static_cast<std::uint64_t>(trial));
        std::uniform_int_distribution<int> pick_op(0, fam.n_ops() - 1);
        double best = 0.0;
        for (int n = 1; n <= n_max; ++n) {
            std::vector<const Eigen::MatrixXcd*> sel(n);
            std::vector<Eigen::VectorXcd> f(n);
            for (int k = 0; k < n; ++k) {
                sel[k] = &fam.ops[pick_op(eng)];
                if (probe_set) {
                    std::uniform_int_distribution<int> pick_f(0, static_cast<int>(probe_set->size()) - 1);
                    f[k] = (*probe_set)[pick_f(eng)];
                } else {
                    f[k] = rng::unit_sphere_complex(eng, cols);
                }
            }
            best = std::max(best, rademacher_ratio(sel, f, p, n_trials, eng));
        }
        trial_max[trial] = best;
        });
    }
    guard.rethrow();

    RboundEstimate est;
    est.value = *std::max_element(trial_max.begin(), trial_max.end());
    est.n_trials = n_trials;
    est.n_max = n_max;
    est.p_exponent = p;
    est.stderr_ = batch_stderr(trial_max);
    est.seed = seed;
    return est;
}

}  // namespace

void OperatorFamily::validate() const {
    if (ops.empty()) throw std::invalid_argument("OperatorFamily: needs at least one operator");
    for (const auto& op : ops)
        if (op.rows() != ops.front().rows() || op.cols() != ops.front().cols())
            throw std::invalid_argument("OperatorFamily: non-uniform operator shapes");
}

Eigen::MatrixXcd MultiplierProbe::derivative(double t) const {
    if (derivative_eval) return derivative_eval(t);
    const double h = 1e-5 * (1.0 + std::abs(t));
    return (symbol_eval(t + h) - symbol_eval(t - h)) / (2.0 * h);
}

RboundEstimate estimate_rbound(const OperatorFamily& fam, int n_trials, int n_max, double p,
                               std::uint64_t seed) {
    return estimate_rbound_impl(fam, n_trials, n_max, p, seed, nullptr);
}

RboundEstimate estimate_rbound_on_probes(const OperatorFamily& fam, int n_trials, int n_max,
                                         double p, std::uint64_t seed,
                                         const std::vector<Eigen::VectorXcd>& probe_set) {
    return estimate_rbound_impl(fam, n_trials, n_max, p, seed, &probe_set);
}

double brute_force_rbound(const OperatorFamily& fam, int n,
                          const std::vector<Eigen::VectorXcd>& test_vectors, double p) {
    fam.validate();
    if (n < 1 || n > 8 || fam.n_ops() > 4)
        throw std::invalid_argument("brute_force_rbound: enumeration guard exceeded (n <= 8, |fam| <= 4)");
    if (test_vectors.empty()) throw std::invalid_argument("brute_force_rbound: empty test-vector set");
    const int n_vec = static_cast<int>(test_vectors.size());
    double total_combos = std::pow(double(fam.n_ops()), n) * std::pow(double(n_vec), n);
    if (total_combos > 2e7) throw std::invalid_argument("brute_force_rbound: combination count too large");

    // Precompute every T_j v_i product once.
    std::vector<std::vector<Eigen::VectorXcd>> Tv(fam.n_ops(), std::vector<Eigen::VectorXcd>(n_vec));
    for (int j = 0; j < fam.n_ops(); ++j)
        for (int i = 0; i < n_vec; ++i) Tv[j][i] = fam.ops[j] * test_vectors[i];

    std::vector<int> op_idx(n, 0), vec_idx(n, 0);
    std::vector<Eigen::VectorXcd> f(n), g(n);
    double best = 0.0;

    const auto advance = [](std::vector<int>& digits, int base) {
        for (int pos = 0; pos < static_cast<int>(digits.size()); ++pos) {
            if (++digits[pos] < base) return true;
            digits[pos] = 0;
        }
        return false;
    };

    do {
        std::fill(vec_idx.begin(), vec_idx.end(), 0);
        do {
            for (int k = 0; k < n; ++k) {
                f[k] = test_vectors[vec_idx[k]];
                g[k] = Tv[op_idx[k]][vec_idx[k]];
            }
            const double den = rademacher_avg_exact(f, p);
            if (den == 0.0) continue;
            const double num = rademacher_avg_exact(g, p);
            best = std::max(best, num / den);
        } while (advance(vec_idx, n_vec));
    } while (advance(op_idx, fam.n_ops()));

    return best;
}

namespace {

/// Probe ratios ||op_T[m] f||_p / ||f||_p over pure-mode and random
/// bandlimited probes.
std::vector<double> torus_probe_ratios(const MultiplierProbe& probe, double p,
                                       int n_probe_functions, std::uint64_t seed) {
    const int K = probe.band_limit;
    const int dim = static_cast<int>(probe.symbol_eval(0.0).cols());
    const int n_time = 4 * (2 * K + 1) + 1;
    auto symbol = [&](int k) { return probe.symbol_eval(double(k)); };

    struct Probe {
        Eigen::MatrixXcd coeffs;
    };
    std::vector<Probe> probes;
    // One pure mode per retained frequency, then random bandlimited fill.
    for (int k = -K; k <= K; ++k) {
        auto eng = rng::engine_for(seed, 1000 + static_cast<std::uint64_t>(k + K));
        Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(2 * K + 1, dim);
        c.row(k + K) = rng::unit_sphere_complex(eng, dim).transpose();
        probes.push_back({std::move(c)});
    }
    for (int i = 0; i < n_probe_functions; ++i) {
        auto eng = rng::engine_for(seed, 2000 + static_cast<std::uint64_t>(i));
        Eigen::MatrixXcd c(2 * K + 1, dim);
        for (int r = 0; r < c.rows(); ++r) c.row(r) = rng::gaussian_complex(eng, dim).transpose();
        probes.push_back({std::move(c)});
    }

    std::vector<double> ratios(probes.size(), 0.0);
    NormSpec bochner{p, 0.0, NormSpec::Kind::bochner};
#pragma omp parallel for schedule(static)
    for (int i = 0; i < static_cast<int>(probes.size()); ++i) {
        TorusFunction f = from_coeffs(probes[i].coeffs, n_time);
        TorusFunction g = apply_operator_multiplier(f, symbol);
        const double den = norm(f, bochner);
        ratios[i] = den > 0.0 ? norm(g, bochner) / den : 0.0;
    }
    return ratios;
}

/// Probe ratios for op_R[M] discretized on a periodic window of length
/// 64*pi; probes are smooth bumps (support <= window/8) carrying either a
/// near-integer oscillation or random bandlimited periodic content.
std::vector<double> line_probe_ratios(const MultiplierProbe& probe, double p, int n_probes,
                                      std::uint64_t seed) {
    const double L = 64.0 * std::numbers::pi;
    const int M = 4096;
    const int K = probe.band_limit;
    const int dim = static_cast<int>(probe.symbol_eval(0.0).cols());

    auto bump = [](double u) { return std::abs(u) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0; };

    std::vector<double> ratios(n_probes, 0.0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n_probes; ++i) {
        auto eng = rng::engine_for(seed, 3000 + static_cast<std::uint64_t>(i));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const double halfwidth = L / 32.0 + (L / 32.0) * unif(eng);  // support <= L/8
        const double center = L / 8.0 + (L * 0.75) * unif(eng);

        Eigen::MatrixXcd samples = Eigen::MatrixXcd::Zero(M, dim);
        if (i % 2 == 0) {
            // windowed oscillation at an integer frequency
            const int k0 = -K + static_cast<int>(unif(eng) * (2 * K + 1));
            const Eigen::VectorXcd v = rng::unit_sphere_complex(eng, dim);
            for (int j = 0; j < M; ++j) {
                const double s = L * double(j) / double(M);
                const double env = bump((s - center) / halfwidth);
                if (env == 0.0) continue;
                const std::complex<double> osc(std::cos(k0 * s), std::sin(k0 * s));
                samples.row(j) = env * osc * v.transpose();
            }
        } else {
            // windowed random bandlimited 2pi-periodic payload
            Eigen::MatrixXcd c(2 * K + 1, dim);
            for (int r = 0; r < c.rows(); ++r) c.row(r) = rng::gaussian_complex(eng, dim).transpose();
            for (int j = 0; j < M; ++j) {
                const double s = L * double(j) / double(M);
                const double env = bump((s - center) / halfwidth);
                if (env == 0.0) continue;
                Eigen::RowVectorXcd val = Eigen::RowVectorXcd::Zero(dim);
                for (int k = -K; k <= K; ++k)
                    val += std::complex<double>(std::cos(k * s), std::sin(k * s)) * c.row(k + K);
                samples.row(j) = env * val;
            }
        }

        const auto lp_norm = [&](const Eigen::MatrixXcd& rows) {
            double acc = 0.0;
            for (int j = 0; j < M; ++j) acc += std::pow(rows.row(j).norm(), p);
            return std::pow(acc / double(M), 1.0 / p);
        };
        const double den = lp_norm(samples);
        if (den == 0.0) continue;

        // apply the line multiplier on the window's frequency grid
        std::vector<std::complex<double>> buf(samples.data(), samples.data() + samples.size());
        fft::dft_1d_batched(buf.data(), M, dim, fft::forward);
        Eigen::Map<Eigen::MatrixXcd> bins(buf.data(), M, dim);
        for (int j = 0; j < M; ++j) {
            const int jj = (j <= M / 2) ? j : j - M;
            const double xi = two_pi * double(jj) / L;
            bins.row(j) = (probe.symbol_eval(xi) * bins.row(j).transpose()).transpose();
        }
        fft::dft_1d_batched(buf.data(), M, dim, fft::backward);
        Eigen::MatrixXcd out = Eigen::Map<Eigen::MatrixXcd>(buf.data(), M, dim) / double(M);
        ratios[i] = lp_norm(out) / den;
    }
    return ratios;
}

}  // namespace

double estimate_multiplier_norm_torus(const MultiplierProbe& probe, double p,
                                      int n_probe_functions, std::uint64_t seed) {
    auto ratios = torus_probe_ratios(probe, p, n_probe_functions, seed);
    return *std::max_element(ratios.begin(), ratios.end());
}

TransferenceReport check_transference(const MultiplierProbe& probe, double p, std::uint64_t seed) {
    auto torus_ratios = torus_probe_ratios(probe, p, 64, seed);
    auto line_ratios = line_probe_ratios(probe, p, 96, seed);

    TransferenceReport rep;
    rep.torus_norm = *std::max_element(torus_ratios.begin(), torus_ratios.end());
    rep.line_norm = *std::max_element(line_ratios.begin(), line_ratios.end());
    // Probe-sampling spread plus a periodization allowance for the finite
    // window (L = 64*pi, support <= L/8).
    rep.tolerance = batch_stderr(torus_ratios) + batch_stderr(line_ratios) +
                    0.005 * std::max(rep.torus_norm, rep.line_norm);
    rep.satisfied = rep.torus_norm <= rep.line_norm + 3.0 * rep.tolerance;
    return rep;
}

MikhlinReport mikhlin_surrogate(const MultiplierProbe& probe, const std::vector<double>& sigma_grid,
                                int n_trials, int n_max, double p, std::uint64_t seed) {
    if (sigma_grid.empty()) throw std::invalid_argument("mikhlin_surrogate: empty sigma grid");
    OperatorFamily fam_M{{}, "M(t)"};
    OperatorFamily fam_tMp{{}, "t M'(t)"};
    for (double t : sigma_grid) {
        fam_M.ops.push_back(probe.symbol_eval(t));
        fam_tMp.ops.push_back(t * probe.derivative(t));
    }

    MikhlinReport rep;
    rep.r0_M = estimate_rbound(fam_M, n_trials, n_max, p, seed);
    rep.r0_tMprime = estimate_rbound(fam_tMp, n_trials, n_max, p, seed + 1);

    double tmax = 0.0;
    for (double t : sigma_grid) tmax = std::max(tmax, std::abs(t));
    OperatorFamily half{{}, "M(t), inner half"};
    for (std::size_t i = 0; i < sigma_grid.size(); ++i)
        if (std::abs(sigma_grid[i]) <= 0.5 * tmax) half.ops.push_back(fam_M.ops[i]);
    if (!half.ops.empty() && half.n_ops() < fam_M.n_ops()) {
        const double r_half = estimate_rbound(half, n_trials, n_max, p, seed).value;
        rep.grew_with_radius = rep.r0_M.value > 1.5 * r_half;
    }
    return rep;
}

}  // namespace torusflow

#include "torusflow/stokes_box.hpp"

#include "torusflow/fft.hpp"
#include "torusflow/parallel.hpp"
#include "torusflow/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace torusflow {

using cd = std::complex<double>;

SpectralField SpectralField::zero(int N, int K, double mu) {
    SpectralField f;
    f.N = N;
    f.K = K;
    f.mu = mu;
    f.data.assign(static_cast<std::size_t>(2 * K + 1) * 3 * N * N * N, cd(0.0, 0.0));
    return f;
}

PressureField PressureField::zero(int N, int K) {
    PressureField p;
    p.N = N;
    p.K = K;
    p.data.assign(static_cast<std::size_t>(2 * K + 1) * N * N * N, cd(0.0, 0.0));
    return p;
}

int dealias_cutoff(int N) { return N / 3; }

namespace {

int conj_space_index(int m, int N) {
    const int n2 = N * N;
    const int i0 = m / n2, i1 = (m / N) % N, i2 = m % N;
    return ((N - i0) % N) * n2 + ((N - i1) % N) * N + ((N - i2) % N);
}

bool in_dealias_band(const std::array<int, 3>& xi, int N) {
    const int cut = dealias_cutoff(N);
    for (int a = 0; a < 3; ++a)
        if (std::abs(xi[a]) > cut) return false;
    return true;
}

/// Copy of f with modes outside the 2/3 operating band zeroed (this also
/// removes the unpaired Nyquist planes of even grids).
SpectralField truncate_to_band(const SpectralField& f) {
    SpectralField g = f;
    const int NS = f.n_space();
#pragma omp parallel for schedule(static)
    for (int m = 0; m < NS; ++m) {
        if (in_dealias_band(f.freqs(m), f.N)) continue;
        for (int k = -f.K; k <= f.K; ++k)
            for (int c = 0; c < 3; ++c) g.at(k, c, m) = 0.0;
    }
    return g;
}

}  // namespace

SpectralField leray_project(const SpectralField& f) {
    SpectralField g = f;
    const int NS = f.n_space();
#pragma omp parallel for schedule(static)
    for (int kk = 0; kk < 2 * f.K + 1; ++kk) {
        const int k = kk - f.K;
        for (int m = 1; m < NS; ++m) {
            const auto xi = f.freqs(m);
            const double n2 = double(xi[0]) * xi[0] + double(xi[1]) * xi[1] + double(xi[2]) * xi[2];
            const cd dot = double(xi[0]) * f.at(k, 0, m) + double(xi[1]) * f.at(k, 1, m) +
                           double(xi[2]) * f.at(k, 2, m);
            for (int c = 0; c < 3; ++c) g.at(k, c, m) -= double(xi[c]) * dot / n2;
        }
    }
    g.divergence_free = true;
    return g;
}

std::pair<std::vector<cd>, std::vector<cd>> stokes_resolvent_mode(const std::vector<cd>& f_hat,
                                                                  int N, cd lambda, double mu) {
    const int NS = N * N * N;
    if (static_cast<int>(f_hat.size()) != 3 * NS)
        throw std::invalid_argument("stokes_resolvent_mode: bad slice size");
    std::vector<cd> u_hat(3 * NS, cd(0.0, 0.0));
    std::vector<cd> p_hat(NS, cd(0.0, 0.0));

    // xi = 0: the projection is the identity and the pressure is gauged out.
    {
        const cd f0[3] = {f_hat[0], f_hat[NS], f_hat[2 * NS]};
        const double fmag = std::sqrt(std::norm(f0[0]) + std::norm(f0[1]) + std::norm(f0[2]));
        if (lambda == cd(0.0, 0.0)) {
            if (fmag > 0.0)
                throw std::runtime_error("stokes_resolvent_mode: stationary mean-force incompatibility");
        } else {
            for (int c = 0; c < 3; ++c) u_hat[c * NS] = f0[c] / lambda;
        }
    }

    SpectralField probe;  // only for freqs()
    probe.N = N;

#pragma omp parallel for schedule(static)
    for (int m = 1; m < NS; ++m) {
        const auto xi = probe.freqs(m);
        const double n2 = double(xi[0]) * xi[0] + double(xi[1]) * xi[1] + double(xi[2]) * xi[2];
        const cd denom = mu * n2 + lambda;
        if (denom == cd(0.0, 0.0))
            throw std::runtime_error("stokes_resolvent_mode: singular symbol mu|xi|^2 + lambda = 0");
        const cd f[3] = {f_hat[m], f_hat[NS + m], f_hat[2 * NS + m]};
        const cd dot = double(xi[0]) * f[0] + double(xi[1]) * f[1] + double(xi[2]) * f[2];
        for (int c = 0; c < 3; ++c) u_hat[c * NS + m] = (f[c] - double(xi[c]) * dot / n2) / denom;
        p_hat[m] = cd(0.0, -1.0) * dot / n2;
    }
    return {std::move(u_hat), std::move(p_hat)};
}

std::pair<SpectralField, PressureField> solve_tp_stokes(const SpectralField& F, double mu) {
    const int NS = F.n_space();
    const double fnorm = l2_norm(F);
    const auto mean = F.mean_mode(0);
    const double mean_mag =
        std::sqrt(std::norm(mean[0]) + std::norm(mean[1]) + std::norm(mean[2]));
    if (mean_mag > 1e-12 * std::max(1.0, fnorm))
        throw std::runtime_error("solve_tp_stokes: stationary mean-force incompatibility");

    SpectralField V = SpectralField::zero(F.N, F.K, mu);
    PressureField P = PressureField::zero(F.N, F.K);

    ParallelErrorGuard guard;
#pragma omp parallel for schedule(static)
    for (int kk = 0; kk < 2 * F.K + 1; ++kk) {
        guard.protect([&] {
            const int k = kk - F.K;
            std::vector<cd> slice(3 * NS);
            for (int c = 0; c < 3; ++c)
                std::copy(F.data.begin() + F.index(k, c, 0),
                          F.data.begin() + F.index(k, c, 0) + NS,
                          slice.begin() + static_cast<std::size_t>(c) * NS);
            if (k == 0)
                for (int c = 0; c < 3; ++c)
                    slice[static_cast<std::size_t>(c) * NS] = 0.0;  // gauged mean
            auto [u_hat, p_hat] = stokes_resolvent_mode(slice, F.N, cd(0.0, double(k)), mu);
            for (int c = 0; c < 3; ++c)
                std::copy(u_hat.begin() + static_cast<std::size_t>(c) * NS,
                          u_hat.begin() + static_cast<std::size_t>(c + 1) * NS,
                          V.data.begin() + V.index(k, c, 0));
            std::copy(p_hat.begin(), p_hat.end(),
                      P.data.begin() + static_cast<std::size_t>(kk) * NS);
        });
    }
    guard.rethrow();
    V.divergence_free = true;
    V.real_valued = F.real_valued;
    return {std::move(V), std::move(P)};
}

double l2_norm(const SpectralField& f) {
    double acc = 0.0;
    for (const cd& v : f.data) acc += std::norm(v);
    return std::sqrt(acc);
}

double l2_norm(const PressureField& p) {
    double acc = 0.0;
    for (const cd& v : p.data) acc += std::norm(v);
    return std::sqrt(acc);
}

double energy_norm(const SpectralField& V, const PressureField& P) {
    const int NS = V.n_space();
    const int nk = 2 * V.K + 1;
    std::vector<double> dt2_k(nk, 0.0), h2_k(nk, 0.0), gp2_k(nk, 0.0);
#pragma omp parallel for schedule(static)
    for (int kk = 0; kk < nk; ++kk) {
        const int k = kk - V.K;
        for (int m = 0; m < NS; ++m) {
            const auto xi = V.freqs(m);
            const double n2 =
                double(xi[0]) * xi[0] + double(xi[1]) * xi[1] + double(xi[2]) * xi[2];
            const double bessel = (1.0 + n2) * (1.0 + n2);
            double mode2 = 0.0;
            for (int c = 0; c < 3; ++c) mode2 += std::norm(V.at(k, c, m));
            dt2_k[kk] += double(k) * k * mode2;
            h2_k[kk] += bessel * mode2;
            gp2_k[kk] += n2 * std::norm(P.at(k, m));
        }
    }
    double dt2 = 0.0, h2 = 0.0, gp2 = 0.0;
    for (int kk = 0; kk < nk; ++kk) {
        dt2 += dt2_k[kk];
        h2 += h2_k[kk];
        gp2 += gp2_k[kk];
    }
    return std::sqrt(dt2) + std::sqrt(h2) + std::sqrt(gp2);
}

namespace {

/// Spectral residual dV/dt - mu Lap V + grad P + extra - F, returned as
/// its l2 norm. `extra` may be null.
double residual_norm(const SpectralField& V, const PressureField& P, const SpectralField& F,
                     const SpectralField* extra, double mu) {
    const int NS = V.n_space();
    const int nk = 2 * V.K + 1;
    std::vector<double> acc_k(nk, 0.0);
#pragma omp parallel for schedule(static)
    for (int kk = 0; kk < nk; ++kk) {
        const int k = kk - V.K;
        for (int m = 0; m < NS; ++m) {
            const auto xi = V.freqs(m);
            const double n2 =
                double(xi[0]) * xi[0] + double(xi[1]) * xi[1] + double(xi[2]) * xi[2];
            for (int c = 0; c < 3; ++c) {
                cd r = (cd(0.0, double(k)) + mu * n2) * V.at(k, c, m) +
                       cd(0.0, double(xi[c])) * P.at(k, m) - F.at(k, c, m);
                if (extra) r += extra->at(k, c, m);
                acc_k[kk] += std::norm(r);
            }
        }
    }
    double acc = 0.0;
    for (double a : acc_k) acc += a;
    return std::sqrt(acc);
}

}  // namespace

double tp_stokes_residual(const SpectralField& V, const PressureField& P, const SpectralField& F,
                          double mu) {
    const double fn = l2_norm(F);
    return residual_norm(V, P, F, nullptr, mu) / (fn > 0.0 ? fn : 1.0);
}

double navier_stokes_residual(const SpectralField& V, const PressureField& P,
                              const SpectralField& F, double mu) {
    SpectralField NL = nonlinearity(V);
    const double fn = l2_norm(F);
    return residual_norm(V, P, F, &NL, mu) / (fn > 0.0 ? fn : 1.0);
}

SpectralField field_add(const SpectralField& a, const SpectralField& b, double sign) {
    SpectralField out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += sign * b.data[i];
    out.divergence_free = a.divergence_free && b.divergence_free;
    out.real_valued = a.real_valued && b.real_valued;
    return out;
}

SpectralField field_scale(const SpectralField& a, cd s) {
    SpectralField out = a;
    for (auto& v : out.data) v *= s;
    out.real_valued = a.real_valued && s.imag() == 0.0;
    return out;
}

double max_divergence_defect(const SpectralField& f) {
    const int NS = f.n_space();
    double worst = 0.0;
    for (int k = -f.K; k <= f.K; ++k)
        for (int m = 0; m < NS; ++m) {
            const auto xi = f.freqs(m);
            const cd dot = double(xi[0]) * f.at(k, 0, m) + double(xi[1]) * f.at(k, 1, m) +
                           double(xi[2]) * f.at(k, 2, m);
            double mag = 0.0;
            for (int c = 0; c < 3; ++c) mag += std::norm(f.at(k, c, m));
            worst = std::max(worst, std::abs(dot) / std::max(1e-300, std::sqrt(mag)));
        }
    return worst;
}

double hermitian_defect(const SpectralField& f) {
    const int NS = f.n_space();
    double worst = 0.0;
    for (int k = -f.K; k <= f.K; ++k)
        for (int m = 0; m < NS; ++m) {
            const int mc = conj_space_index(m, f.N);
            for (int c = 0; c < 3; ++c)
                worst = std::max(worst,
                                 std::abs(f.at(k, c, m) - std::conj(f.at(-k, c, mc))));
        }
    return worst;
}

void hermitian_symmetrize(SpectralField& f) {
    const int NS = f.n_space();
    for (int k = 0; k <= f.K; ++k)
        for (int m = 0; m < NS; ++m) {
            const int mc = conj_space_index(m, f.N);
            if (k == 0 && mc < m) continue;  // visit each pair once
            if (k == 0 && mc == m) {
                for (int c = 0; c < 3; ++c) f.at(0, c, m) = f.at(0, c, m).real();
                continue;
            }
            for (int c = 0; c < 3; ++c) {
                const cd avg = 0.5 * (f.at(k, c, m) + std::conj(f.at(-k, c, mc)));
                f.at(k, c, m) = avg;
                f.at(-k, c, mc) = std::conj(avg);
            }
        }
    f.real_valued = true;
}

SpectralField nonlinearity(const SpectralField& V, double* tail_mass) {
    const int N = V.N, K = V.K, NS = V.n_space();
    const int Mt = 4 * K + 1;  // alias-free time grid for quadratic products
    const SpectralField Vt = truncate_to_band(V);

    // 3 velocity + 9 gradient fields on the collocation grid, layout [t][m]
    std::vector<std::vector<cd>> phys(12);
    std::vector<cd> timebuf(static_cast<std::size_t>(NS) * Mt);

    auto to_physical = [&](int c, int grad_axis, std::vector<cd>& out) {
        std::fill(timebuf.begin(), timebuf.end(), cd(0.0, 0.0));
#pragma omp parallel for schedule(static)
        for (int m = 0; m < NS; ++m) {
            const auto xi = Vt.freqs(m);
            const cd factor =
                grad_axis < 0 ? cd(1.0, 0.0) : cd(0.0, double(xi[grad_axis]));
            for (int k = -K; k <= K; ++k) {
                const int bin = ((k % Mt) + Mt) % Mt;
                timebuf[static_cast<std::size_t>(m) * Mt + bin] = factor * Vt.at(k, c, m);
            }
        }
        fft::dft_1d_batched(timebuf.data(), Mt, NS, fft::backward);
        out.resize(static_cast<std::size_t>(Mt) * NS);
#pragma omp parallel for schedule(static)
        for (int t = 0; t < Mt; ++t)
            for (int m = 0; m < NS; ++m)
                out[static_cast<std::size_t>(t) * NS + m] =
                    timebuf[static_cast<std::size_t>(m) * Mt + t];
        fft::dft_3d_batched(out.data(), N, Mt, fft::backward);
    };

    for (int c = 0; c < 3; ++c) to_physical(c, -1, phys[c]);
    for (int j = 0; j < 3; ++j)
        for (int c = 0; c < 3; ++c) to_physical(c, j, phys[3 + 3 * j + c]);

    SpectralField out = SpectralField::zero(N, K, V.mu);
    double tail2 = 0.0;

    std::vector<cd> prod(static_cast<std::size_t>(Mt) * NS);
    for (int c = 0; c < 3; ++c) {
#pragma omp parallel for schedule(static)
        for (int t = 0; t < Mt; ++t)
            for (int m = 0; m < NS; ++m) {
                const std::size_t i = static_cast<std::size_t>(t) * NS + m;
                prod[i] = phys[0][i] * phys[3 + 0 + c][i] + phys[1][i] * phys[3 + 3 + c][i] +
                          phys[2][i] * phys[3 + 6 + c][i];
            }
        fft::dft_3d_batched(prod.data(), N, Mt, fft::forward);
#pragma omp parallel for schedule(static)
        for (int t = 0; t < Mt; ++t)
            for (int m = 0; m < NS; ++m)
                timebuf[static_cast<std::size_t>(m) * Mt + t] =
                    prod[static_cast<std::size_t>(t) * NS + m] / double(NS);
        fft::dft_1d_batched(timebuf.data(), Mt, NS, fft::forward);

        std::vector<double> tail_m(NS, 0.0);
#pragma omp parallel for schedule(static)
        for (int m = 0; m < NS; ++m) {
            const bool keep_space = in_dealias_band(out.freqs(m), N);
            for (int kb = -2 * K; kb <= 2 * K; ++kb) {
                const int bin = ((kb % Mt) + Mt) % Mt;
                const cd value = timebuf[static_cast<std::size_t>(m) * Mt + bin] / double(Mt);
                if (std::abs(kb) <= K) {
                    if (keep_space) out.at(kb, c, m) = value;
                } else {
                    tail_m[m] += std::norm(value);
                }
            }
        }
        for (double t : tail_m) tail2 += t;
    }

    if (tail_mass) *tail_mass = std::sqrt(tail2);
    if (V.real_valued) hermitian_symmetrize(out);
    out.divergence_free = false;
    return out;
}

SpectralField nonlinearity_direct(const SpectralField& V) {
    const int N = V.N, K = V.K, NS = V.n_space();
    const int cut = dealias_cutoff(N);
    const SpectralField Vt = truncate_to_band(V);

    struct Mode {
        int k;
        std::array<int, 3> xi;
        std::array<cd, 3> u;
    };
    std::vector<Mode> modes;
    for (int k = -K; k <= K; ++k)
        for (int m = 0; m < NS; ++m) {
            const std::array<cd, 3> u = {Vt.at(k, 0, m), Vt.at(k, 1, m), Vt.at(k, 2, m)};
            if (std::norm(u[0]) + std::norm(u[1]) + std::norm(u[2]) == 0.0) continue;
            modes.push_back({k, Vt.freqs(m), u});
        }

    SpectralField out = SpectralField::zero(N, K, V.mu);
    const int n_modes = static_cast<int>(modes.size());
    // fixed chunking keeps the reduction order independent of thread count
    const int n_chunks = 16;
    std::vector<SpectralField> partial(n_chunks, SpectralField::zero(N, K, V.mu));
#pragma omp parallel for schedule(static)
    for (int chunk = 0; chunk < n_chunks; ++chunk) {
        SpectralField& local = partial[chunk];
        for (int a = chunk; a < n_modes; a += n_chunks) {
            for (int b = 0; b < n_modes; ++b) {
                const Mode& ma = modes[a];
                const Mode& mb = modes[b];
                const int k = ma.k + mb.k;
                if (std::abs(k) > K) continue;
                const std::array<int, 3> xi = {ma.xi[0] + mb.xi[0], ma.xi[1] + mb.xi[1],
                                               ma.xi[2] + mb.xi[2]};
                if (std::abs(xi[0]) > cut || std::abs(xi[1]) > cut || std::abs(xi[2]) > cut)
                    continue;
                const int m = ((xi[0] + N) % N) * N * N + ((xi[1] + N) % N) * N + ((xi[2] + N) % N);
                // u_a . xi_b, times i, times u_b
                const cd s = ma.u[0] * double(mb.xi[0]) + ma.u[1] * double(mb.xi[1]) +
                             ma.u[2] * double(mb.xi[2]);
                const cd is = cd(0.0, 1.0) * s;
                for (int c = 0; c < 3; ++c) local.at(k, c, m) += is * mb.u[c];
            }
        }
    }
    for (const SpectralField& local : partial)
        for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += local.data[i];

    if (V.real_valued) hermitian_symmetrize(out);
    out.divergence_free = false;
    return out;
}

PicardSolution navier_stokes_picard(const SpectralField& F, double mu, double tol, int max_iter) {
    const double fnorm = l2_norm(F);
    const auto mean = F.mean_mode(0);
    if (std::sqrt(std::norm(mean[0]) + std::norm(mean[1]) + std::norm(mean[2])) >
        1e-12 * std::max(1.0, fnorm))
        throw std::runtime_error("navier_stokes_picard: forcing not mean-free at (k,xi)=(0,0)");

    PicardSolution sol;
    sol.V = SpectralField::zero(F.N, F.K, mu);
    sol.V.real_valued = F.real_valued;
    sol.V.divergence_free = true;
    sol.P = PressureField::zero(F.N, F.K);
    sol.report.epsilon_used = fnorm;

    for (int iter = 1; iter <= max_iter; ++iter) {
        double tail = 0.0;
        SpectralField NL = nonlinearity(sol.V, &tail);
        sol.report.time_tail_mass = std::max(sol.report.time_tail_mass, tail);
        SpectralField rhs = field_add(F, NL, -1.0);
        // the analytic (0,0) mean of u.grad u vanishes; discard its roundoff
        for (int c = 0; c < 3; ++c) rhs.at(0, c, 0) = 0.0;

        auto [Vn, Pn] = solve_tp_stokes(rhs, mu);
        const double diff = energy_norm(field_add(Vn, sol.V, -1.0),
                                        [&] {
                                            PressureField d = Pn;
                                            for (std::size_t i = 0; i < d.data.size(); ++i)
                                                d.data[i] -= sol.P.data[i];
                                            return d;
                                        }());
        sol.V = std::move(Vn);
        sol.P = std::move(Pn);
        sol.report.iterations = iter;
        sol.report.iterate_norms.push_back(energy_norm(sol.V, sol.P));
        sol.report.diff_norms.push_back(diff);
        if (diff < tol) {
            sol.report.converged = true;
            break;
        }
        if (!std::isfinite(diff) || diff > 1e8 * std::max(1.0, fnorm)) break;  // blow-up
    }

    sol.report.final_residual = navier_stokes_residual(sol.V, sol.P, F, mu);
    return sol;
}

SpectralField random_solenoidal_field(int N, int K, double amplitude, std::uint64_t seed,
                                      int space_band, int time_band) {
    SpectralField f = SpectralField::zero(N, K);
    const int NS = f.n_space();
    auto eng = rng::engine_for(seed, 0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int k = -std::min(K, time_band); k <= std::min(K, time_band); ++k)
        for (int m = 1; m < NS; ++m) {
            const auto xi = f.freqs(m);
            if (std::abs(xi[0]) > space_band || std::abs(xi[1]) > space_band ||
                std::abs(xi[2]) > space_band)
                continue;
            for (int c = 0; c < 3; ++c) f.at(k, c, m) = cd(gauss(eng), gauss(eng));
        }
    f = leray_project(f);
    hermitian_symmetrize(f);
    f = leray_project(f);  // symmetrization preserves solenoidality; kept exact
    const double n = l2_norm(f);
    if (n > 0.0) f = field_scale(f, amplitude / n);
    f.real_valued = true;
    f.divergence_free = true;
    return f;
}

std::pair<SpectralField, SpectralField> manufactured_solution(int N, int K, double mu,
                                                              double amplitude) {
    if (K < 4 || dealias_cutoff(N) < 2)
        throw std::invalid_argument("manufactured_solution: resolution too small");
    SpectralField V = SpectralField::zero(N, K, mu);

    auto set_mode = [&](int k, std::array<int, 3> xi, std::array<cd, 3> u) {
        const int m = ((xi[0] + N) % N) * N * N + ((xi[1] + N) % N) * N + ((xi[2] + N) % N);
        for (int c = 0; c < 3; ++c) V.at(k, c, m) = u[c];
    };
    // three divergence-free modes (xi . u = 0 each)
    set_mode(1, {1, 0, 0}, {cd(0, 0), cd(1.0, 0.2), cd(0.0, 0.5)});
    set_mode(0, {0, 1, 0}, {cd(0.7, 0.0), cd(0, 0), cd(0.3, 0.1)});
    set_mode(2, {1, 1, 0}, {cd(0.5, 0.0), cd(-0.5, 0.0), cd(0.0, 0.4)});

    hermitian_symmetrize(V);
    const double n = l2_norm(V);
    V = field_scale(V, amplitude / n);
    V.real_valued = true;
    V.divergence_free = true;

    // F = dV/dt - mu Lap V + V.grad V, with the discrete nonlinearity
    SpectralField F = nonlinearity(V);
    const int NS = V.n_space();
    for (int k = -K; k <= K; ++k)
        for (int m = 0; m < NS; ++m) {
            const auto xi = V.freqs(m);
            const double n2 =
                double(xi[0]) * xi[0] + double(xi[1]) * xi[1] + double(xi[2]) * xi[2];
            for (int c = 0; c < 3; ++c)
                F.at(k, c, m) += (cd(0.0, double(k)) + mu * n2) * V.at(k, c, m);
        }
    for (int c = 0; c < 3; ++c) F.at(0, c, 0) = 0.0;
    F.real_valued = true;
    return {std::move(V), std::move(F)};
}

}  // namespace torusflow

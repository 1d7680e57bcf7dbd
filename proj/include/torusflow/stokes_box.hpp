#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

namespace torusflow {

/// Truncated Fourier representation of a time-periodic vector field on
/// the box [0,2pi)^3: coefficients indexed by time mode k = -K..K and
/// spatial mode xi on an N^3 FFT grid (frequencies -N/2+1..N/2).
struct SpectralField {
    int N = 0;
    int K = 0;
    double mu = 1.0;
    bool divergence_free = false;
    bool real_valued = false;
    std::vector<std::complex<double>> data;  // [(2K+1)][3][N^3]

    static SpectralField zero(int N, int K, double mu = 1.0);

    int n_space() const { return N * N * N; }
    int n_modes() const { return (2 * K + 1) * 3 * n_space(); }
    std::size_t index(int k, int c, int m) const {
        return (static_cast<std::size_t>(k + K) * 3 + c) * n_space() + m;
    }
    std::complex<double>& at(int k, int c, int m) { return data[index(k, c, m)]; }
    const std::complex<double>& at(int k, int c, int m) const { return data[index(k, c, m)]; }

    int freq(int i) const { return i <= N / 2 ? i : i - N; }
    std::array<int, 3> freqs(int m) const {
        const int n2 = N * N;
        return {freq(m / n2), freq((m / N) % N), freq(m % N)};
    }

    /// Spatial mean of the velocity at time mode k (the xi = 0 modes).
    std::array<std::complex<double>, 3> mean_mode(int k) const {
        return {at(k, 0, 0), at(k, 1, 0), at(k, 2, 0)};
    }
};

struct PressureField {
    int N = 0;
    int K = 0;
    std::vector<std::complex<double>> data;  // [(2K+1)][N^3]

    static PressureField zero(int N, int K);
    int n_space() const { return N * N * N; }
    std::complex<double>& at(int k, int m) { return data[static_cast<std::size_t>(k + K) * n_space() + m]; }
    const std::complex<double>& at(int k, int m) const {
        return data[static_cast<std::size_t>(k + K) * n_space() + m];
    }
};

struct PicardReport {
    std::vector<double> iterate_norms;  // E-norm of each iterate
    std::vector<double> diff_norms;     // E-norm of successive differences
    bool converged = false;
    double final_residual = 0.0;
    double epsilon_used = 0.0;  // forcing magnitude the iteration ran at
    int iterations = 0;
    double time_tail_mass = 0.0;  // worst discarded time-mode mass of the nonlinearity
};

/// Fourier-side projection I - xi xi^T / |xi|^2 onto divergence-free
/// fields; xi = 0 modes pass through unchanged.
SpectralField leray_project(const SpectralField& f);

/// One spatial-mode-block Stokes resolvent solve:
/// lambda u - mu Lap u + grad p = f, div u = 0. Input/output layout is
/// [component][N^3]. Throws on a nonzero mean force with lambda = 0.
std::pair<std::vector<std::complex<double>>, std::vector<std::complex<double>>>
stokes_resolvent_mode(const std::vector<std::complex<double>>& f_hat, int N,
                      std::complex<double> lambda, double mu);

/// Time-periodic Stokes solve via per-(k, xi) division. The (k=0, xi=0)
/// forcing mode must vanish.
std::pair<SpectralField, PressureField> solve_tp_stokes(const SpectralField& F, double mu);

/// Pseudo-spectral u . grad u: inverse FFT in space and time (the time
/// grid is padded so retained products are alias-free), pointwise product
/// on the collocation grid, forward FFT, 2/3-rule dealiasing per spatial
/// axis. If tail_mass is given, receives the l2 mass of the discarded
/// time modes.
SpectralField nonlinearity(const SpectralField& V, double* tail_mass = nullptr);

/// Serial reference: exact truncated convolution over the retained mode
/// set. Kept for testing and benchmarking against the FFT path.
SpectralField nonlinearity_direct(const SpectralField& V);

struct PicardSolution {
    SpectralField V;
    PressureField P;
    PicardReport report;
};

/// Picard iteration V_{n+1} = solve_tp_stokes(F - nonlinearity(V_n))
/// from V_0 = 0; stops when the E-norm difference drops below tol.
/// Non-contraction yields a diverged report, not an exception.
PicardSolution navier_stokes_picard(const SpectralField& F, double mu, double tol, int max_iter);

// --- norms and field algebra -------------------------------------------

double l2_norm(const SpectralField& f);
double l2_norm(const PressureField& p);

/// E(u, p) = ||du/dt||_2 + ||u||_{H^2} + ||grad p||_2, all spectral.
double energy_norm(const SpectralField& V, const PressureField& P);

/// Relative discrete residual of the time-periodic Stokes equations.
double tp_stokes_residual(const SpectralField& V, const PressureField& P,
                          const SpectralField& F, double mu);

/// Relative discrete residual of the Navier-Stokes equations (uses the
/// same discrete nonlinearity as the solver).
double navier_stokes_residual(const SpectralField& V, const PressureField& P,
                              const SpectralField& F, double mu);

SpectralField field_add(const SpectralField& a, const SpectralField& b, double sign = 1.0);
SpectralField field_scale(const SpectralField& a, std::complex<double> s);

double max_divergence_defect(const SpectralField& f);
double hermitian_defect(const SpectralField& f);
void hermitian_symmetrize(SpectralField& f);

/// Largest |xi_i| kept by the 2/3 rule on an N grid.
int dealias_cutoff(int N);

/// Random real divergence-free field, mean-free at (k=0, xi=0), supported
/// on |k| <= time_band, |xi_i| <= space_band, scaled to the requested L2
/// norm. Deterministic in the seed.
SpectralField random_solenoidal_field(int N, int K, double amplitude, std::uint64_t seed,
                                      int space_band, int time_band);

/// Divergence-free manufactured solution (three modes in space/time) and
/// the forcing F = dV/dt + V.grad V - mu Lap V that makes it the exact
/// discrete Navier-Stokes solution with zero-mean pressure.
std::pair<SpectralField, SpectralField> manufactured_solution(int N, int K, double mu,
                                                              double amplitude);

}  // namespace torusflow

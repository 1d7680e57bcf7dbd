#pragma once

#include "torusflow/torus.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace torusflow {

using Vec3 = std::array<double, 3>;

/// Uniform real-valued lattice over [-extent, extent]^3 with n nodes per
/// axis (h = 2*extent/(n-1)); each node carries `components` values.
struct LatticeField {
    double extent = 1.0;
    int n = 1;
    int components = 1;
    std::vector<double> values;  // [m][c]
    std::optional<double> support_radius;

    static LatticeField zero(double extent, int n, int components);
    double h() const { return n > 1 ? 2.0 * extent / (n - 1) : 2.0 * extent; }
    int n_nodes() const { return n * n * n; }
    Vec3 point(int m) const;
    double& at(int m, int c) { return values[static_cast<std::size_t>(m) * components + c]; }
    double at(int m, int c) const { return values[static_cast<std::size_t>(m) * components + c]; }
};

struct DecayReport {
    std::vector<double> radii;
    std::vector<double> norms;
    double fitted_exponent = 0.0;
    double fit_residual = 0.0;  // max |log norm - fit| inside the window
    std::pair<double, double> window{0.0, 0.0};
};

// --- steady Stokes fundamental solutions --------------------------------

/// Velocity fundamental solution U_ij(x) = -(1/(8 pi mu)) (delta_ij/|x| +
/// x_i x_j / |x|^3). Rejects x = 0.
Eigen::Matrix3d stokeslet(const Vec3& x, double mu);

/// Pressure kernel q_j(x) = (1/(4 pi)) x_j / |x|^3. Rejects x = 0.
Eigen::Vector3d pressure_kernel(const Vec3& x);

/// d/dx_k of the kernels, closed form.
std::array<Eigen::Matrix3d, 3> stokeslet_gradient(const Vec3& x, double mu);
Eigen::Matrix3d pressure_kernel_gradient(const Vec3& x);  // (k, j) -> d_k q_j

/// Mean of 1/|z| over the unit cube, from the closed-form antiderivative;
/// scales as h^2 * this for a cube of side h.
double unit_cube_inverse_distance_integral();

struct SteadyEval {
    std::vector<Eigen::Vector3d> u;
    std::vector<double> p;
    std::vector<Eigen::Matrix3d> grad_u;  // (k, i) -> d_k u_i
};

/// Convolution with the fundamental pair by midpoint quadrature over the
/// declared support of f (3-component force lattice); the self-cell uses
/// the analytic cell average of 1/|y|. Evaluation points may lie anywhere.
SteadyEval steady_eval_points(const LatticeField& f, double mu, const std::vector<Vec3>& points);

/// Lattice-valued variant: velocity (3 components) and pressure (1) on a
/// fresh evaluation lattice.
std::pair<LatticeField, LatticeField> steady_convolve(const LatticeField& f, double mu,
                                                      double eval_extent, int eval_n);

// --- time-periodic fundamental solution ---------------------------------

/// Radial profiles of the k-th time mode of the kernel: the mode is
/// G_k(x) = A(r) I + B(r) xhat xhat^T with first radial derivatives dA,
/// dB. All four reduce to three 1-D Fourier-type integrals.
struct KernelModeProfiles {
    std::complex<double> A, B, dA, dB;
};

/// Ooura quadrature of the reduced 1-D oscillatory integrals. err_out
/// (optional) receives the worst estimated relative quadrature error.
KernelModeProfiles gamma_perp_profiles_quadrature(int k, double r, double mu,
                                                  double* err_out = nullptr);

/// Exact evaluation of the same integrals (Yukawa-type closed forms with
/// a = sqrt(ik/mu)); the independent oracle for the quadrature path.
KernelModeProfiles gamma_perp_profiles_closed_form(int k, double r, double mu);

Eigen::Matrix3cd gamma_perp_mode(const Vec3& x, const KernelModeProfiles& prof);
std::array<Eigen::Matrix3cd, 3> gamma_perp_mode_gradient(const Vec3& x,
                                                         const KernelModeProfiles& prof);

/// Truncated-lattice inverse-DFT cross-check of the k-th mode.
Eigen::Matrix3cd gamma_perp_mode_lattice_fft(const Vec3& x, int k, double mu,
                                             double dxi = 0.25, double cutoff = 24.0);

enum class GammaMethod { radial, fft };

struct GammaPerpOptions {
    int K_time = 8;
    double mu = 1.0;
    double delta = 1.0;  // validity standoff: |x| >= delta
    GammaMethod method = GammaMethod::radial;
};

struct GammaPerpValue {
    TorusFunction fn;  // 3x3-valued (dim 9, row-major components)
    bool tail_warning = false;
};

/// Evaluates Gamma_perp(x, .) as a TorusFunction over k in [-K, K] with
/// the k = 0 mode identically zero. Rejects |x| < delta.
std::vector<GammaPerpValue> gamma_perp_eval(const std::vector<Vec3>& xs,
                                            const GammaPerpOptions& opt);

// --- time-periodic convolution -------------------------------------------

/// Complex lattice field with one coefficient block per time mode.
struct TpLatticeField {
    double extent = 1.0;
    int n = 1;
    int K = 0;
    int components = 1;
    std::vector<std::complex<double>> values;  // [k+K][m][c]
    std::optional<double> support_radius;

    static TpLatticeField zero(double extent, int n, int K, int components);
    double h() const { return n > 1 ? 2.0 * extent / (n - 1) : 2.0 * extent; }
    int n_nodes() const { return n * n * n; }
    Vec3 point(int m) const;
    std::complex<double>& at(int k, int m, int c) {
        return values[(static_cast<std::size_t>(k + K) * n_nodes() + m) * components + c];
    }
    std::complex<double> at(int k, int m, int c) const {
        return values[(static_cast<std::size_t>(k + K) * n_nodes() + m) * components + c];
    }
};

/// v = grad Gamma_perp * G + Gamma_perp * h, assembled per time mode
/// (time convolution is coefficient multiplication). G is a 9-component
/// tensor lattice (index j*3+b for G_{jb}), h_src a 3-component compactly
/// supported lattice. Returns one dim-3 TorusFunction per evaluation
/// point. Kernel validity (|x - y| >= delta) is enforced.
std::vector<TorusFunction> tp_convolve(const TpLatticeField& G, const TpLatticeField& h_src,
                                       const std::vector<Vec3>& eval_points,
                                       const GammaPerpOptions& opt);

// --- weighted norms and decay fits ---------------------------------------

/// sup over the lattice of |f(x)| (1 + |x|)^ell (Euclidean norm across
/// components).
double weighted_norm(const LatticeField& field, double ell);

/// Oscillatory bracket: sup over points of ||f(x, .)||_{L_p(T)} (1+|x|)^ell.
double weighted_norm(const std::vector<Vec3>& points, const std::vector<TorusFunction>& values,
                     double ell, double p);

/// Least-squares slope of log(norm) against log(radius) inside the
/// window; needs at least 5 points and positive norms.
DecayReport decay_fit(const std::vector<double>& radii, const std::vector<double>& norms,
                      std::pair<double, double> window);

}  // namespace torusflow

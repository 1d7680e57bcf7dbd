#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <iosfwd>
#include <utility>

namespace torusflow {

/// A 2pi-periodic function with values in C^dim, held both as uniform
/// time samples on [0, 2pi) and as Fourier coefficients for the modes
/// k = -K..K with K = floor((n_time - 1) / 2). The two representations
/// are kept consistent; the unpaired Nyquist mode of even grids is
/// discarded at analysis.
struct TorusFunction {
    int n_time = 0;
    int dim = 0;
    int K = 0;
    Eigen::MatrixXcd samples;  // n_time x dim
    Eigen::MatrixXcd coeffs;   // (2K+1) x dim, row index k + K
    bool real_valued = false;

    std::complex<double> coeff(int k, int d) const { return coeffs(k + K, d); }
    Eigen::RowVectorXcd coeff_row(int k) const { return coeffs.row(k + K); }
    double sample_time(int j) const;
};

struct NormSpec {
    enum class Kind { bochner, sobolev_integer, sobolev_fractional };
    double p = 2.0;
    double m_or_theta = 0.0;
    Kind kind = Kind::bochner;
};

/// Fourier analysis of uniform samples; quadrature is the uniform-grid
/// Riemann sum of the defining integral with normalized Haar measure,
/// exact on bandlimited inputs. Real input yields exactly Hermitian
/// coefficients. Rejects empty sample arrays.
TorusFunction analyze(const Eigen::MatrixXcd& samples);

/// Builds a TorusFunction from coefficients (rows k = -K..K); samples are
/// synthesized on a uniform grid of n_time points (default 2K+1).
TorusFunction from_coeffs(const Eigen::MatrixXcd& coeffs, int n_time = 0);

/// Evaluates sum_k coeffs(k) e^{ikt} at an arbitrary time.
Eigen::VectorXcd synthesize(const TorusFunction& f, double t);

double norm(const TorusFunction& f, const NormSpec& spec);

/// Splits f into its time mean and the zero-mean oscillatory remainder.
std::pair<Eigen::VectorXcd, TorusFunction> split_stationary_oscillatory(const TorusFunction& f);

/// Spectral time derivative of the given order.
TorusFunction time_derivative(const TorusFunction& f, int order = 1);

/// Applies a scalar Fourier multiplier k -> m(k) to the coefficients.
TorusFunction apply_multiplier(const TorusFunction& f,
                               const std::function<std::complex<double>(int)>& symbol);

/// Applies an operator-valued multiplier k -> M(k); all M(k) must map
/// C^dim to a common output dimension.
TorusFunction apply_operator_multiplier(const TorusFunction& f,
                                        const std::function<Eigen::MatrixXcd(int)>& symbol);

/// CSV serialization, columns: k, component, re, im.
void write_torus_csv(std::ostream& os, const TorusFunction& f);

}  // namespace torusflow

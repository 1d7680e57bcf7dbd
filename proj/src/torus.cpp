#include "torusflow/torus.hpp"

#include "torusflow/fft.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace torusflow {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

Eigen::MatrixXcd synthesize_on_grid(const Eigen::MatrixXcd& coeffs, int K, int n_time) {
    const int dim = static_cast<int>(coeffs.cols());
    // Scatter modes into DFT bins (k mod n) and run one inverse transform
    // per column. Distinct modes may share a bin only if n_time < 2K+1,
    // which from_coeffs forbids.
    Eigen::MatrixXcd bins = Eigen::MatrixXcd::Zero(n_time, dim);
    for (int k = -K; k <= K; ++k) {
        const int bin = ((k % n_time) + n_time) % n_time;
        bins.row(bin) += coeffs.row(k + K);
    }
    std::vector<std::complex<double>> buf(bins.data(), bins.data() + bins.size());
    fft::dft_1d_batched(buf.data(), n_time, dim, fft::backward);
    return Eigen::Map<Eigen::MatrixXcd>(buf.data(), n_time, dim);
}

}  // namespace

double TorusFunction::sample_time(int j) const { return two_pi * double(j) / double(n_time); }

TorusFunction analyze(const Eigen::MatrixXcd& samples) {
    const int n = static_cast<int>(samples.rows());
    const int dim = static_cast<int>(samples.cols());
    if (n < 1 || dim < 1) throw std::invalid_argument("analyze: empty sample array");

    TorusFunction f;
    f.n_time = n;
    f.dim = dim;
    f.K = (n - 1) / 2;
    f.samples = samples;
    f.real_valued = (samples.imag().cwiseAbs().maxCoeff() == 0.0);

    std::vector<std::complex<double>> buf(samples.data(), samples.data() + samples.size());
    fft::dft_1d_batched(buf.data(), n, dim, fft::forward);
    Eigen::Map<Eigen::MatrixXcd> bins(buf.data(), n, dim);

    f.coeffs.resize(2 * f.K + 1, dim);
    for (int k = 0; k <= f.K; ++k) {
        f.coeffs.row(k + f.K) = bins.row(k) / double(n);
        if (k > 0) {
            if (f.real_valued)  // pin Hermitian symmetry exactly
                f.coeffs.row(-k + f.K) = f.coeffs.row(k + f.K).conjugate();
            else
                f.coeffs.row(-k + f.K) = bins.row(n - k) / double(n);
        }
    }
    return f;
}

TorusFunction from_coeffs(const Eigen::MatrixXcd& coeffs, int n_time) {
    const int rows = static_cast<int>(coeffs.rows());
    if (rows < 1 || rows % 2 == 0)
        throw std::invalid_argument("from_coeffs: coefficient rows must be odd (k = -K..K)");
    const int K = (rows - 1) / 2;
    if (n_time == 0) n_time = 2 * K + 1;
    if (n_time < 2 * K + 1)
        throw std::invalid_argument("from_coeffs: n_time too small for the stored band");

    TorusFunction f;
    f.n_time = n_time;
    f.dim = static_cast<int>(coeffs.cols());
    f.K = (n_time - 1) / 2;
    f.coeffs = Eigen::MatrixXcd::Zero(2 * f.K + 1, f.dim);
    f.coeffs.middleRows(f.K - K, rows) = coeffs;
    f.samples = synthesize_on_grid(f.coeffs, f.K, n_time);

    bool hermitian = coeffs.row(K).imag().cwiseAbs().maxCoeff() == 0.0;
    for (int k = 1; k <= K && hermitian; ++k)
        hermitian =
            (coeffs.row(K - k) - coeffs.row(K + k).conjugate()).cwiseAbs().maxCoeff() == 0.0;
    if (hermitian) {
        f.samples = f.samples.real().cast<std::complex<double>>();
        f.real_valued = true;
    }
    return f;
}

Eigen::VectorXcd synthesize(const TorusFunction& f, double t) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(f.dim);
    for (int k = -f.K; k <= f.K; ++k) {
        const std::complex<double> phase(std::cos(k * t), std::sin(k * t));
        out += phase * f.coeffs.row(k + f.K).transpose();
    }
    return out;
}

double norm(const TorusFunction& f, const NormSpec& spec) {
    if (spec.p <= 1.0) throw std::invalid_argument("norm: integrability exponent must exceed 1");
    if (spec.m_or_theta < 0.0) throw std::invalid_argument("norm: negative differentiation order");

    auto bochner = [&](const TorusFunction& g) {
        double acc = 0.0;
        for (int j = 0; j < g.n_time; ++j)
            acc += std::pow(g.samples.row(j).norm(), spec.p);
        return std::pow(acc / double(g.n_time), 1.0 / spec.p);
    };

    switch (spec.kind) {
        case NormSpec::Kind::bochner:
            return bochner(f);
        case NormSpec::Kind::sobolev_integer: {
            const int m = static_cast<int>(spec.m_or_theta);
            if (double(m) != spec.m_or_theta)
                throw std::invalid_argument("norm: sobolev_integer requires an integer order");
            double acc = 0.0;
            TorusFunction g = f;
            for (int ell = 0; ell <= m; ++ell) {
                acc += std::pow(bochner(g), spec.p);
                if (ell < m) g = time_derivative(g, 1);
            }
            return std::pow(acc, 1.0 / spec.p);
        }
        case NormSpec::Kind::sobolev_fractional: {
            TorusFunction g = apply_multiplier(f, [&](int k) {
                return std::complex<double>(std::pow(1.0 + std::abs(k), spec.m_or_theta), 0.0);
            });
            return bochner(g);
        }
    }
    throw std::logic_error("norm: unreachable");
}

std::pair<Eigen::VectorXcd, TorusFunction> split_stationary_oscillatory(const TorusFunction& f) {
    Eigen::VectorXcd mean = f.coeffs.row(f.K).transpose();
    Eigen::MatrixXcd osc = f.coeffs;
    osc.row(f.K).setZero();
    TorusFunction g = from_coeffs(osc, f.n_time);
    return {mean, g};
}

TorusFunction time_derivative(const TorusFunction& f, int order) {
    Eigen::MatrixXcd c = f.coeffs;
    for (int k = -f.K; k <= f.K; ++k) {
        std::complex<double> factor = std::pow(std::complex<double>(0.0, double(k)), order);
        c.row(k + f.K) *= factor;
    }
    return from_coeffs(c, f.n_time);
}

TorusFunction apply_multiplier(const TorusFunction& f,
                               const std::function<std::complex<double>(int)>& symbol) {
    Eigen::MatrixXcd c = f.coeffs;
    for (int k = -f.K; k <= f.K; ++k) c.row(k + f.K) *= symbol(k);
    return from_coeffs(c, f.n_time);
}

TorusFunction apply_operator_multiplier(const TorusFunction& f,
                                        const std::function<Eigen::MatrixXcd(int)>& symbol) {
    Eigen::MatrixXcd first = symbol(0);
    const int out_dim = static_cast<int>(first.rows());
    Eigen::MatrixXcd c(2 * f.K + 1, out_dim);
    for (int k = -f.K; k <= f.K; ++k) {
        Eigen::MatrixXcd M = (k == 0) ? first : symbol(k);
        c.row(k + f.K) = (M * f.coeffs.row(k + f.K).transpose()).transpose();
    }
    return from_coeffs(c, f.n_time);
}

void write_torus_csv(std::ostream& os, const TorusFunction& f) {
    os << "k,component,re,im\n";
    for (int k = -f.K; k <= f.K; ++k)
        for (int d = 0; d < f.dim; ++d) {
            const std::complex<double> c = f.coeff(k, d);
            os << k << ',' << d << ',' << c.real() << ',' << c.imag() << '\n';
        }
}

}  // namespace torusflow

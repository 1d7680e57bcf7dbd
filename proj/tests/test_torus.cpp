#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "torusflow/rng.hpp"
#include "torusflow/torus.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace torusflow;
using cd = std::complex<double>;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

Eigen::MatrixXcd random_band_coeffs(int K, int dim, std::uint64_t stream) {
    auto eng = rng::engine_for(11, stream);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd c(2 * K + 1, dim);
    for (int r = 0; r < c.rows(); ++r)
        for (int d = 0; d < dim; ++d) c(r, d) = cd(gauss(eng), gauss(eng));
    return c;
}

/// Direct quadrature of the analysis integral on a 10x-oversampled grid;
/// independent of the FFT path.
cd oversampled_quadrature_coeff(const TorusFunction& f, int k, int d) {
    const int n = 10 * f.n_time;
    cd acc = 0.0;
    for (int j = 0; j < n; ++j) {
        const double t = two_pi * j / n;
        acc += synthesize(f, t)(d) * std::exp(cd(0.0, -k * t));
    }
    return acc / double(n);
}

}  // namespace

TEST_CASE("analyze of a constant") {
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Constant(9, 1, cd(3.0, 0.0));
    TorusFunction f = analyze(s);
    CHECK(std::abs(f.coeff(0, 0) - cd(3.0, 0.0)) < 1e-14);
    for (int k = -f.K; k <= f.K; ++k)
        if (k != 0) CHECK(std::abs(f.coeff(k, 0)) < 1e-14);
}

TEST_CASE("analyze of a pure mode at 16 samples") {
    Eigen::MatrixXcd s(16, 1);
    for (int j = 0; j < 16; ++j) {
        const double t = two_pi * j / 16;
        s(j, 0) = std::exp(cd(0.0, t));
    }
    TorusFunction f = analyze(s);
    CHECK(f.K == 7);
    CHECK(std::abs(f.coeff(1, 0) - cd(1.0, 0.0)) < 1e-13);
    for (int k = -f.K; k <= f.K; ++k)
        if (k != 1) CHECK(std::abs(f.coeff(k, 0)) < 1e-13);
}

TEST_CASE("analyze rejects empty input") {
    Eigen::MatrixXcd s(0, 0);
    CHECK_THROWS_AS(analyze(s), std::invalid_argument);
}

TEST_CASE("roundtrip against the oversampled quadrature oracle") {
    const int K = 5, dim = 2;
    TorusFunction f = from_coeffs(random_band_coeffs(K, dim, 1));
    for (int k = -K; k <= K; ++k)
        for (int d = 0; d < dim; ++d)
            CHECK(std::abs(f.coeff(k, d) - oversampled_quadrature_coeff(f, k, d)) < 1e-12);
    // analyze(samples of f) must reproduce f
    TorusFunction g = analyze(f.samples);
    CHECK((g.coeffs - f.coeffs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("synthesize examples") {
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(3, 1);
    c(1, 0) = cd(2.5, -1.0);  // k = 0 row
    TorusFunction f = from_coeffs(c);
    for (double t : {0.0, 1.0, 4.0}) CHECK(std::abs(synthesize(f, t)(0) - cd(2.5, -1.0)) < 1e-14);

    Eigen::MatrixXcd c2 = Eigen::MatrixXcd::Zero(3, 1);
    c2(2, 0) = 1.0;  // k = +1
    TorusFunction g = from_coeffs(c2);
    CHECK(std::abs(synthesize(g, std::numbers::pi / 2)(0) - cd(0.0, 1.0)) < 1e-15);

    TorusFunction h = from_coeffs(random_band_coeffs(4, 3, 2));
    for (int j = 0; j < h.n_time; ++j) {
        const Eigen::VectorXcd v = synthesize(h, h.sample_time(j));
        CHECK((v - h.samples.row(j).transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("norm examples") {
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(3, 1);
    c(2, 0) = 1.0;  // e^{it}
    TorusFunction f = from_coeffs(c, 17);
    CHECK(norm(f, {2.0, 0.0, NormSpec::Kind::bochner}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm(f, {2.0, 1.0, NormSpec::Kind::sobolev_integer}) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    Eigen::MatrixXcd c2 = Eigen::MatrixXcd::Zero(5, 1);
    c2(4, 0) = 1.0;  // e^{2it}
    TorusFunction g = from_coeffs(c2, 17);
    CHECK(norm(g, {2.0, 0.5, NormSpec::Kind::sobolev_fractional}) ==
          doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));

    CHECK_THROWS_AS(norm(f, {1.0, 0.0, NormSpec::Kind::bochner}), std::invalid_argument);
    CHECK_THROWS_AS(norm(f, {2.0, 1.5, NormSpec::Kind::sobolev_integer}), std::invalid_argument);
}

TEST_CASE("stationary/oscillatory split") {
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(3, 1);
    c(1, 0) = 2.0;  // mean
    c(2, 0) = 1.0;  // e^{it}
    TorusFunction f = from_coeffs(c, 9);
    auto [mean, osc] = split_stationary_oscillatory(f);
    CHECK(std::abs(mean(0) - cd(2.0, 0.0)) < 1e-14);
    CHECK(std::abs(osc.coeff(0, 0)) < 1e-14);
    CHECK(norm(osc, {2.0, 0.0, NormSpec::Kind::bochner}) == doctest::Approx(1.0).epsilon(1e-12));

    // constant input: oscillatory part is identically zero
    Eigen::MatrixXcd cc = Eigen::MatrixXcd::Zero(1, 1);
    cc(0, 0) = 3.0;
    auto [m2, o2] = split_stationary_oscillatory(from_coeffs(cc, 7));
    CHECK(std::abs(m2(0) - cd(3.0, 0.0)) < 1e-15);
    CHECK(o2.coeffs.cwiseAbs().maxCoeff() < 1e-15);

    // projection pair: splitting the oscillatory part again changes nothing
    auto [m3, o3] = split_stationary_oscillatory(osc);
    CHECK(std::abs(m3(0)) < 1e-15);
    CHECK((o3.coeffs - osc.coeffs).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("Parseval and reality invariants on random inputs") {
    for (int trial = 0; trial < 50; ++trial) {
        const int K = 1 + trial % 7;
        const int dim = 1 + trial % 3;
        TorusFunction f = from_coeffs(random_band_coeffs(K, dim, 100 + trial));
        double grid = 0.0;
        for (int j = 0; j < f.n_time; ++j) grid += f.samples.row(j).squaredNorm();
        grid /= f.n_time;
        const double parseval = f.coeffs.squaredNorm();
        CHECK(std::abs(grid - parseval) < 1e-12 * parseval);
    }

    // exactly Hermitian coefficients from real samples
    auto eng = rng::engine_for(5, 0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd s(12, 2);
    for (int j = 0; j < 12; ++j)
        for (int d = 0; d < 2; ++d) s(j, d) = cd(gauss(eng), 0.0);
    TorusFunction f = analyze(s);
    CHECK(f.real_valued);
    for (int k = 1; k <= f.K; ++k)
        CHECK((f.coeff_row(-k) - f.coeff_row(k).conjugate()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sobolev norm is monotone in the order") {
    for (int trial = 0; trial < 10; ++trial) {
        TorusFunction f = from_coeffs(random_band_coeffs(4, 2, 200 + trial), 19);
        double prev = 0.0;
        for (int m = 0; m <= 3; ++m) {
            const double nm = norm(f, {2.0, double(m), NormSpec::Kind::sobolev_integer});
            CHECK(nm >= prev - 1e-12);
            prev = nm;
        }
    }
}

TEST_CASE("csv serialization carries every coefficient") {
    TorusFunction f = from_coeffs(random_band_coeffs(2, 2, 7));
    std::ostringstream os;
    write_torus_csv(os, f);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "k,component,re,im");
    int rows = 0;
    for (std::string line; std::getline(is, line);) ++rows;
    CHECK(rows == (2 * f.K + 1) * f.dim);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "torusflow/mode_split.hpp"
#include "torusflow/rng.hpp"

#include <cmath>

using namespace torusflow;
using cd = std::complex<double>;

namespace {

TorusFunction single_mode(int k, int K, const Eigen::VectorXcd& value, int n_time = 0) {
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(2 * K + 1, value.size());
    c.row(k + K) = value.transpose();
    return from_coeffs(c, n_time);
}

ModeSolver direct_solver(const Eigen::MatrixXcd& A, int k) {
    return [A, k](const Eigen::VectorXcd& f) {
        Eigen::MatrixXcd shifted = A;
        shifted.diagonal().array() += cd(0.0, double(k));
        return Eigen::VectorXcd(shifted.partialPivLu().solve(f));
    };
}

}  // namespace

TEST_CASE("cutoff profile plateaus and ramp") {
    CutoffProfile phi(2.0);
    CHECK(phi.k0 == 2);
    CHECK(phi.ramp_end == doctest::Approx(2.5));
    CHECK(phi.evaluate(2.0) == 0.0);
    CHECK(phi.evaluate(2.5) == 1.0);
    CHECK(phi.evaluate(-3.0) == 1.0);
    for (double s : {0.1, 1.3, 2.2, 2.45, 7.0}) CHECK(phi.evaluate(-s) == phi.evaluate(s));
    const double mid = phi.evaluate(2.0 + 0.1 * 0.5);
    CHECK(mid > 0.0);
    CHECK(mid < 1.0);

    CutoffProfile zero_gamma(0.0);
    for (int k = 1; k <= 8; ++k) CHECK(zero_gamma.evaluate(double(k)) == 1.0);
    CHECK_THROWS_AS(CutoffProfile(-1.0), std::invalid_argument);
}

TEST_CASE("scalar resolvent solve reproduces the analytic solution") {
    Eigen::MatrixXcd A(1, 1);
    A(0, 0) = 1.0;
    Eigen::VectorXcd one(1);
    one(0) = 1.0;
    TorusFunction F = single_mode(1, 4, one);

    ModeSplitConfig cfg;
    cfg.gamma0 = 0.0;
    cfg.K = 4;
    cfg.low_mode_solvers[0] = direct_solver(A, 0);
    PeriodicSolution sol = solve_periodic_closed(A, F, cfg);

    CHECK(std::abs(sol.u.coeff(1, 0) - cd(0.5, -0.5)) < 1e-12);  // 1/(1+i)
    CHECK(sol.max_mode_residual < 1e-12);
    CHECK(sol.truncation_tail == 0.0);
}

TEST_CASE("diagonal heat mode example") {
    DiagonalOperator A{Eigen::VectorXcd::Ones(1)};  // |xi|^2 = 1
    Eigen::VectorXcd one(1);
    one(0) = 1.0;
    TorusFunction F = single_mode(1, 3, one);
    ModeSplitConfig cfg;
    cfg.gamma0 = 0.0;
    cfg.K = 3;
    cfg.low_mode_solvers[0] = diagonal_pseudoinverse_solver(A.eigenvalues, 0);
    PeriodicSolution sol = solve_periodic_closed(A, F, cfg);
    CHECK(std::abs(sol.u.coeff(1, 0) - cd(0.5, -0.5)) < 1e-13);
}

TEST_CASE("singular stationary mode through the pseudoinverse") {
    DiagonalOperator A{Eigen::VectorXcd::Zero(2)};
    A.eigenvalues(1) = 2.0;  // eigenvalue 0 in the first slot
    Eigen::VectorXcd f0(2);
    f0 << 0.0, 1.0;  // mean-free on the singular direction
    TorusFunction F = single_mode(0, 2, f0);
    ModeSplitConfig cfg;
    cfg.gamma0 = 0.5;
    cfg.K = 2;
    cfg.low_mode_solvers[0] = diagonal_pseudoinverse_solver(A.eigenvalues, 0);
    PeriodicSolution sol = solve_periodic_closed(A, F, cfg);
    CHECK(sol.max_mode_residual < 1e-12);
    CHECK(std::abs(sol.u.coeff(0, 1) - cd(0.5, 0.0)) < 1e-13);
    CHECK(std::abs(sol.u.coeff(0, 0)) == 0.0);
}

TEST_CASE("zero forcing yields the zero solution") {
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(3, 3);
    TorusFunction F = from_coeffs(Eigen::MatrixXcd::Zero(9, 3));
    ModeSplitConfig cfg;
    cfg.gamma0 = 1.5;
    cfg.K = 4;
    for (int k = -1; k <= 1; ++k) cfg.low_mode_solvers[k] = direct_solver(A, k);
    PeriodicSolution sol = solve_periodic_closed(A, F, cfg);
    CHECK(sol.u.coeffs.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("splice keeps low and high modes spectrally disjoint") {
    auto eng = rng::engine_for(31, 0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int dim = 3, K = 6;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) A(i, j) += 0.2 * gauss(eng);

    Eigen::MatrixXcd Fc(2 * K + 1, dim);
    for (int r = 0; r < Fc.rows(); ++r)
        for (int d = 0; d < dim; ++d) Fc(r, d) = cd(gauss(eng), gauss(eng));
    TorusFunction F = from_coeffs(Fc);

    ModeSplitConfig cfg;
    cfg.gamma0 = 1.8;
    cfg.K = K;
    for (int k = -1; k <= 1; ++k) cfg.low_mode_solvers[k] = direct_solver(A, k);
    PeriodicSolution sol = solve_periodic_closed(A, F, cfg);

    CHECK(sol.max_mode_residual < 1e-9);
    for (int k = -1; k <= 1; ++k) {
        CHECK(sol.u_high.coeff_row(k).cwiseAbs().maxCoeff() == 0.0);
        CHECK(sol.u_low.count(k) == 1);
    }
    for (int k = -K; k <= K; ++k) {
        Eigen::RowVectorXcd expect = sol.u_high.coeff_row(k);
        if (std::abs(k) <= 1) expect += sol.u_low.at(k).transpose();
        CHECK((sol.u.coeff_row(k) - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK(sol.max_condition >= 1.0);
}

TEST_CASE("provider form matches the closed-operator form") {
    Eigen::MatrixXcd A = 2.0 * Eigen::MatrixXcd::Identity(2, 2);
    A(0, 1) = 0.5;
    auto eng = rng::engine_for(37, 0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd Fc(7, 2);
    for (int r = 0; r < 7; ++r)
        for (int d = 0; d < 2; ++d) Fc(r, d) = cd(gauss(eng), gauss(eng));
    TorusFunction F = from_coeffs(Fc);

    ModeSplitConfig cfg;
    cfg.gamma0 = 0.0;
    cfg.K = 3;
    cfg.low_mode_solvers[0] = direct_solver(A, 0);

    ResolventProvider provider;
    provider.solve = [&A](double sigma, const Eigen::VectorXcd& f) {
        Eigen::MatrixXcd shifted = A;
        shifted.diagonal().array() += cd(0.0, sigma);
        return Eigen::VectorXcd(shifted.partialPivLu().solve(f));
    };
    const PeriodicSolution a = solve_periodic_closed(A, F, cfg);
    const PeriodicSolution b = solve_periodic_with_provider(provider, F, cfg);
    CHECK((a.u.coeffs - b.u.coeffs).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("singular retained mode raises an error naming the mode") {
    DiagonalOperator A{Eigen::VectorXcd::Zero(1)};
    A.eigenvalues(0) = cd(0.0, -2.0);  // ik + a = 0 at k = 2
    Eigen::VectorXcd one(1);
    one(0) = 1.0;
    TorusFunction F = single_mode(2, 3, one);
    ModeSplitConfig cfg;
    cfg.gamma0 = 0.0;
    cfg.K = 3;
    cfg.low_mode_solvers[0] = diagonal_pseudoinverse_solver(A.eigenvalues, 0);
    CHECK_THROWS_WITH_AS(solve_periodic_closed(A, F, cfg),
                         doctest::Contains("k=2"), std::runtime_error);
}

TEST_CASE("missing low-mode solver is a configuration error") {
    ModeSplitConfig cfg;
    cfg.gamma0 = 1.0;
    cfg.K = 3;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("maximal regularity ratio") {
    Eigen::MatrixXcd A(1, 1);
    A(0, 0) = 1.0;
    Eigen::VectorXcd one(1);
    one(0) = 1.0;
    TorusFunction F = single_mode(1, 4, one);
    ModeSplitConfig cfg;
    cfg.gamma0 = 0.0;
    cfg.K = 4;
    cfg.low_mode_solvers[0] = direct_solver(A, 0);
    PeriodicSolution sol = solve_periodic_closed(A, F, cfg);
    const double ratio = maximal_regularity_ratio(sol.u, F, A, 2.0);
    CHECK(ratio == doctest::Approx(3.0 / std::sqrt(2.0)).epsilon(1e-12));

    TorusFunction zero = from_coeffs(Eigen::MatrixXcd::Zero(3, 1));
    CHECK_THROWS_AS(maximal_regularity_ratio(sol.u, zero, A, 2.0), std::invalid_argument);
}

TEST_CASE("gamma0 sweep leaves the solution unchanged") {
    auto eng = rng::engine_for(43, 0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd A = 2.0 * Eigen::MatrixXcd::Identity(2, 2);
    A(1, 0) = 0.3;
    Eigen::MatrixXcd Fc(9, 2);
    for (int r = 0; r < 9; ++r)
        for (int d = 0; d < 2; ++d) Fc(r, d) = cd(gauss(eng), gauss(eng));
    TorusFunction F = from_coeffs(Fc);

    Eigen::MatrixXcd reference;
    for (double gamma0 : {0.0, 0.5, 1.9, 2.5, 3.0}) {
        ModeSplitConfig cfg;
        cfg.gamma0 = gamma0;
        cfg.K = 4;
        for (int k = -cfg.k0(); k <= cfg.k0(); ++k) cfg.low_mode_solvers[k] = direct_solver(A, k);
        PeriodicSolution sol = solve_periodic_closed(A, F, cfg);
        CHECK(sol.max_mode_residual < 1e-9);
        if (reference.size() == 0)
            reference = sol.u.coeffs;
        else
            CHECK((sol.u.coeffs - reference).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("truncation tail reports the discarded forcing mass") {
    auto eng = rng::engine_for(41, 0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd Fc(17, 1);  // K_F = 8
    for (int r = 0; r < 17; ++r) Fc(r, 0) = cd(gauss(eng), gauss(eng));
    TorusFunction F = from_coeffs(Fc);

    Eigen::MatrixXcd A(1, 1);
    A(0, 0) = 1.0;
    ModeSplitConfig cfg;
    cfg.gamma0 = 0.0;
    cfg.K = 4;
    cfg.low_mode_solvers[0] = direct_solver(A, 0);
    PeriodicSolution sol = solve_periodic_closed(A, F, cfg);

    double expected = 0.0;
    for (int k = -8; k <= 8; ++k)
        if (std::abs(k) > 4) expected += std::norm(F.coeff(k, 0));
    CHECK(sol.truncation_tail == doctest::Approx(std::sqrt(expected)).epsilon(1e-12));
}

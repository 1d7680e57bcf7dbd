#include "torusflow/mode_split.hpp"

#include "torusflow/parallel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace torusflow {

namespace {

double smooth_step(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x);
    const double b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

}  // namespace

CutoffProfile::CutoffProfile(double gamma0_) : gamma0(gamma0_) {
    if (gamma0 < 0.0) throw std::invalid_argument("CutoffProfile: gamma0 must be nonnegative");
    k0 = static_cast<int>(std::floor(gamma0));
    ramp_end = 0.5 * (gamma0 + k0 + 1);
}

double CutoffProfile::evaluate(double sigma) const {
    const double s = std::abs(sigma);
    if (s <= gamma0) return 0.0;
    if (s >= ramp_end) return 1.0;
    return smooth_step((s - gamma0) / (ramp_end - gamma0));
}

double cutoff_eval(const CutoffProfile& profile, double sigma) { return profile.evaluate(sigma); }

int ModeSplitConfig::k0() const { return static_cast<int>(std::floor(gamma0)); }

void ModeSplitConfig::validate() const {
    if (gamma0 < 0.0) throw std::invalid_argument("ModeSplitConfig: gamma0 must be nonnegative");
    if (K < k0()) throw std::invalid_argument("ModeSplitConfig: truncation K below k0");
    for (int k = -k0(); k <= k0(); ++k)
        if (!low_mode_solvers.count(k))
            throw std::invalid_argument("ModeSplitConfig: missing low-mode solver for k=" +
                                        std::to_string(k));
}

Eigen::VectorXcd DenseOperator::resolvent_solve(double sigma, const Eigen::VectorXcd& f,
                                                double* rcond) const {
    Eigen::MatrixXcd shifted = A;
    shifted.diagonal().array() += std::complex<double>(0.0, sigma);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted);
    if (rcond) *rcond = lu.rcond();
    return lu.solve(f);
}

Eigen::VectorXcd DiagonalOperator::apply(const Eigen::VectorXcd& v) const {
    return eigenvalues.cwiseProduct(v);
}

Eigen::VectorXcd DiagonalOperator::resolvent_solve(double sigma, const Eigen::VectorXcd& f,
                                                   double* rcond) const {
    Eigen::VectorXcd shifted = eigenvalues;
    shifted.array() += std::complex<double>(0.0, sigma);
    const double lo = shifted.cwiseAbs().minCoeff();
    const double hi = shifted.cwiseAbs().maxCoeff();
    if (rcond) *rcond = hi > 0.0 ? lo / hi : 0.0;
    if (lo == 0.0) throw std::runtime_error("DiagonalOperator: singular resolvent shift");
    return f.cwiseQuotient(shifted);
}

namespace {

template <class Op>
PeriodicSolution solve_impl(const Op& A, const TorusFunction& F, const ModeSplitConfig& config,
                            bool have_operator,
                            const std::function<Eigen::VectorXcd(double, const Eigen::VectorXcd&)>&
                                high_solve) {
    config.validate();
    const int k0 = config.k0();
    const int K = config.K;
    const CutoffProfile cutoff(config.gamma0);

    const int K_keep = std::min(K, F.K);
    PeriodicSolution sol;

    double tail2 = 0.0;
    for (int k = -F.K; k <= F.K; ++k)
        if (std::abs(k) > K) tail2 += F.coeff_row(k).squaredNorm();
    sol.truncation_tail = std::sqrt(tail2);

    Eigen::MatrixXcd u_coeffs = Eigen::MatrixXcd::Zero(2 * K_keep + 1, F.dim);
    Eigen::MatrixXcd high_coeffs = Eigen::MatrixXcd::Zero(2 * K_keep + 1, F.dim);

    // low modes first (bespoke solvers; typically cheap and few)
    for (int k = -k0; k <= k0; ++k) {
        if (std::abs(k) > K_keep) continue;
        const Eigen::VectorXcd Fk = F.coeff_row(k).transpose();
        sol.u_low[k] = config.low_mode_solvers.at(k)(Fk);
        u_coeffs.row(k + K_keep) = sol.u_low[k].transpose();
    }

    ParallelErrorGuard guard;
#pragma omp parallel for schedule(static)
    for (int idx = 0; idx < 2 * K_keep + 1; ++idx) {
        guard.protect([&] {
            const int k = idx - K_keep;
            if (std::abs(k) <= k0) return;
            Eigen::VectorXcd uk = high_solve(double(k), F.coeff_row(k).transpose());
            uk *= cutoff.evaluate(double(k));
            high_coeffs.row(idx) = uk.transpose();
        });
    }
    guard.rethrow();
    u_coeffs += high_coeffs;

    if (have_operator) {
        std::vector<double> residuals(2 * K_keep + 1, 0.0);
        for (int idx = 0; idx < 2 * K_keep + 1; ++idx) {
            const int k = idx - K_keep;
            const Eigen::VectorXcd Fk = F.coeff_row(k).transpose();
            const Eigen::VectorXcd uk = u_coeffs.row(idx).transpose();
            const double fn = Fk.norm();
            if (fn == 0.0) continue;
            Eigen::VectorXcd resid =
                std::complex<double>(0.0, double(k)) * uk + A.apply(uk) - Fk;
            residuals[idx] = resid.norm() / fn;
        }
        for (double r : residuals) sol.max_mode_residual = std::max(sol.max_mode_residual, r);
    }

    sol.u = from_coeffs(u_coeffs, F.n_time);
    sol.u_high = from_coeffs(high_coeffs, F.n_time);
    return sol;
}

template <class Op>
PeriodicSolution solve_with_operator(const Op& A, const TorusFunction& F,
                                     const ModeSplitConfig& config) {
    // capture the worst condition number seen across high-mode solves
    double max_cond = 0.0;
    auto high_solve = [&](double sigma, const Eigen::VectorXcd& f) {
        double rc = 0.0;
        Eigen::VectorXcd w;
        bool solved = false;
        try {
            w = A.resolvent_solve(sigma, f, &rc);
            solved = rc > 0.0 && w.allFinite();
        } catch (const std::exception&) {
            solved = false;
        }
        if (!solved)
            throw std::runtime_error("solve_periodic_closed: singular resolvent at mode k=" +
                                     std::to_string(static_cast<int>(sigma)));
#pragma omp critical(torusflow_mode_cond)
        max_cond = std::max(max_cond, 1.0 / rc);
        return w;
    };
    PeriodicSolution sol = solve_impl(A, F, config, true, high_solve);
    sol.max_condition = max_cond;
    return sol;
}

struct NullOperator {
    Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const { return v; }
};

double ratio_impl(const TorusFunction& u, const TorusFunction& F,
                  const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& apply_A,
                  double p) {
    NormSpec spec{p, 0.0, NormSpec::Kind::bochner};
    const double fn = norm(F, spec);
    if (fn <= 0.0) throw std::invalid_argument("maximal_regularity_ratio: zero forcing");

    TorusFunction du = time_derivative(u, 1);
    Eigen::MatrixXcd Au_coeffs(u.coeffs.rows(), u.coeffs.cols());
    for (int r = 0; r < u.coeffs.rows(); ++r)
        Au_coeffs.row(r) = apply_A(u.coeffs.row(r).transpose()).transpose();
    TorusFunction Au = from_coeffs(Au_coeffs, u.n_time);

    return (norm(du, spec) + norm(Au, spec) + norm(u, spec)) / fn;
}

}  // namespace

PeriodicSolution solve_periodic_closed(const DenseOperator& A, const TorusFunction& F,
                                       const ModeSplitConfig& config) {
    return solve_with_operator(A, F, config);
}

PeriodicSolution solve_periodic_closed(const DiagonalOperator& A, const TorusFunction& F,
                                       const ModeSplitConfig& config) {
    return solve_with_operator(A, F, config);
}

PeriodicSolution solve_periodic_closed(const Eigen::MatrixXcd& A, const TorusFunction& F,
                                       const ModeSplitConfig& config) {
    return solve_with_operator(DenseOperator{A}, F, config);
}

PeriodicSolution solve_periodic_with_provider(const ResolventProvider& provider,
                                              const TorusFunction& F,
                                              const ModeSplitConfig& config) {
    if (provider.valid_region == ResolventProvider::ValidRegion::abs_sigma_ge_gamma0 &&
        config.gamma0 < provider.gamma0)
        throw std::invalid_argument("solve_periodic_with_provider: config gamma0 below provider validity");
    auto high_solve = [&](double sigma, const Eigen::VectorXcd& f) { return provider.solve(sigma, f); };
    return solve_impl(NullOperator{}, F, config, false, high_solve);
}

double maximal_regularity_ratio(const TorusFunction& u, const TorusFunction& F,
                                const DenseOperator& A, double p) {
    return ratio_impl(u, F, [&](const Eigen::VectorXcd& v) { return A.apply(v); }, p);
}

double maximal_regularity_ratio(const TorusFunction& u, const TorusFunction& F,
                                const DiagonalOperator& A, double p) {
    return ratio_impl(u, F, [&](const Eigen::VectorXcd& v) { return A.apply(v); }, p);
}

double maximal_regularity_ratio(const TorusFunction& u, const TorusFunction& F,
                                const Eigen::MatrixXcd& A, double p) {
    return ratio_impl(u, F, [&](const Eigen::VectorXcd& v) { return A * v; }, p);
}

Eigen::VectorXcd box_laplacian_eigenvalues(int N) {
    Eigen::VectorXcd evals(N * N * N);
    auto freq = [N](int i) { return i <= N / 2 ? i : i - N; };
    int idx = 0;
    for (int i0 = 0; i0 < N; ++i0)
        for (int i1 = 0; i1 < N; ++i1)
            for (int i2 = 0; i2 < N; ++i2) {
                const double f0 = freq(i0), f1 = freq(i1), f2 = freq(i2);
                evals(idx++) = f0 * f0 + f1 * f1 + f2 * f2;
            }
    return evals;
}

ModeSolver diagonal_pseudoinverse_solver(const Eigen::VectorXcd& eigenvalues, int k,
                                         double null_threshold) {
    return [eigenvalues, k, null_threshold](const Eigen::VectorXcd& f) {
        Eigen::VectorXcd out(f.size());
        for (int i = 0; i < f.size(); ++i) {
            const std::complex<double> d = std::complex<double>(0.0, double(k)) + eigenvalues(i);
            out(i) = std::abs(d) <= null_threshold ? std::complex<double>(0.0, 0.0) : f(i) / d;
        }
        return out;
    };
}

}  // namespace torusflow

#pragma once

#include "torusflow/torus.hpp"

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <vector>

namespace torusflow {

/// Smooth cutoff that vanishes for |sigma| <= gamma0 and equals 1 for
/// |sigma| >= (gamma0 + k0 + 1)/2, with an exp-based C^inf ramp between.
struct CutoffProfile {
    double gamma0 = 0.0;
    int k0 = 0;
    double ramp_end = 0.5;

    explicit CutoffProfile(double gamma0_);
    double evaluate(double sigma) const;
};

double cutoff_eval(const CutoffProfile& profile, double sigma);

/// Solution operator for the resolvent problem i*sigma*w + A*w = f.
struct ResolventProvider {
    enum class ValidRegion { all_sigma, abs_sigma_ge_gamma0 };
    std::function<Eigen::VectorXcd(double, const Eigen::VectorXcd&)> solve;
    ValidRegion valid_region = ValidRegion::all_sigma;
    double gamma0 = 0.0;
};

using ModeSolver = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;

struct ModeSplitConfig {
    double gamma0 = 0.0;
    int K = 0;  // truncation level
    std::map<int, ModeSolver> low_mode_solvers;

    int k0() const;
    void validate() const;
};

struct DenseOperator {
    Eigen::MatrixXcd A;

    int dim() const { return static_cast<int>(A.rows()); }
    Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const { return A * v; }
    /// Solves (i sigma I + A) w = f; fills the reciprocal condition
    /// estimate of the shifted matrix when requested.
    Eigen::VectorXcd resolvent_solve(double sigma, const Eigen::VectorXcd& f,
                                     double* rcond = nullptr) const;
};

/// Operator given by its eigenvalues in a fixed basis, e.g. the periodic
/// box Laplacian in Fourier order.
struct DiagonalOperator {
    Eigen::VectorXcd eigenvalues;

    int dim() const { return static_cast<int>(eigenvalues.size()); }
    Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;
    Eigen::VectorXcd resolvent_solve(double sigma, const Eigen::VectorXcd& f,
                                     double* rcond = nullptr) const;
};

struct PeriodicSolution {
    TorusFunction u;
    TorusFunction u_high;
    std::map<int, Eigen::VectorXcd> u_low;
    double truncation_tail = 0.0;  // l2 mass of discarded forcing modes |k| > K
    double max_condition = 0.0;    // worst shifted-matrix condition over high modes
    double max_mode_residual = 0.0;
};

/// Solves du/dt + A u = F on the torus mode by mode: bespoke solvers for
/// |k| <= k0, the cutoff resolvent path for k0 < |k| <= K. The assembled
/// solution carries per-mode residuals of i k u_k + A u_k = F_k.
PeriodicSolution solve_periodic_closed(const DenseOperator& A, const TorusFunction& F,
                                       const ModeSplitConfig& config);
PeriodicSolution solve_periodic_closed(const DiagonalOperator& A, const TorusFunction& F,
                                       const ModeSplitConfig& config);
PeriodicSolution solve_periodic_closed(const Eigen::MatrixXcd& A, const TorusFunction& F,
                                       const ModeSplitConfig& config);

/// Variant in the abstract form: high modes go through the supplied
/// resolvent provider instead of a closed operator. No residuals are
/// computed since A is not available.
PeriodicSolution solve_periodic_with_provider(const ResolventProvider& provider,
                                              const TorusFunction& F,
                                              const ModeSplitConfig& config);

/// (||du/dt||_p + ||A u||_p + ||u||_p) / ||F||_p with the derivative
/// applied spectrally. Rejects zero forcing.
double maximal_regularity_ratio(const TorusFunction& u, const TorusFunction& F,
                                const DenseOperator& A, double p);
double maximal_regularity_ratio(const TorusFunction& u, const TorusFunction& F,
                                const DiagonalOperator& A, double p);
double maximal_regularity_ratio(const TorusFunction& u, const TorusFunction& F,
                                const Eigen::MatrixXcd& A, double p);

/// |xi|^2 eigenvalues of the negative Laplacian on the periodic box, in
/// FFT frequency order over an N^3 grid.
Eigen::VectorXcd box_laplacian_eigenvalues(int N);

/// Least-squares pseudoinverse solver for a singular diagonal mode:
/// components with |i k + a_i| below the threshold are dropped (the
/// admissible-subspace restriction).
ModeSolver diagonal_pseudoinverse_solver(const Eigen::VectorXcd& eigenvalues, int k,
                                         double null_threshold = 1e-12);

}  // namespace torusflow

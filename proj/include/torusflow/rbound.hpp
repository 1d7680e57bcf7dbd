#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace torusflow {

/// A finite indexed family of dense operators of identical shape.
struct OperatorFamily {
    std::vector<Eigen::MatrixXcd> ops;
    std::string label;

    int n_ops() const { return static_cast<int>(ops.size()); }
    int rows() const { return static_cast<int>(ops.front().rows()); }
    int cols() const { return static_cast<int>(ops.front().cols()); }
    void validate() const;
};

struct RboundEstimate {
    double value = 0.0;
    int n_trials = 0;
    int n_max = 0;
    double p_exponent = 2.0;
    double stderr_ = 0.0;
    std::uint64_t seed = 0;
};

/// Symbol probe for multiplier-norm estimation. symbol_eval must be
/// defined on the real line; its restriction to the integers is used for
/// torus probes. derivative_eval (M') is optional; central differences
/// with step 1e-5 * (1 + |t|) are used when it is absent.
struct MultiplierProbe {
    std::function<Eigen::MatrixXcd(double)> symbol_eval;
    std::function<Eigen::MatrixXcd(double)> derivative_eval;
    int band_limit = 8;

    Eigen::MatrixXcd derivative(double t) const;
};

/// Randomized estimate of the Rademacher R-bound of the family: the
/// maximum sampled ratio of the two Rademacher-average norms over sum
/// lengths n <= n_max, random selections from the family, and random
/// unit test vectors. Sign averages are enumerated exactly when
/// 2^n <= 1024 and Monte-Carlo sampled otherwise. Deterministic under a
/// fixed seed, also across thread counts.
RboundEstimate estimate_rbound(const OperatorFamily& fam, int n_trials, int n_max, double p,
                               std::uint64_t seed);

/// Same estimator with test vectors drawn from a fixed finite probe set
/// instead of the Gaussian sphere, for estimate-vs-oracle comparisons.
RboundEstimate estimate_rbound_on_probes(const OperatorFamily& fam, int n_trials, int n_max,
                                         double p, std::uint64_t seed,
                                         const std::vector<Eigen::VectorXcd>& probe_set);

/// Exact maximum of the defining ratio over all sign patterns, all
/// length-n selections from the family, and all test-vector tuples from
/// the given finite set. Guarded to n <= 8 and |fam| <= 4.
double brute_force_rbound(const OperatorFamily& fam, int n,
                          const std::vector<Eigen::VectorXcd>& test_vectors, double p);

/// Lower-bound estimate of the L_p(T)->L_p(T) norm of op_T[m] by probing
/// with bandlimited functions (random plus one pure mode per frequency).
double estimate_multiplier_norm_torus(const MultiplierProbe& probe, double p,
                                      int n_probe_functions, std::uint64_t seed);

struct TransferenceReport {
    double torus_norm = 0.0;
    double line_norm = 0.0;
    double tolerance = 0.0;
    bool satisfied = false;
};

/// Estimates both sides of the transference inequality: the torus norm
/// by integer-mode probing, the line norm by compactly supported probes
/// on a periodic window of length 64*pi (support <= window/8).
TransferenceReport check_transference(const MultiplierProbe& probe, double p,
                                      std::uint64_t seed);

struct MikhlinReport {
    RboundEstimate r0_M;
    RboundEstimate r0_tMprime;
    bool grew_with_radius = false;  // R-bound over the full grid exceeds 1.5x the half-radius value
};

/// R-bound estimates for the two families {M(t)} and {t M'(t)} sampled on
/// sigma_grid, the empirical surrogate of the Mikhlin condition.
MikhlinReport mikhlin_surrogate(const MultiplierProbe& probe, const std::vector<double>& sigma_grid,
                                int n_trials, int n_max, double p, std::uint64_t seed);

}  // namespace torusflow

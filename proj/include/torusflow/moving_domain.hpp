#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace torusflow {

using Vec3d = Eigen::Vector3d;
using Mat3d = Eigen::Matrix3d;

/// A 2pi-time-periodic domain motion phi(y, t) with phi(y, 0) = 0.
/// Analytic derivative callables are optional; central differences with
/// step 1e-5 * (1 + scale) are used where they are absent.
struct MotionField {
    std::function<Vec3d(const Vec3d&, double)> phi;
    std::function<Mat3d(const Vec3d&, double)> grad_phi;  // optional, d phi_i / d y_j
    std::function<Vec3d(const Vec3d&, double)> dphi_dt;   // optional
    std::string name = "custom";

    Mat3d gradient(const Vec3d& y, double t) const;
    Vec3d time_derivative(const Vec3d& y, double t) const;
};

MotionField motion_none();
MotionField motion_translation(double eps, const Vec3d& direction);
MotionField motion_shear(double eps);
MotionField motion_breathing(double eps);
MotionField motion_by_name(const std::string& name, double eps);

/// Periodic reference grid over [0, 2pi)^3 with n nodes per axis and n_t
/// uniform time samples.
struct MovingGrid {
    int n = 8;
    int n_t = 8;

    double h() const;
    int n_nodes() const { return n * n * n; }
    Vec3d node(int m) const;
    double time(int it) const;
    int wrap_index(int i0, int i1, int i2) const;
};

/// Coefficient fields of the inverse transform on the grid.
struct TransformCoefficients {
    MovingGrid grid;
    std::vector<Vec3d> a0;    // [it][m], time-derivative coefficients a_{l0}
    std::vector<Mat3d> A;     // a_{lj} matrices
    std::vector<double> J;    // Jacobian determinants, J = 1 + J0
    std::vector<Mat3d> Bm1;   // (I + J0 I + A^T J)^{-1} - I
    double norm_phi = 0.0;    // discrete L_inf(T, H^3_inf) norm of phi
    double norm_dtphi = 0.0;  // discrete L_inf(T, H^1_inf) norm of dphi/dt

    std::size_t index(int it, int m) const {
        return static_cast<std::size_t>(it) * grid.n_nodes() + m;
    }
};

/// Inverse of x = y + phi(y, t) by fixed-point iteration from y0 = x.
/// Throws on a detected smallness violation (non-contraction).
Vec3d invert_map(const MotionField& motion, const Vec3d& x, double t);

/// Matrix of the divergence transform, w_l = v_l + J0 v_l + sum_j a_{lj} J v_j,
/// i.e. J (I + A) componentwise; its inverse is I + B_{-1}.
Mat3d w_transform_matrix(double J, const Mat3d& A);

TransformCoefficients compute_coefficients(const MotionField& motion, const MovingGrid& grid);

/// Max-norm discrepancy of J div_x u = div_y w over the grid, where u is
/// the push-forward of the velocity v (sampled on the grid) and
/// w = (I + J0 I + A^T J) v. Both sides use second-order central
/// differences.
double check_divergence_identity(const TransformCoefficients& coeffs,
                                 const std::function<Vec3d(const Vec3d&)>& v);

/// Time-periodic field on the reference grid: [it][m][c] real values;
/// time derivatives are spectral, space derivatives finite-difference.
struct GridField {
    int n = 0;
    int n_t = 0;
    int components = 1;
    std::vector<double> values;

    static GridField zero(const MovingGrid& grid, int components);
    static GridField sample(const MovingGrid& grid,
                            const std::function<Eigen::VectorXd(const Vec3d&, double)>& fn,
                            int components);
    double& at(int it, int m, int c) {
        return values[(static_cast<std::size_t>(it) * (n * n * n) + m) * components + c];
    }
    double at(int it, int m, int c) const {
        return values[(static_cast<std::size_t>(it) * (n * n * n) + m) * components + c];
    }
    double max_abs() const;
};

/// All six coefficient summands of the transformed linear correction
/// term, including -A grad q. Vanishes identically when phi = 0.
GridField assemble_L(const TransformCoefficients& coeffs, const GridField& w, const GridField& q);

/// ((I + B_{-1}) w) . (I + A) grad ((I + B_{-1}) w); reduces to w . grad w
/// when phi = 0.
GridField assemble_N(const TransformCoefficients& coeffs, const GridField& w);

struct SmallnessReport {
    double norm_phi = 0.0;
    double norm_dtphi = 0.0;
    bool satisfied = false;
    std::map<std::string, double> coefficient_norms;  // measured bounds and /eps0 ratios
};

SmallnessReport smallness_report(const MotionField& motion, const MovingGrid& grid,
                                 double epsilon0);

}  // namespace torusflow

#include "torusflow/moving_domain.hpp"

#include "torusflow/fft.hpp"
#include "torusflow/parallel.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace torusflow {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double sup_abs(const Vec3d& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

Mat3d MotionField::gradient(const Vec3d& y, double t) const {
    if (grad_phi) return grad_phi(y, t);
    const double h = 1e-5 * (1.0 + sup_abs(y));
    Mat3d g;
    for (int j = 0; j < 3; ++j) {
        Vec3d yp = y, ym = y;
        yp(j) += h;
        ym(j) -= h;
        g.col(j) = (phi(yp, t) - phi(ym, t)) / (2.0 * h);
    }
    return g;
}

Vec3d MotionField::time_derivative(const Vec3d& y, double t) const {
    if (dphi_dt) return dphi_dt(y, t);
    const double h = 1e-5;
    return (phi(y, t + h) - phi(y, t - h)) / (2.0 * h);
}

MotionField motion_none() {
    MotionField m;
    m.name = "none";
    m.phi = [](const Vec3d&, double) { return Vec3d::Zero().eval(); };
    m.grad_phi = [](const Vec3d&, double) { return Mat3d::Zero().eval(); };
    m.dphi_dt = [](const Vec3d&, double) { return Vec3d::Zero().eval(); };
    return m;
}

MotionField motion_translation(double eps, const Vec3d& direction) {
    MotionField m;
    m.name = "translation";
    m.phi = [eps, direction](const Vec3d&, double t) { return (eps * std::sin(t) * direction).eval(); };
    m.grad_phi = [](const Vec3d&, double) { return Mat3d::Zero().eval(); };
    m.dphi_dt = [eps, direction](const Vec3d&, double t) {
        return (eps * std::cos(t) * direction).eval();
    };
    return m;
}

MotionField motion_shear(double eps) {
    MotionField m;
    m.name = "shear";
    m.phi = [eps](const Vec3d& y, double t) { return Vec3d(eps * std::sin(t) * y(1), 0.0, 0.0); };
    m.grad_phi = [eps](const Vec3d&, double t) {
        Mat3d g = Mat3d::Zero();
        g(0, 1) = eps * std::sin(t);
        return g;
    };
    m.dphi_dt = [eps](const Vec3d& y, double t) {
        return Vec3d(eps * std::cos(t) * y(1), 0.0, 0.0);
    };
    return m;
}

MotionField motion_breathing(double eps) {
    // in-phase dilation along the diagonal; couples all coordinates, so
    // the transform coefficients are genuinely y-dependent
    MotionField m;
    m.name = "breathing";
    m.phi = [eps](const Vec3d& y, double t) {
        const double s = eps * std::sin(t) * std::sin(y(0) + y(1) + y(2));
        return Vec3d(s, s, s);
    };
    m.grad_phi = [eps](const Vec3d& y, double t) {
        const double c = eps * std::sin(t) * std::cos(y(0) + y(1) + y(2));
        return (c * Mat3d::Ones()).eval();
    };
    m.dphi_dt = [eps](const Vec3d& y, double t) {
        const double s = eps * std::cos(t) * std::sin(y(0) + y(1) + y(2));
        return Vec3d(s, s, s);
    };
    return m;
}

MotionField motion_by_name(const std::string& name, double eps) {
    if (name == "none") return motion_none();
    if (name == "translation") return motion_translation(eps, Vec3d(1.0, 0.0, 0.0));
    if (name == "shear") return motion_shear(eps);
    if (name == "breathing") return motion_breathing(eps);
    throw std::invalid_argument("motion_by_name: unknown motion '" + name + "'");
}

double MovingGrid::h() const { return two_pi / n; }
Vec3d MovingGrid::node(int m) const {
    const int i0 = m / (n * n), i1 = (m / n) % n, i2 = m % n;
    return Vec3d(i0 * h(), i1 * h(), i2 * h());
}
double MovingGrid::time(int it) const { return two_pi * it / n_t; }
int MovingGrid::wrap_index(int i0, int i1, int i2) const {
    const auto w = [this](int i) { return ((i % n) + n) % n; };
    return (w(i0) * n + w(i1)) * n + w(i2);
}

Vec3d invert_map(const MotionField& motion, const Vec3d& x, double t) {
    if (motion.gradient(x, t).norm() >= 1.0)
        throw std::runtime_error("invert_map: smallness violation, |grad phi| >= 1");
    Vec3d y = x;
    double prev = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 500; ++iter) {
        const Vec3d y_next = x - motion.phi(y, t);
        const double step = (y_next - y).norm();
        y = y_next;
        if (step < 1e-14) return y;
        if (step > 2.0 * prev + 1e-14 || !std::isfinite(step))
            throw std::runtime_error("invert_map: fixed-point iteration diverged (smallness violation)");
        prev = step;
    }
    if ((x - y - motion.phi(y, t)).norm() > 1e-11)
        throw std::runtime_error("invert_map: no convergence to tolerance");
    return y;
}

Mat3d w_transform_matrix(double J, const Mat3d& A) {
    return Mat3d::Identity() + (J - 1.0) * Mat3d::Identity() + A * J;
}

namespace {

Vec3d psi_of(const MotionField& motion, const Vec3d& x, double t) {
    return invert_map(motion, x, t) - x;
}

/// Recursive central difference of phi with respect to y for a mixed
/// multi-index; order = remaining derivatives per axis.
Vec3d phi_mixed_partial(const MotionField& motion, const Vec3d& y, double t,
                        std::array<int, 3> order, double h) {
    for (int axis = 0; axis < 3; ++axis) {
        if (order[axis] > 0) {
            auto lower = order;
            --lower[axis];
            Vec3d yp = y, ym = y;
            yp(axis) += h;
            ym(axis) -= h;
            return (phi_mixed_partial(motion, yp, t, lower, h) -
                    phi_mixed_partial(motion, ym, t, lower, h)) /
                   (2.0 * h);
        }
    }
    return motion.phi(y, t);
}

Vec3d dtphi_mixed_partial(const MotionField& motion, const Vec3d& y, double t,
                          std::array<int, 3> order, double h) {
    for (int axis = 0; axis < 3; ++axis) {
        if (order[axis] > 0) {
            auto lower = order;
            --lower[axis];
            Vec3d yp = y, ym = y;
            yp(axis) += h;
            ym(axis) -= h;
            return (dtphi_mixed_partial(motion, yp, t, lower, h) -
                    dtphi_mixed_partial(motion, ym, t, lower, h)) /
                   (2.0 * h);
        }
    }
    return motion.time_derivative(y, t);
}

std::vector<std::array<int, 3>> multi_indices_up_to(int max_order) {
    std::vector<std::array<int, 3>> out;
    for (int a = 0; a <= max_order; ++a)
        for (int b = 0; a + b <= max_order; ++b)
            for (int c = 0; a + b + c <= max_order; ++c) out.push_back({a, b, c});
    return out;
}

}  // namespace

TransformCoefficients compute_coefficients(const MotionField& motion, const MovingGrid& grid) {
    TransformCoefficients tc;
    tc.grid = grid;
    const int NT = grid.n_t, NM = grid.n_nodes();
    tc.a0.resize(static_cast<std::size_t>(NT) * NM);
    tc.A.resize(static_cast<std::size_t>(NT) * NM);
    tc.J.resize(static_cast<std::size_t>(NT) * NM);
    tc.Bm1.resize(static_cast<std::size_t>(NT) * NM);

    ParallelErrorGuard guard;
#pragma omp parallel for schedule(static)
    for (int it = 0; it < NT; ++it) {
        guard.protect([&] {
            const double t = grid.time(it);
            for (int m = 0; m < NM; ++m) {
                const Vec3d y = grid.node(m);
                const Vec3d x = y + motion.phi(y, t);
                const double hs = 1e-5 * (1.0 + sup_abs(x));
                const double ht = 1e-5;

                Mat3d A;
                for (int j = 0; j < 3; ++j) {
                    Vec3d xp = x, xm = x;
                    xp(j) += hs;
                    xm(j) -= hs;
                    A.col(j) = (psi_of(motion, xp, t) - psi_of(motion, xm, t)) / (2.0 * hs);
                }
                const Vec3d a0 =
                    (psi_of(motion, x, t + ht) - psi_of(motion, x, t - ht)) / (2.0 * ht);
                const double J = (Mat3d::Identity() + motion.gradient(y, t)).determinant();

                const Mat3d M = w_transform_matrix(J, A);
                if (std::abs(M.determinant()) < 1e-12)
                    throw std::runtime_error(
                        "compute_coefficients: singular divergence-transform matrix");

                const std::size_t idx = tc.index(it, m);
                tc.A[idx] = A;
                tc.a0[idx] = a0;
                tc.J[idx] = J;
                tc.Bm1[idx] = M.inverse() - Mat3d::Identity();
            }
        });
    }
    guard.rethrow();

    // discrete versions of the two smallness norms
    const double hd = 1e-2;
    const auto idx3 = multi_indices_up_to(3);
    const auto idx1 = multi_indices_up_to(1);
    std::vector<double> phi_max(NT, 0.0), dtphi_max(NT, 0.0);
#pragma omp parallel for schedule(static)
    for (int it = 0; it < NT; ++it) {
        const double t = grid.time(it);
        for (int m = 0; m < NM; ++m) {
            const Vec3d y = grid.node(m);
            for (const auto& alpha : idx3)
                phi_max[it] =
                    std::max(phi_max[it], sup_abs(phi_mixed_partial(motion, y, t, alpha, hd)));
            for (const auto& alpha : idx1)
                dtphi_max[it] =
                    std::max(dtphi_max[it], sup_abs(dtphi_mixed_partial(motion, y, t, alpha, hd)));
        }
    }
    for (int it = 0; it < NT; ++it) {
        tc.norm_phi = std::max(tc.norm_phi, phi_max[it]);
        tc.norm_dtphi = std::max(tc.norm_dtphi, dtphi_max[it]);
    }
    return tc;
}

double check_divergence_identity(const TransformCoefficients& coeffs,
                                 const std::function<Vec3d(const Vec3d&)>& v) {
    const MovingGrid& grid = coeffs.grid;
    const int n = grid.n, NM = grid.n_nodes();
    const double h = grid.h();

    std::vector<Vec3d> vg(NM);
    for (int m = 0; m < NM; ++m) vg[m] = v(grid.node(m));

    double worst = 0.0;
    std::vector<double> worst_t(grid.n_t, 0.0);
#pragma omp parallel for schedule(static)
    for (int it = 0; it < grid.n_t; ++it) {
        std::vector<Vec3d> wg(NM);
        for (int m = 0; m < NM; ++m) {
            const std::size_t idx = coeffs.index(it, m);
            wg[m] = w_transform_matrix(coeffs.J[idx], coeffs.A[idx]) * vg[m];
        }
        for (int i0 = 0; i0 < n; ++i0)
            for (int i1 = 0; i1 < n; ++i1)
                for (int i2 = 0; i2 < n; ++i2) {
                    const int m = grid.wrap_index(i0, i1, i2);
                    const std::size_t idx = coeffs.index(it, m);
                    Mat3d dv;  // dv(l, j) = d v_j / d y_l
                    double div_w = 0.0, div_v = 0.0;
                    for (int l = 0; l < 3; ++l) {
                        const int ip[3] = {i0 + (l == 0), i1 + (l == 1), i2 + (l == 2)};
                        const int im[3] = {i0 - (l == 0), i1 - (l == 1), i2 - (l == 2)};
                        const int mp = grid.wrap_index(ip[0], ip[1], ip[2]);
                        const int mm = grid.wrap_index(im[0], im[1], im[2]);
                        for (int j = 0; j < 3; ++j)
                            dv(l, j) = (vg[mp](j) - vg[mm](j)) / (2.0 * h);
                        div_w += (wg[mp](l) - wg[mm](l)) / (2.0 * h);
                        div_v += dv(l, l);
                    }
                    double div_x_u = div_v;
                    for (int j = 0; j < 3; ++j)
                        for (int l = 0; l < 3; ++l) div_x_u += coeffs.A[idx](l, j) * dv(l, j);
                    const double lhs = coeffs.J[idx] * div_x_u;
                    worst_t[it] = std::max(worst_t[it], std::abs(lhs - div_w));
                }
    }
    for (double w : worst_t) worst = std::max(worst, w);
    return worst;
}

GridField GridField::zero(const MovingGrid& grid, int components) {
    GridField f;
    f.n = grid.n;
    f.n_t = grid.n_t;
    f.components = components;
    f.values.assign(static_cast<std::size_t>(grid.n_t) * grid.n_nodes() * components, 0.0);
    return f;
}

GridField GridField::sample(const MovingGrid& grid,
                            const std::function<Eigen::VectorXd(const Vec3d&, double)>& fn,
                            int components) {
    GridField f = zero(grid, components);
    for (int it = 0; it < grid.n_t; ++it)
        for (int m = 0; m < grid.n_nodes(); ++m) {
            const Eigen::VectorXd v = fn(grid.node(m), grid.time(it));
            for (int c = 0; c < components; ++c) f.at(it, m, c) = v(c);
        }
    return f;
}

double GridField::max_abs() const {
    double worst = 0.0;
    for (double v : values) worst = std::max(worst, std::abs(v));
    return worst;
}

namespace {

/// Spectral time derivative of a real grid field (Nyquist discarded).
GridField spectral_time_derivative(const GridField& f) {
    GridField out = f;
    const int NT = f.n_t;
    const int NMC = f.n * f.n * f.n * f.components;
    const int K = (NT - 1) / 2;
    std::vector<std::complex<double>> buf(static_cast<std::size_t>(NMC) * NT);
#pragma omp parallel for schedule(static)
    for (int s = 0; s < NMC; ++s) {
        const int m = s / f.components;
        const int c = s % f.components;
        for (int it = 0; it < NT; ++it)
            buf[static_cast<std::size_t>(s) * NT + it] = f.at(it, m, c);
    }
    fft::dft_1d_batched(buf.data(), NT, NMC, fft::forward);
#pragma omp parallel for schedule(static)
    for (int s = 0; s < NMC; ++s) {
        auto* series = buf.data() + static_cast<std::size_t>(s) * NT;
        for (int bin = 0; bin < NT; ++bin) {
            const int k = bin <= NT / 2 ? bin : bin - NT;
            series[bin] *= std::abs(k) <= K ? std::complex<double>(0.0, double(k))
                                            : std::complex<double>(0.0, 0.0);
        }
    }
    fft::dft_1d_batched(buf.data(), NT, NMC, fft::backward);
#pragma omp parallel for schedule(static)
    for (int s = 0; s < NMC; ++s) {
        const int m = s / f.components;
        const int c = s % f.components;
        for (int it = 0; it < NT; ++it)
            out.at(it, m, c) = buf[static_cast<std::size_t>(s) * NT + it].real() / NT;
    }
    return out;
}

struct SpaceDiff {
    const MovingGrid& grid;
    const GridField& f;
    int it;

    double d1(int m, int c, int axis) const {
        const int n = grid.n;
        const int i0 = m / (n * n), i1 = (m / n) % n, i2 = m % n;
        const int mp = grid.wrap_index(i0 + (axis == 0), i1 + (axis == 1), i2 + (axis == 2));
        const int mm = grid.wrap_index(i0 - (axis == 0), i1 - (axis == 1), i2 - (axis == 2));
        return (f.at(it, mp, c) - f.at(it, mm, c)) / (2.0 * grid.h());
    }

    double d2(int m, int c, int ax1, int ax2) const {
        const int n = grid.n;
        const int i0 = m / (n * n), i1 = (m / n) % n, i2 = m % n;
        const double h = grid.h();
        if (ax1 == ax2) {
            const int mp = grid.wrap_index(i0 + (ax1 == 0), i1 + (ax1 == 1), i2 + (ax1 == 2));
            const int mm = grid.wrap_index(i0 - (ax1 == 0), i1 - (ax1 == 1), i2 - (ax1 == 2));
            return (f.at(it, mp, c) - 2.0 * f.at(it, m, c) + f.at(it, mm, c)) / (h * h);
        }
        const auto shift = [&](int s1, int s2) {
            return grid.wrap_index(i0 + s1 * (ax1 == 0) + s2 * (ax2 == 0),
                                   i1 + s1 * (ax1 == 1) + s2 * (ax2 == 1),
                                   i2 + s1 * (ax1 == 2) + s2 * (ax2 == 2));
        };
        return (f.at(it, shift(1, 1), c) - f.at(it, shift(1, -1), c) - f.at(it, shift(-1, 1), c) +
                f.at(it, shift(-1, -1), c)) /
               (4.0 * h * h);
    }
};

}  // namespace

GridField assemble_L(const TransformCoefficients& coeffs, const GridField& w, const GridField& q) {
    const MovingGrid& grid = coeffs.grid;
    if (w.n != grid.n || w.n_t != grid.n_t || w.components != 3 || q.components != 1 ||
        q.n != grid.n || q.n_t != grid.n_t)
        throw std::invalid_argument("assemble_L: grid mismatch");
    const int NM = grid.n_nodes(), NT = grid.n_t;

    GridField z = GridField::zero(grid, 3);  // B_{-1} w
    GridField v = GridField::zero(grid, 3);  // (I + B_{-1}) w
    for (int it = 0; it < NT; ++it)
        for (int m = 0; m < NM; ++m) {
            const Vec3d wv(w.at(it, m, 0), w.at(it, m, 1), w.at(it, m, 2));
            const Vec3d zv = coeffs.Bm1[coeffs.index(it, m)] * wv;
            for (int c = 0; c < 3; ++c) {
                z.at(it, m, c) = zv(c);
                v.at(it, m, c) = wv(c) + zv(c);
            }
        }

    const GridField dzdt = spectral_time_derivative(z);
    GridField out = GridField::zero(grid, 3);

#pragma omp parallel for schedule(static)
    for (int it = 0; it < NT; ++it) {
        SpaceDiff Dz{grid, z, it};
        SpaceDiff Dv{grid, v, it};
        SpaceDiff Dq{grid, q, it};
        // first space derivatives of the a_{lj} grid at this time sample
        for (int m = 0; m < NM; ++m) {
            const std::size_t idx = coeffs.index(it, m);
            const Mat3d& A = coeffs.A[idx];
            const Vec3d& a0 = coeffs.a0[idx];

            // dA[l](r, j) = d a_{rj} / d y_l by central differences
            std::array<Mat3d, 3> dA;
            {
                const int n = grid.n;
                const int i0 = m / (n * n), i1 = (m / n) % n, i2 = m % n;
                for (int l = 0; l < 3; ++l) {
                    const int mp =
                        grid.wrap_index(i0 + (l == 0), i1 + (l == 1), i2 + (l == 2));
                    const int mm =
                        grid.wrap_index(i0 - (l == 0), i1 - (l == 1), i2 - (l == 2));
                    dA[l] = (coeffs.A[coeffs.index(it, mp)] - coeffs.A[coeffs.index(it, mm)]) /
                            (2.0 * grid.h());
                }
            }

            for (int c = 0; c < 3; ++c) {
                double val = -dzdt.at(it, m, c);  // -d/dt (B_{-1} w)
                for (int l = 0; l < 3; ++l) val -= a0(l) * Dv.d1(m, c, l);
                for (int l = 0; l < 3; ++l) val += Dz.d2(m, c, l, l);  // Lap(B_{-1} w)
                for (int j = 0; j < 3; ++j)
                    for (int l = 0; l < 3; ++l)
                        val += (A(l, j) + A(j, l)) * Dv.d2(m, c, l, j);
                for (int l = 0; l < 3; ++l)
                    for (int mm2 = 0; mm2 < 3; ++mm2) {
                        double coef = 0.0;
                        for (int j = 0; j < 3; ++j) coef += A(l, j) * A(mm2, j);
                        val += coef * Dv.d2(m, c, l, mm2);
                    }
                for (int mm2 = 0; mm2 < 3; ++mm2) {
                    double coef = 0.0;
                    for (int l = 0; l < 3; ++l) {
                        coef += dA[l](mm2, l);
                        for (int j = 0; j < 3; ++j) coef += A(l, j) * dA[l](mm2, j);
                    }
                    val += coef * Dv.d1(m, c, mm2);
                }
                // pressure-gradient correction, (grad_x p)_c = d_c q + sum_l a_{lc} d_l q
                for (int l = 0; l < 3; ++l) val -= A(l, c) * Dq.d1(m, 0, l);
                out.at(it, m, c) = val;
            }
        }
    }
    return out;
}

GridField assemble_N(const TransformCoefficients& coeffs, const GridField& w) {
    const MovingGrid& grid = coeffs.grid;
    if (w.n != grid.n || w.n_t != grid.n_t || w.components != 3)
        throw std::invalid_argument("assemble_N: grid mismatch");
    const int NM = grid.n_nodes(), NT = grid.n_t;

    GridField v = GridField::zero(grid, 3);
    for (int it = 0; it < NT; ++it)
        for (int m = 0; m < NM; ++m) {
            const Vec3d wv(w.at(it, m, 0), w.at(it, m, 1), w.at(it, m, 2));
            const Vec3d vv = wv + coeffs.Bm1[coeffs.index(it, m)] * wv;
            for (int c = 0; c < 3; ++c) v.at(it, m, c) = vv(c);
        }

    GridField out = GridField::zero(grid, 3);
#pragma omp parallel for schedule(static)
    for (int it = 0; it < NT; ++it) {
        SpaceDiff Dv{grid, v, it};
        for (int m = 0; m < NM; ++m) {
            const std::size_t idx = coeffs.index(it, m);
            const Mat3d& A = coeffs.A[idx];
            const Vec3d vv(v.at(it, m, 0), v.at(it, m, 1), v.at(it, m, 2));
            Vec3d transport = vv;
            for (int l = 0; l < 3; ++l)
                for (int j = 0; j < 3; ++j) transport(l) += A(l, j) * vv(j);
            for (int c = 0; c < 3; ++c) {
                double val = 0.0;
                for (int l = 0; l < 3; ++l) val += transport(l) * Dv.d1(m, c, l);
                out.at(it, m, c) = val;
            }
        }
    }
    return out;
}

SmallnessReport smallness_report(const MotionField& motion, const MovingGrid& grid,
                                 double epsilon0) {
    const TransformCoefficients tc = compute_coefficients(motion, grid);
    SmallnessReport rep;
    rep.norm_phi = tc.norm_phi;
    rep.norm_dtphi = tc.norm_dtphi;
    rep.satisfied = (rep.norm_phi + rep.norm_dtphi) < epsilon0;

    const int NT = grid.n_t, NM = grid.n_nodes();
    double sup_a = 0.0, sup_a0 = 0.0, sup_J0 = 0.0, sup_Bm1 = 0.0;
    double sup_dt_a = 0.0, sup_dt_J0 = 0.0, sup_dt_Bm1 = 0.0;
    const double dt = two_pi / NT;
    for (int it = 0; it < NT; ++it) {
        const int itp = (it + 1) % NT, itm = (it + NT - 1) % NT;
        for (int m = 0; m < NM; ++m) {
            const std::size_t idx = tc.index(it, m);
            sup_a = std::max(sup_a, tc.A[idx].cwiseAbs().maxCoeff());
            sup_a0 = std::max(sup_a0, tc.a0[idx].cwiseAbs().maxCoeff());
            sup_J0 = std::max(sup_J0, std::abs(tc.J[idx] - 1.0));
            sup_Bm1 = std::max(sup_Bm1, tc.Bm1[idx].cwiseAbs().maxCoeff());
            const std::size_t ip = tc.index(itp, m), im = tc.index(itm, m);
            sup_dt_a = std::max(sup_dt_a,
                                ((tc.A[ip] - tc.A[im]) / (2.0 * dt)).cwiseAbs().maxCoeff());
            sup_dt_J0 = std::max(sup_dt_J0, std::abs(tc.J[ip] - tc.J[im]) / (2.0 * dt));
            sup_dt_Bm1 = std::max(
                sup_dt_Bm1, ((tc.Bm1[ip] - tc.Bm1[im]) / (2.0 * dt)).cwiseAbs().maxCoeff());
        }
    }
    rep.coefficient_norms["a_linf"] = sup_a;
    rep.coefficient_norms["a0_linf"] = sup_a0;
    rep.coefficient_norms["J0_linf"] = sup_J0;
    rep.coefficient_norms["Bm1_linf"] = sup_Bm1;
    rep.coefficient_norms["a_dt_linf"] = sup_dt_a;
    rep.coefficient_norms["J0_dt_linf"] = sup_dt_J0;
    rep.coefficient_norms["Bm1_dt_linf"] = sup_dt_Bm1;
    if (epsilon0 > 0.0) {
        rep.coefficient_norms["a_over_eps0"] = sup_a / epsilon0;
        rep.coefficient_norms["J0_over_eps0"] = sup_J0 / epsilon0;
        rep.coefficient_norms["Bm1_over_eps0"] = sup_Bm1 / epsilon0;
    }
    return rep;
}

}  // namespace torusflow

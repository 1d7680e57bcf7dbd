#include "torusflow/freespace.hpp"

#include "torusflow/parallel.hpp"

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace torusflow {

using cd = std::complex<double>;

namespace {

constexpr double pi = std::numbers::pi;

double norm3(const Vec3& x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

Vec3 sub3(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

}  // namespace

LatticeField LatticeField::zero(double extent, int n, int components) {
    LatticeField f;
    f.extent = extent;
    f.n = n;
    f.components = components;
    f.values.assign(static_cast<std::size_t>(n) * n * n * components, 0.0);
    return f;
}

Vec3 LatticeField::point(int m) const {
    const int i0 = m / (n * n), i1 = (m / n) % n, i2 = m % n;
    const double step = h();
    return {-extent + i0 * step, -extent + i1 * step, -extent + i2 * step};
}

TpLatticeField TpLatticeField::zero(double extent, int n, int K, int components) {
    TpLatticeField f;
    f.extent = extent;
    f.n = n;
    f.K = K;
    f.components = components;
    f.values.assign(static_cast<std::size_t>(2 * K + 1) * n * n * n * components, cd(0.0, 0.0));
    return f;
}

Vec3 TpLatticeField::point(int m) const {
    const int i0 = m / (n * n), i1 = (m / n) % n, i2 = m % n;
    const double step = h();
    return {-extent + i0 * step, -extent + i1 * step, -extent + i2 * step};
}

// --- steady kernels -------------------------------------------------------

Eigen::Matrix3d stokeslet(const Vec3& x, double mu) {
    const double r = norm3(x);
    if (r == 0.0) throw std::invalid_argument("stokeslet: evaluation at the singularity x = 0");
    const double c = -1.0 / (8.0 * pi * mu);
    Eigen::Matrix3d U;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            U(i, j) = c * ((i == j ? 1.0 / r : 0.0) + x[i] * x[j] / (r * r * r));
    return U;
}

Eigen::Vector3d pressure_kernel(const Vec3& x) {
    const double r = norm3(x);
    if (r == 0.0) throw std::invalid_argument("pressure_kernel: evaluation at the singularity x = 0");
    Eigen::Vector3d q;
    for (int j = 0; j < 3; ++j) q(j) = x[j] / (4.0 * pi * r * r * r);
    return q;
}

std::array<Eigen::Matrix3d, 3> stokeslet_gradient(const Vec3& x, double mu) {
    const double r = norm3(x);
    if (r == 0.0) throw std::invalid_argument("stokeslet_gradient: x = 0");
    const double c = -1.0 / (8.0 * pi * mu);
    const double r3 = r * r * r, r5 = r3 * r * r;
    std::array<Eigen::Matrix3d, 3> dU;
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double v = -(i == j ? 1.0 : 0.0) * x[k] / r3;
                v += ((k == i ? x[j] : 0.0) + (k == j ? x[i] : 0.0)) / r3;
                v -= 3.0 * x[i] * x[j] * x[k] / r5;
                dU[k](i, j) = c * v;
            }
    return dU;
}

Eigen::Matrix3d pressure_kernel_gradient(const Vec3& x) {
    const double r = norm3(x);
    if (r == 0.0) throw std::invalid_argument("pressure_kernel_gradient: x = 0");
    const double r3 = r * r * r, r5 = r3 * r * r;
    Eigen::Matrix3d dq;
    for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j)
            dq(k, j) = ((j == k ? 1.0 : 0.0) / r3 - 3.0 * x[j] * x[k] / r5) / (4.0 * pi);
    return dq;
}

namespace {

/// Triple antiderivative of 1/r, zero coordinates handled by limits.
double inv_r_antiderivative(double x, double y, double z) {
    const double r = std::sqrt(x * x + y * y + z * z);
    double f = 0.0;
    if (y * z != 0.0) f += y * z * std::log(x + r);
    if (x * z != 0.0) f += x * z * std::log(y + r);
    if (x * y != 0.0) f += x * y * std::log(z + r);
    if (x != 0.0) f -= 0.5 * x * x * std::atan2(y * z, x * r);
    if (y != 0.0) f -= 0.5 * y * y * std::atan2(x * z, y * r);
    if (z != 0.0) f -= 0.5 * z * z * std::atan2(x * y, z * r);
    return f;
}

}  // namespace

double unit_cube_inverse_distance_integral() {
    const double a = 0.5;
    auto F = inv_r_antiderivative;
    const double corner = F(a, a, a) - F(0, a, a) - F(a, 0, a) - F(a, a, 0) + F(a, 0, 0) +
                          F(0, a, 0) + F(0, 0, a) - F(0, 0, 0);
    return 8.0 * corner;
}

SteadyEval steady_eval_points(const LatticeField& f, double mu, const std::vector<Vec3>& points) {
    if (f.components != 3)
        throw std::invalid_argument("steady_eval_points: force field must have 3 components");
    if (!f.support_radius)
        throw std::invalid_argument("steady_eval_points: force field must declare a support radius");
    const double h = f.h();
    const double vol = h * h * h;
    const double self_coef = -unit_cube_inverse_distance_integral() * h * h / (6.0 * pi * mu);

    std::vector<int> sources;
    for (int m = 0; m < f.n_nodes(); ++m)
        if (norm3(f.point(m)) <= *f.support_radius + 1e-12) sources.push_back(m);

    SteadyEval out;
    out.u.assign(points.size(), Eigen::Vector3d::Zero());
    out.p.assign(points.size(), 0.0);
    out.grad_u.assign(points.size(), Eigen::Matrix3d::Zero());

#pragma omp parallel for schedule(static)
    for (int ip = 0; ip < static_cast<int>(points.size()); ++ip) {
        Eigen::Vector3d u = Eigen::Vector3d::Zero();
        Eigen::Matrix3d gu = Eigen::Matrix3d::Zero();
        double p = 0.0;
        for (int m : sources) {
            const Vec3 y = f.point(m);
            const Eigen::Vector3d fy(f.at(m, 0), f.at(m, 1), f.at(m, 2));
            const Vec3 d = sub3(points[ip], y);
            const double dinf = std::max({std::abs(d[0]), std::abs(d[1]), std::abs(d[2])});
            if (dinf <= 0.5 * h) {
                u += self_coef * fy;  // odd kernels average to zero over the cell
                continue;
            }
            u += vol * (stokeslet(d, mu) * fy);
            p += vol * pressure_kernel(d).dot(fy);
            const auto dU = stokeslet_gradient(d, mu);
            for (int k = 0; k < 3; ++k) gu.row(k) += vol * (dU[k] * fy).transpose();
        }
        out.u[ip] = u;
        out.p[ip] = p;
        out.grad_u[ip] = gu;
    }
    return out;
}

std::pair<LatticeField, LatticeField> steady_convolve(const LatticeField& f, double mu,
                                                      double eval_extent, int eval_n) {
    LatticeField u = LatticeField::zero(eval_extent, eval_n, 3);
    LatticeField p = LatticeField::zero(eval_extent, eval_n, 1);
    std::vector<Vec3> pts(u.n_nodes());
    for (int m = 0; m < u.n_nodes(); ++m) pts[m] = u.point(m);
    SteadyEval ev = steady_eval_points(f, mu, pts);
    for (int m = 0; m < u.n_nodes(); ++m) {
        for (int c = 0; c < 3; ++c) u.at(m, c) = ev.u[m](c);
        p.at(m, 0) = ev.p[m];
    }
    return {std::move(u), std::move(p)};
}

// --- Gamma_perp profiles ---------------------------------------------------

namespace {

struct Jtriple {
    cd J0, J1, J2;
};

/// The three reduced radial integrals by Ooura Fourier quadrature:
/// J0 = int sin(pr) / (p (mu p^2 + ik)) dp
/// J1 = int cos(pr) / (mu p^2 + ik) dp
/// J2 = int p sin(pr) / (mu p^2 + ik) dp
Jtriple j_integrals_quadrature(int k, double r, double mu, double* err_out) {
    namespace bq = boost::math::quadrature;
    // fresh integrators per call: their lazily refined node tables would
    // otherwise make results depend on the call history of the thread
    bq::ooura_fourier_sin<double> sin_integrator;
    bq::ooura_fourier_cos<double> cos_integrator;

    const double kk = double(k);
    const auto D = [mu, kk](double p) { return mu * mu * p * p * p * p + kk * kk; };

    double worst_err = 0.0;
    auto track = [&worst_err](std::pair<double, double> res) {
        worst_err = std::max(worst_err, res.second);
        return res.first;
    };

    Jtriple J;
    J.J0 = cd(track(sin_integrator.integrate([&](double p) { return mu * p / D(p); }, r)),
              track(sin_integrator.integrate([&](double p) { return -kk / (p * D(p)); }, r)));
    J.J1 = cd(track(cos_integrator.integrate([&](double p) { return mu * p * p / D(p); }, r)),
              track(cos_integrator.integrate([&](double p) { return -kk / D(p); }, r)));
    J.J2 = cd(track(sin_integrator.integrate([&](double p) { return mu * p * p * p / D(p); }, r)),
              track(sin_integrator.integrate([&](double p) { return -kk * p / D(p); }, r)));
    if (err_out) *err_out = worst_err;
    return J;
}

Jtriple j_integrals_closed_form(int k, double r, double mu) {
    const cd ik(0.0, double(k));
    const cd a = std::sqrt(ik / mu);  // principal branch, Re a > 0 for k != 0
    const cd ear = std::exp(-a * r);
    Jtriple J;
    J.J2 = (pi / (2.0 * mu)) * ear;
    J.J1 = (pi / (2.0 * mu)) * ear / a;
    J.J0 = (pi / (2.0 * mu)) * (1.0 - ear) / (a * a);
    return J;
}

/// Assembles G = A I + B xhat xhat^T (and radial derivatives) from the
/// J integrals; c = 1/(2 pi^2) carries the inverse-transform measure.
KernelModeProfiles profiles_from_j(const Jtriple& J, int k, double r, double mu) {
    const double c = 1.0 / (2.0 * pi * pi);
    const cd ik(0.0, double(k));
    const double r2 = r * r, r3 = r2 * r, r4 = r3 * r;
    KernelModeProfiles prof;
    prof.A = c * (J.J2 / r - J.J0 / r3 + J.J1 / r2);
    prof.B = c * (3.0 * J.J0 / r3 - 3.0 * J.J1 / r2 - J.J2 / r);
    prof.dA = c * (3.0 * J.J0 / r4 - 3.0 * J.J1 / r3 - 2.0 * J.J2 / r2 - (ik / mu) * J.J1 / r);
    prof.dB = c * (-9.0 * J.J0 / r4 + 9.0 * J.J1 / r3 + 4.0 * J.J2 / r2 + (ik / mu) * J.J1 / r);
    return prof;
}

}  // namespace

KernelModeProfiles gamma_perp_profiles_quadrature(int k, double r, double mu, double* err_out) {
    if (k == 0) return {cd(0, 0), cd(0, 0), cd(0, 0), cd(0, 0)};
    return profiles_from_j(j_integrals_quadrature(k, r, mu, err_out), k, r, mu);
}

KernelModeProfiles gamma_perp_profiles_closed_form(int k, double r, double mu) {
    if (k == 0) return {cd(0, 0), cd(0, 0), cd(0, 0), cd(0, 0)};
    return profiles_from_j(j_integrals_closed_form(k, r, mu), k, r, mu);
}

Eigen::Matrix3cd gamma_perp_mode(const Vec3& x, const KernelModeProfiles& prof) {
    const double r = norm3(x);
    Eigen::Matrix3cd G;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double xh = x[i] / r, yh = x[j] / r;
            G(i, j) = prof.A * (i == j ? 1.0 : 0.0) + prof.B * xh * yh;
        }
    return G;
}

std::array<Eigen::Matrix3cd, 3> gamma_perp_mode_gradient(const Vec3& x,
                                                         const KernelModeProfiles& prof) {
    const double r = norm3(x);
    const double xh[3] = {x[0] / r, x[1] / r, x[2] / r};
    std::array<Eigen::Matrix3cd, 3> dG;
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                cd v = prof.dA * xh[k] * (i == j ? 1.0 : 0.0);
                v += prof.dB * xh[k] * xh[i] * xh[j];
                v += prof.B * (((k == i ? xh[j] : 0.0) + (k == j ? xh[i] : 0.0)) -
                               2.0 * xh[i] * xh[j] * xh[k]) /
                     r;
                dG[k](i, j) = v;
            }
    return dG;
}

Eigen::Matrix3cd gamma_perp_mode_lattice_fft(const Vec3& x, int k, double mu, double dxi,
                                             double cutoff) {
    const int half = static_cast<int>(std::ceil(cutoff / dxi));
    const cd ik(0.0, double(k));
    const int span = 2 * half + 1;
    std::vector<Eigen::Matrix3cd> partial(span, Eigen::Matrix3cd::Zero());
#pragma omp parallel for schedule(static)
    for (int a = 0; a < span; ++a) {
        Eigen::Matrix3cd& local = partial[a];
        const double xi0 = (a - half) * dxi;
        for (int b = -half; b <= half; ++b)
            for (int c = -half; c <= half; ++c) {
                const double xi1 = b * dxi, xi2 = c * dxi;
                const double n2 = xi0 * xi0 + xi1 * xi1 + xi2 * xi2;
                if (n2 == 0.0 || n2 > cutoff * cutoff) continue;
                const double phase = xi0 * x[0] + xi1 * x[1] + xi2 * x[2];
                const cd e = cd(std::cos(phase), std::sin(phase)) / (mu * n2 + ik);
                const double xi[3] = {xi0, xi1, xi2};
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j)
                        local(i, j) += e * ((i == j ? 1.0 : 0.0) - xi[i] * xi[j] / n2);
            }
    }
    Eigen::Matrix3cd G = Eigen::Matrix3cd::Zero();
    for (const auto& local : partial) G += local;
    return G * (dxi * dxi * dxi / (8.0 * pi * pi * pi));
}

std::vector<GammaPerpValue> gamma_perp_eval(const std::vector<Vec3>& xs,
                                            const GammaPerpOptions& opt) {
    const int K = opt.K_time;
    for (const Vec3& x : xs)
        if (norm3(x) < opt.delta)
            throw std::invalid_argument("gamma_perp_eval: |x| below the validity standoff delta");

    std::vector<GammaPerpValue> out(xs.size());
    ParallelErrorGuard guard;
#pragma omp parallel for schedule(dynamic)
    for (int ix = 0; ix < static_cast<int>(xs.size()); ++ix) {
        guard.protect([&] {
            const Vec3& x = xs[ix];
            Eigen::MatrixXcd coeffs = Eigen::MatrixXcd::Zero(2 * K + 1, 9);
            double total2 = 0.0, worst_err = 0.0, last_mag = 0.0;
            for (int k = 1; k <= K; ++k) {
                Eigen::Matrix3cd G;
                if (opt.method == GammaMethod::radial) {
                    double err = 0.0;
                    const auto prof =
                        gamma_perp_profiles_quadrature(k, norm3(x), opt.mu, &err);
                    G = gamma_perp_mode(x, prof);
                    worst_err = std::max(worst_err, err);
                } else {
                    G = gamma_perp_mode_lattice_fft(x, k, opt.mu);
                }
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        coeffs(K + k, 3 * i + j) = G(i, j);
                        coeffs(K - k, 3 * i + j) = std::conj(G(i, j));
                    }
                const double mag = G.norm();
                total2 += 2.0 * mag * mag;
                if (k == K) last_mag = mag;
            }
            // |G_k| ~ C/|k| for large k; the discarded-series estimate follows
            const double tail = last_mag * std::sqrt(2.0 * K);
            GammaPerpValue val;
            val.tail_warning = tail > 0.1 * std::sqrt(total2) ||
                               (opt.method == GammaMethod::radial && worst_err > 0.1);
            val.fn = from_coeffs(coeffs);
            out[ix] = std::move(val);
        });
    }
    guard.rethrow();
    return out;
}

std::vector<TorusFunction> tp_convolve(const TpLatticeField& G, const TpLatticeField& h_src,
                                       const std::vector<Vec3>& eval_points,
                                       const GammaPerpOptions& opt) {
    if (G.components != 9) throw std::invalid_argument("tp_convolve: G must be a 9-component tensor");
    if (h_src.components != 3) throw std::invalid_argument("tp_convolve: h_src must have 3 components");
    if (!h_src.support_radius)
        throw std::invalid_argument("tp_convolve: h_src must declare a support radius");
    if (G.K != h_src.K) throw std::invalid_argument("tp_convolve: time truncations differ");
    const int K = std::min(G.K, opt.K_time);

    std::vector<int> h_sources;
    for (int m = 0; m < h_src.n_nodes(); ++m)
        if (norm3(h_src.point(m)) <= *h_src.support_radius + 1e-12) h_sources.push_back(m);

    const double volG = std::pow(G.h(), 3), volH = std::pow(h_src.h(), 3);

    std::vector<TorusFunction> out(eval_points.size());
    ParallelErrorGuard guard;
#pragma omp parallel for schedule(dynamic)
    for (int ip = 0; ip < static_cast<int>(eval_points.size()); ++ip) {
        guard.protect([&] {
        const Vec3& x = eval_points[ip];
        Eigen::MatrixXcd coeffs = Eigen::MatrixXcd::Zero(2 * K + 1, 3);
        for (int k = 1; k <= K; ++k) {
            Eigen::Vector3cd acc = Eigen::Vector3cd::Zero();
            // v2: direct convolution with the kernel
            for (int m : h_sources) {
                const Vec3 d = sub3(x, h_src.point(m));
                const double r = norm3(d);
                if (r < opt.delta)
                    throw std::invalid_argument("tp_convolve: source cell inside the kernel standoff");
                const auto prof = gamma_perp_profiles_closed_form(k, r, opt.mu);
                const Eigen::Matrix3cd Gk = gamma_perp_mode(d, prof);
                const Eigen::Vector3cd hk(h_src.at(k, m, 0), h_src.at(k, m, 1), h_src.at(k, m, 2));
                acc += volH * (Gk * hk);
            }
            // v1: derivative moved onto the kernel, grad Gamma * G
            for (int m = 0; m < G.n_nodes(); ++m) {
                double mass = 0.0;
                for (int c = 0; c < 9; ++c) mass += std::norm(G.at(k, m, c));
                if (mass == 0.0) continue;
                const Vec3 d = sub3(x, G.point(m));
                const double r = norm3(d);
                if (r < opt.delta)
                    throw std::invalid_argument("tp_convolve: source cell inside the kernel standoff");
                const auto prof = gamma_perp_profiles_closed_form(k, r, opt.mu);
                const auto dGk = gamma_perp_mode_gradient(d, prof);
                for (int a = 0; a < 3; ++a) {
                    cd v = 0.0;
                    for (int j = 0; j < 3; ++j)
                        for (int b = 0; b < 3; ++b) v += dGk[j](a, b) * G.at(k, m, 3 * j + b);
                    acc(a) += volG * v;
                }
            }
            for (int a = 0; a < 3; ++a) {
                coeffs(K + k, a) = acc(a);
                coeffs(K - k, a) = std::conj(acc(a));
            }
        }
        out[ip] = from_coeffs(coeffs);
        });
    }
    guard.rethrow();
    return out;
}

double weighted_norm(const LatticeField& field, double ell) {
    double best = 0.0;
    for (int m = 0; m < field.n_nodes(); ++m) {
        double mag2 = 0.0;
        for (int c = 0; c < field.components; ++c) mag2 += field.at(m, c) * field.at(m, c);
        best = std::max(best, std::sqrt(mag2) * std::pow(1.0 + norm3(field.point(m)), ell));
    }
    return best;
}

double weighted_norm(const std::vector<Vec3>& points, const std::vector<TorusFunction>& values,
                     double ell, double p) {
    if (points.size() != values.size())
        throw std::invalid_argument("weighted_norm: point/value count mismatch");
    NormSpec spec{p, 0.0, NormSpec::Kind::bochner};
    double best = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        best = std::max(best, norm(values[i], spec) * std::pow(1.0 + norm3(points[i]), ell));
    return best;
}

DecayReport decay_fit(const std::vector<double>& radii, const std::vector<double>& norms,
                      std::pair<double, double> window) {
    if (radii.size() != norms.size()) throw std::invalid_argument("decay_fit: length mismatch");
    DecayReport rep;
    rep.window = window;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (radii[i] < window.first || radii[i] > window.second) continue;
        if (norms[i] <= 0.0) throw std::invalid_argument("decay_fit: nonpositive norm");
        if (i > 0 && radii[i] <= radii[i - 1])
            throw std::invalid_argument("decay_fit: radii must be strictly increasing");
        rep.radii.push_back(radii[i]);
        rep.norms.push_back(norms[i]);
        lx.push_back(std::log(radii[i]));
        ly.push_back(std::log(norms[i]));
    }
    const int n = static_cast<int>(lx.size());
    if (n < 5) throw std::invalid_argument("decay_fit: need at least 5 points inside the window");

    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    rep.fitted_exponent = sxy / sxx;
    const double intercept = my - rep.fitted_exponent * mx;
    for (int i = 0; i < n; ++i)
        rep.fit_residual = std::max(rep.fit_residual,
                                    std::abs(ly[i] - (intercept + rep.fitted_exponent * lx[i])));
    return rep;
}

}  // namespace torusflow

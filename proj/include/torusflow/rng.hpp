#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace torusflow::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent engine for a (seed, stream) pair. Streams let parallel
/// loops draw per-iteration randomness with a deterministic result that
/// does not depend on the thread count.
inline std::mt19937_64 engine_for(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(stream)));
}

inline Eigen::VectorXcd gaussian_complex(std::mt19937_64& eng, int dim) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXcd v(dim);
    for (int i = 0; i < dim; ++i) {
        const double re = gauss(eng);
        const double im = gauss(eng);
        v(i) = std::complex<double>(re, im);
    }
    return v;
}

inline Eigen::VectorXcd unit_sphere_complex(std::mt19937_64& eng, int dim) {
    Eigen::VectorXcd v = gaussian_complex(eng, dim);
    const double n = v.norm();
    return n > 0.0 ? Eigen::VectorXcd(v / n) : Eigen::VectorXcd::Unit(dim, 0);
}

}  // namespace torusflow::rng

// Hand-rolled generators and small oracles shared by the unit tests.

#pragma once

#include <cmath>
#include <random>

#include "qrabi/hilbert.hpp"
#include "qrabi/model.hpp"

namespace qrabi::test {

/// Spin factor ⊗ mode factor under the k = s·(n_max+1) + n ordering.
inline Vector kron(const Vector& spin, const Vector& mode) {
    Vector out(spin.size() * mode.size());
    for (Eigen::Index s = 0; s < spin.size(); ++s) out.segment(s * mode.size(), mode.size()) = spin(s) * mode;
    return out;
}

inline Vector random_vector(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = Complex(normal(rng), normal(rng));
    return v / v.norm();
}

/// Haar-like random qubit ⊗ mode product state.
inline Vector random_product(const FockSpace& space, std::mt19937_64& rng) {
    return kron(random_vector(2, rng), random_vector(space.mode_dim(), rng));
}

/// Convex mixture of `terms` random product states.
inline Matrix random_separable(const FockSpace& space, int terms, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> w(terms);
    double total = 0.0;
    for (double& x : w) total += (x = uni(rng) + 1e-3);
    Matrix rho = Matrix::Zero(space.dim(), space.dim());
    for (int j = 0; j < terms; ++j) {
        const Vector p = random_product(space, rng);
        rho += (w[j] / total) * p * p.adjoint();
    }
    return rho;
}

/// a|↓⟩|u⟩ + b|↑⟩|v⟩ with orthonormal u, v and both Schmidt weights ≥ 0.05.
inline Vector random_entangled(const FockSpace& space, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.05, 0.95);
    const int d = space.mode_dim();
    Vector u = random_vector(d, rng);
    Vector v = random_vector(d, rng);
    v -= u.dot(v) * u;
    v /= v.norm();
    const Vector s0 = random_vector(2, rng);
    Vector s1(2);
    s1 << -std::conj(s0(1)), std::conj(s0(0));
    const double lambda = uni(rng);
    return std::sqrt(lambda) * kron(s0, u) + std::sqrt(1.0 - lambda) * kron(s1, v);
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace qrabi::test

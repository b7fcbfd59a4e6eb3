#include "qrabi/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace qrabi {

namespace {

double hermitian_deviation(const Matrix& m) {
    return max_abs_entry(m - m.adjoint());
}

bool looks_hermitian(const Matrix& m) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, max_abs_entry(m));
    return hermitian_deviation(m) < kHermitianTolerance * scale;
}

}  // namespace

// ---------------------------------------------------------------- FockSpace

FockSpace::FockSpace(int n_max) : n_max_(n_max) {
    if (n_max < 1) throw std::invalid_argument("FockSpace: n_max must be >= 1, got " + std::to_string(n_max));
}

FockSpace FockSpace::from_dim(int full_dim) {
    if (full_dim < 4 || full_dim % 2 != 0)
        throw DimensionMismatch("FockSpace: full dimension must be even and >= 4, got " + std::to_string(full_dim));
    return FockSpace(full_dim / 2 - 1);
}

int FockSpace::index(Spin s, int n) const {
    if (n < 0 || n > n_max_)
        throw std::out_of_range("Fock index " + std::to_string(n) + " outside [0, " + std::to_string(n_max_) + "]");
    return static_cast<int>(s) * mode_dim() + n;
}

// ----------------------------------------------------------------- Operator

Operator::Operator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw DimensionMismatch("Operator: matrix must be square");
    hermitian_ = looks_hermitian(m_);
}

Operator Operator::hermitian(Matrix m) {
    if (!looks_hermitian(m))
        throw std::invalid_argument("Operator::hermitian: deviation " + std::to_string(hermitian_deviation(m)));
    Operator op;
    op.m_ = 0.5 * (m + m.adjoint());
    op.hermitian_ = true;
    return op;
}

Operator Operator::identity(int dim) { return Operator(Matrix::Identity(dim, dim)); }

Operator Operator::zero(int dim) { return Operator(Matrix::Zero(dim, dim)); }

Operator Operator::adjoint() const { return Operator(m_.adjoint()); }

double Operator::norm_bound() const {
    return m_.rows() == 0 ? 0.0 : m_.cwiseAbs().rowwise().sum().maxCoeff();
}

void Operator::require_same_dim(const Operator& rhs) const {
    if (dim() != rhs.dim())
        throw DimensionMismatch("Operator dimension mismatch: " + std::to_string(dim()) + " vs " +
                                std::to_string(rhs.dim()));
}

Operator Operator::operator+(const Operator& rhs) const {
    require_same_dim(rhs);
    return Operator(m_ + rhs.m_);
}

Operator Operator::operator-(const Operator& rhs) const {
    require_same_dim(rhs);
    return Operator(m_ - rhs.m_);
}

Operator Operator::operator*(const Operator& rhs) const {
    require_same_dim(rhs);
    return Operator(m_ * rhs.m_);
}

Operator Operator::operator*(Complex s) const { return Operator(m_ * s); }

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

Operator anticommutator(const Operator& a, const Operator& b) { return a * b + b * a; }

double max_abs_entry(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// ------------------------------------------------------------- QuantumState

QuantumState::QuantumState(Kind kind, Vector psi, Matrix rho)
    : kind_(kind), psi_(std::move(psi)), rho_(std::move(rho)) {}

QuantumState QuantumState::pure(Vector psi) {
    const double norm2 = psi.squaredNorm();
    if (std::abs(norm2 - 1.0) >= kStateTolerance)
        throw std::invalid_argument("QuantumState::pure: |psi|^2 = " + std::to_string(norm2));
    return QuantumState(Kind::pure, std::move(psi), {});
}

QuantumState QuantumState::mixed(Matrix rho) {
    if (rho.rows() != rho.cols()) throw DimensionMismatch("QuantumState::mixed: matrix must be square");
    const double trace = rho.trace().real();
    if (std::abs(trace - 1.0) >= kStateTolerance)
        throw std::invalid_argument("QuantumState::mixed: Tr rho = " + std::to_string(trace));
    if (hermitian_deviation(rho) >= kStateTolerance)
        throw std::invalid_argument("QuantumState::mixed: rho is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kStateTolerance)
        throw std::invalid_argument("QuantumState::mixed: negative eigenvalue " +
                                    std::to_string(es.eigenvalues().minCoeff()));
    return QuantumState(Kind::mixed, {}, std::move(rho));
}

QuantumState QuantumState::pure_unchecked(Vector psi) { return QuantumState(Kind::pure, std::move(psi), {}); }

QuantumState QuantumState::mixed_unchecked(Matrix rho) { return QuantumState(Kind::mixed, {}, std::move(rho)); }

int QuantumState::dim() const { return static_cast<int>(is_pure() ? psi_.size() : rho_.rows()); }

const Vector& QuantumState::vector() const {
    if (!is_pure()) throw std::logic_error("QuantumState::vector on a mixed state");
    return psi_;
}

const Matrix& QuantumState::density() const {
    if (is_pure()) throw std::logic_error("QuantumState::density on a pure state; use to_density()");
    return rho_;
}

Matrix QuantumState::to_density() const { return is_pure() ? Matrix(psi_ * psi_.adjoint()) : rho_; }

// ------------------------------------------------------------ mode operators

Operator annihilation(const FockSpace& space) {
    const int d = space.mode_dim();
    Matrix a = Matrix::Zero(d, d);
    for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return Operator(std::move(a));
}

Operator creation(const FockSpace& space) { return annihilation(space).adjoint(); }

Operator number_operator(const FockSpace& space) {
    const int d = space.mode_dim();
    Matrix n = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
    return Operator(std::move(n));
}

Operator fock_projector(const FockSpace& space, int n) {
    if (n < 0 || n > space.n_max()) throw std::out_of_range("fock_projector: n out of range");
    Matrix p = Matrix::Zero(space.mode_dim(), space.mode_dim());
    p(n, n) = 1.0;
    return Operator(std::move(p));
}

Operator pauli(PauliAxis axis) {
    const Complex i{0.0, 1.0};
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    switch (axis) {
        case PauliAxis::x: m << 0, 1, 1, 0; break;
        case PauliAxis::y: m << 0, i, -i, 0; break;  // σ_y = −i(σ_+ − σ_−) in the ↓,↑ ordering
        case PauliAxis::z: m << -1, 0, 0, 1; break;
        case PauliAxis::plus: m << 0, 0, 1, 0; break;
        case PauliAxis::minus: m << 0, 1, 0, 0; break;
    }
    return Operator(Matrix(m));
}

Operator spin_up_projector() { return pauli(PauliAxis::plus) * pauli(PauliAxis::minus); }

Operator embed(const Operator& spin_op, const Operator& mode_op) {
    if (spin_op.dim() != 2) throw DimensionMismatch("embed: spin operator must be 2x2");
    if (mode_op.dim() < 2) throw DimensionMismatch("embed: mode operator must be at least 2x2");
    const int d = mode_op.dim();
    Matrix full = Matrix::Zero(2 * d, 2 * d);
    for (int s = 0; s < 2; ++s)
        for (int sp = 0; sp < 2; ++sp) {
            const Complex c = spin_op.matrix()(s, sp);
            if (c != Complex{}) full.block(s * d, sp * d, d, d) = c * mode_op.matrix();
        }
    return Operator(std::move(full));
}

Operator embed_spin(const Operator& spin_op, const FockSpace& space) {
    return embed(spin_op, Operator::identity(space.mode_dim()));
}

Operator embed_mode(const Operator& mode_op) { return embed(Operator::identity(2), mode_op); }

int parity_of_index(const FockSpace& space, int k) {
    const int s = k / space.mode_dim();
    const int n = k % space.mode_dim();
    return ((s + n) % 2 == 0) ? 1 : -1;
}

Operator parity_operator(const FockSpace& space) {
    Matrix p = Matrix::Zero(space.dim(), space.dim());
    for (int k = 0; k < space.dim(); ++k) p(k, k) = static_cast<double>(parity_of_index(space, k));
    return Operator(std::move(p));
}

QuantumState basis_state(Spin s, int n, const FockSpace& space) {
    Vector psi = Vector::Zero(space.dim());
    psi(space.index(s, n)) = 1.0;
    return QuantumState::pure(std::move(psi));
}

// ------------------------------------------------------------ reductions

Eigen::Matrix2cd partial_trace_mode(const QuantumState& state) {
    const FockSpace space = FockSpace::from_dim(state.dim());
    const int d = space.mode_dim();
    Eigen::Matrix2cd out;
    if (state.is_pure()) {
        const Vector& psi = state.vector();
        for (int s = 0; s < 2; ++s)
            for (int sp = 0; sp < 2; ++sp)
                out(s, sp) = psi.segment(sp * d, d).dot(psi.segment(s * d, d));  // dot() conjugates its lhs
    } else {
        const Matrix& rho = state.density();
        for (int s = 0; s < 2; ++s)
            for (int sp = 0; sp < 2; ++sp) out(s, sp) = rho.block(s * d, sp * d, d, d).trace();
    }
    return out;
}

Matrix partial_trace_spin(const QuantumState& state) {
    const FockSpace space = FockSpace::from_dim(state.dim());
    const int d = space.mode_dim();
    if (state.is_pure()) {
        const Vector& psi = state.vector();
        Matrix out = Matrix::Zero(d, d);
        for (int s = 0; s < 2; ++s) out += psi.segment(s * d, d) * psi.segment(s * d, d).adjoint();
        return out;
    }
    const Matrix& rho = state.density();
    return rho.block(0, 0, d, d) + rho.block(d, d, d, d);
}

Complex expectation(const QuantumState& state, const Operator& op) {
    if (state.dim() != op.dim())
        throw DimensionMismatch("expectation: state dim " + std::to_string(state.dim()) + " vs operator dim " +
                                std::to_string(op.dim()));
    if (state.is_pure()) {
        const Vector& psi = state.vector();
        return psi.dot(op.matrix() * psi);
    }
    // Tr(ρA) = Σ_ij ρ_ij A_ji
    return (state.density().cwiseProduct(op.matrix().transpose())).sum();
}

}  // namespace qrabi

// hilbert.hpp: truncated spin ⊗ Fock space: operators, states, partial trace
//
// Basis convention (fixed for every module and every file output):
//   global index k = s·(n_max+1) + n,   s = 0 for |↓⟩, s = 1 for |↑⟩.

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qrabi {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kStateTolerance = 1e-9;
inline constexpr double kHermitianTolerance = 1e-12;

enum class Spin : int { down = 0, up = 1 };

enum class PauliAxis { x, y, z, plus, minus };

class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class FockSpace {
public:
    explicit FockSpace(int n_max);

    /// Builds the space matching a full-space dimension 2·(n_max+1).
    static FockSpace from_dim(int full_dim);

    int n_max() const { return n_max_; }
    int mode_dim() const { return n_max_ + 1; }
    int dim() const { return 2 * (n_max_ + 1); }
    int index(Spin s, int n) const;

    friend bool operator==(const FockSpace&, const FockSpace&) = default;

private:
    int n_max_;
};

/// Dense square matrix with a Hermiticity flag.
///
/// The flag is detected on construction with a scale-aware tolerance
/// (kHermitianTolerance · max(1, max|A|)), so operators expressed in rad/s
/// keep their flag through floating-point sums.
class Operator {
public:
    Operator() = default;
    explicit Operator(Matrix m);

    /// Validates Hermiticity, then symmetrizes so that A == A† exactly.
    static Operator hermitian(Matrix m);
    static Operator identity(int dim);
    static Operator zero(int dim);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }
    bool is_hermitian() const { return hermitian_; }

    Operator adjoint() const;
    /// Max absolute row sum; an upper bound on the spectral norm.
    double norm_bound() const;

    Operator operator+(const Operator& rhs) const;
    Operator operator-(const Operator& rhs) const;
    Operator operator*(const Operator& rhs) const;
    Operator operator*(Complex s) const;
    friend Operator operator*(Complex s, const Operator& op) { return op * s; }

private:
    void require_same_dim(const Operator& rhs) const;

    Matrix m_;
    bool hermitian_ = false;
};

Operator commutator(const Operator& a, const Operator& b);
Operator anticommutator(const Operator& a, const Operator& b);
double max_abs_entry(const Matrix& m);

/// Pure state vector or density matrix on the full space.
class QuantumState {
public:
    enum class Kind { pure, mixed };

    /// Validated constructors; throw std::invalid_argument on invariant violation.
    static QuantumState pure(Vector psi);
    static QuantumState mixed(Matrix rho);

    /// Integrator outputs: invariant monitors live in the integrators themselves.
    static QuantumState pure_unchecked(Vector psi);
    static QuantumState mixed_unchecked(Matrix rho);

    Kind kind() const { return kind_; }
    bool is_pure() const { return kind_ == Kind::pure; }
    int dim() const;
    const Vector& vector() const;
    const Matrix& density() const;
    /// ρ for either kind (|ψ⟩⟨ψ| for pure states).
    Matrix to_density() const;

private:
    QuantumState(Kind kind, Vector psi, Matrix rho);

    Kind kind_;
    Vector psi_;
    Matrix rho_;
};

// Mode operators on the (n_max+1)-dimensional Fock factor.
Operator annihilation(const FockSpace& space);
Operator creation(const FockSpace& space);
Operator number_operator(const FockSpace& space);
Operator fock_projector(const FockSpace& space, int n);

/// 2×2 Pauli matrices with ↓ = index 0, ↑ = index 1, σ_z = diag(−1, +1), σ_+ = |↑⟩⟨↓|.
Operator pauli(PauliAxis axis);
/// |↑⟩⟨↑| = σ_+σ_−.
Operator spin_up_projector();

/// spin_op ⊗ mode_op under the fixed index convention.
Operator embed(const Operator& spin_op, const Operator& mode_op);
Operator embed_spin(const Operator& spin_op, const FockSpace& space);
Operator embed_mode(const Operator& mode_op);

/// Π = −σ_z ⊗ e^{iπ a†a}; diagonal with Π|s,n⟩ = (−1)^{s+n}|s,n⟩ so Π|↓,0⟩ = +|↓,0⟩.
Operator parity_operator(const FockSpace& space);
int parity_of_index(const FockSpace& space, int k);

QuantumState basis_state(Spin s, int n, const FockSpace& space);

/// ρ_spin[s,s'] = Σ_n ⟨s,n|ρ|s',n⟩.
Eigen::Matrix2cd partial_trace_mode(const QuantumState& state);
/// ρ_mode[n,n'] = Σ_s ⟨s,n|ρ|s,n'⟩.
Matrix partial_trace_spin(const QuantumState& state);

Complex expectation(const QuantumState& state, const Operator& op);

}  // namespace qrabi

#include "qrabi/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

namespace qrabi {

namespace {

using SparseMatrix = Eigen::SparseMatrix<Complex>;

SparseMatrix to_sparse(const Matrix& m) { return m.sparseView(Complex{0.0, 0.0}, 0.0); }

/// Terms of H as sparse matrices with their coefficient functions.
struct SparseHamiltonian {
    std::vector<SparseMatrix> ops;
    const TimeDependentHamiltonian* source;

    explicit SparseHamiltonian(const TimeDependentHamiltonian& h) : source(&h) {
        ops.reserve(h.terms().size());
        for (const auto& term : h.terms()) ops.push_back(to_sparse(term.op.matrix()));
    }

    /// out = Σ_k scale·c_k(t)·A_k·x
    template <typename Dense>
    void apply(double t, Complex scale, const Dense& x, Dense& out) const {
        out.setZero();
        for (std::size_t k = 0; k < ops.size(); ++k) out.noalias() += (scale * source->coefficient(k, t)) * (ops[k] * x);
    }
};

int steps_for_interval(const TimeDependentHamiltonian& h, double t0, double t1, int steps_per_period) {
    const double omega = std::max(h.norm_bound(t0, t1), h.max_angular_frequency());
    const double periods = omega * (t1 - t0) / units::two_pi;
    return std::max(1, static_cast<int>(std::ceil(steps_per_period * periods)));
}

void monitor_truncation(const QuantumState& state, double t, const IntegratorOptions& options) {
    if (!options.check_truncation) return;
    const double top = top_fock_population(state);
    if (top > options.truncation_threshold) throw TruncationOverflow(t, top);
}

void require_dims(const TimeDependentHamiltonian& h, int state_dim) {
    if (h.dim() != state_dim)
        throw DimensionMismatch("evolution: Hamiltonian dim " + std::to_string(h.dim()) + " vs state dim " +
                                std::to_string(state_dim));
    FockSpace::from_dim(state_dim);
}

/// Classical RK4 stepping of dy/dt = f(t, y) across [t0, t1] in n equal steps.
template <typename State, typename Rhs>
void rk4_advance(State& y, double t0, double t1, int n, Rhs&& f, State& k1, State& k2, State& k3, State& k4,
                 State& tmp) {
    const double dt = (t1 - t0) / n;
    for (int i = 0; i < n; ++i) {
        const double t = t0 + i * dt;
        f(t, y, k1);
        tmp = y + (0.5 * dt) * k1;
        f(t + 0.5 * dt, tmp, k2);
        tmp = y + (0.5 * dt) * k2;
        f(t + 0.5 * dt, tmp, k3);
        tmp = y + dt * k3;
        f(t + dt, tmp, k4);
        y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
}

std::vector<QuantumState> evolve_static_exact(const Operator& h, const Vector& psi0, const TimeGrid& grid,
                                              const IntegratorOptions& options) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
    const Matrix& v = es.eigenvectors();
    const Eigen::VectorXd& e = es.eigenvalues();
    const Vector c0 = v.adjoint() * psi0;
    std::vector<QuantumState> out;
    out.reserve(grid.size());
    for (double t : grid.samples()) {
        const double dt = t - grid.t_start();
        Vector c(c0.size());
        for (Eigen::Index j = 0; j < c.size(); ++j) c(j) = c0(j) * std::polar(1.0, -e(j) * dt);
        out.push_back(QuantumState::pure_unchecked(v * c));
        monitor_truncation(out.back(), t, options);
    }
    return out;
}

}  // namespace

void NoiseModel::validate() const {
    if (!(heating_rate >= 0.0) || !(cooling_rate >= 0.0) || !(dephasing_rate >= 0.0))
        throw std::invalid_argument("NoiseModel: rates must be >= 0");
}

TimeGrid::TimeGrid(double t_start, std::vector<double> samples) : t_start_(t_start), samples_(std::move(samples)) {
    if (samples_.empty()) throw std::invalid_argument("TimeGrid: no samples");
    if (!(t_start_ >= 0.0)) throw std::invalid_argument("TimeGrid: t_start must be >= 0");
    if (samples_.front() < t_start_) throw std::invalid_argument("TimeGrid: first sample precedes t_start");
    for (std::size_t i = 1; i < samples_.size(); ++i)
        if (!(samples_[i] > samples_[i - 1])) throw std::invalid_argument("TimeGrid: samples not strictly increasing");
}

TimeGrid TimeGrid::uniform(double t0, double t1, std::size_t count) {
    if (count < 2) throw std::invalid_argument("TimeGrid::uniform: need at least 2 points");
    std::vector<double> s(count);
    for (std::size_t i = 0; i < count; ++i) s[i] = t0 + (t1 - t0) * static_cast<double>(i) / (count - 1);
    s.back() = t1;
    return TimeGrid(t0, std::move(s));
}

TruncationOverflow::TruncationOverflow(double time, double population)
    : std::runtime_error("truncation overflow: top two Fock levels hold " + std::to_string(population) +
                         " at t = " + std::to_string(time * 1e6) + " us; increase n_max"),
      time_(time),
      population_(population) {}

double top_fock_population(const QuantumState& state) {
    const FockSpace space = FockSpace::from_dim(state.dim());
    const int d = space.mode_dim();
    double total = 0.0;
    for (int s = 0; s < 2; ++s)
        for (int n = d - 2; n < d; ++n) {
            const int k = s * d + n;
            total += state.is_pure() ? std::norm(state.vector()(k)) : state.density()(k, k).real();
        }
    return total;
}

std::vector<QuantumState> evolve_unitary(const TimeDependentHamiltonian& h, const QuantumState& psi0,
                                         const TimeGrid& grid, const IntegratorOptions& options) {
    if (!psi0.is_pure()) throw std::invalid_argument("evolve_unitary: initial state must be pure");
    require_dims(h, psi0.dim());
    if (h.is_static() && options.exact_static) return evolve_static_exact(h.at(0.0), psi0.vector(), grid, options);

    const SparseHamiltonian sh(h);
    const Complex minus_i{0.0, -1.0};
    auto rhs = [&](double t, const Vector& y, Vector& out) { sh.apply(t, minus_i, y, out); };

    const int dim = psi0.dim();
    Vector y = psi0.vector();
    Vector k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    std::vector<QuantumState> out;
    out.reserve(grid.size());
    double t = grid.t_start();
    for (double target : grid.samples()) {
        if (target > t) {
            const int n = steps_for_interval(h, t, target, options.steps_per_period);
            rk4_advance(y, t, target, n, rhs, k1, k2, k3, k4, tmp);
            t = target;
        }
        out.push_back(QuantumState::pure_unchecked(y));
        monitor_truncation(out.back(), target, options);
    }
    return out;
}

std::vector<QuantumState> evolve_lindblad(const TimeDependentHamiltonian& h, const NoiseModel& noise,
                                          const QuantumState& rho0, const TimeGrid& grid,
                                          const IntegratorOptions& options) {
    noise.validate();
    require_dims(h, rho0.dim());
    const FockSpace space = FockSpace::from_dim(rho0.dim());
    const int dim = space.dim();

    const SparseHamiltonian sh(h);
    const Matrix a = embed_mode(annihilation(space)).matrix();
    const Matrix n = embed_mode(number_operator(space)).matrix();

    struct Jump {
        SparseMatrix op;
        double rate;
    };
    std::vector<Jump> jumps;
    Matrix k_sum = Matrix::Zero(dim, dim);  // Σ κ L†L
    auto add_jump = [&](const Matrix& l, double rate) {
        if (rate <= 0.0) return;
        jumps.push_back({to_sparse(l), rate});
        k_sum += rate * (l.adjoint() * l);
    };
    add_jump(a.adjoint(), noise.heating_rate);
    add_jump(a, noise.cooling_rate);
    add_jump(n, noise.dephasing_rate);
    const SparseMatrix half_k = to_sparse(0.5 * k_sum);

    const Complex minus_i{0.0, -1.0};
    Matrix work(dim, dim), jump_tmp(dim, dim);
    // dρ/dt = Gρ + (Gρ)† + Σ κ L (Lρ)†   with   G = −iH − ½ Σ κ L†L   (ρ Hermitian)
    auto rhs = [&](double t, const Matrix& rho, Matrix& out) {
        sh.apply(t, minus_i, rho, work);
        work.noalias() -= half_k * rho;
        out = work + work.adjoint();
        for (const auto& jump : jumps) {
            jump_tmp.noalias() = jump.op * rho;
            out.noalias() += jump.rate * (jump.op * jump_tmp.adjoint());
        }
    };

    Matrix y = rho0.to_density();
    Matrix k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim), tmp(dim, dim);
    std::vector<QuantumState> out;
    out.reserve(grid.size());
    double t = grid.t_start();
    for (double target : grid.samples()) {
        if (target > t) {
            const int steps = steps_for_interval(h, t, target, options.steps_per_period);
            rk4_advance(y, t, target, steps, rhs, k1, k2, k3, k4, tmp);
            t = target;
        }
        out.push_back(QuantumState::mixed_unchecked(y));
        monitor_truncation(out.back(), target, options);
    }
    return out;
}

bool commutes_with_parity(const Operator& h) {
    const FockSpace space = FockSpace::from_dim(h.dim());
    const double tol = 1e-9 * std::max(1.0, max_abs_entry(h.matrix()));
    for (int i = 0; i < h.dim(); ++i)
        for (int j = 0; j < h.dim(); ++j)
            if (parity_of_index(space, i) != parity_of_index(space, j) && std::abs(h.matrix()(i, j)) >= tol)
                return false;
    return true;
}

EigenResult eigensolve(const Operator& h, int k) {
    if (!h.is_hermitian()) throw std::invalid_argument("eigensolve: operator is not Hermitian");
    if (k < 1 || k > h.dim())
        throw std::invalid_argument("eigensolve: k = " + std::to_string(k) + " outside [1, " + std::to_string(h.dim()) +
                                    "]");
    const int dim = h.dim();
    struct Level {
        double energy;
        Vector state;
        int parity;
    };
    std::vector<Level> levels;
    levels.reserve(dim);
    EigenResult result;

    // Parity labels need a spin ⊗ Fock dimension; other Hermitian matrices are solved plainly.
    const bool structured = dim >= 4 && dim % 2 == 0;
    if (structured && commutes_with_parity(h)) {
        result.parity_resolved = true;
        const FockSpace space = FockSpace::from_dim(dim);
        for (int sector : {+1, -1}) {
            std::vector<int> idx;
            for (int i = 0; i < dim; ++i)
                if (parity_of_index(space, i) == sector) idx.push_back(i);
            const int m = static_cast<int>(idx.size());
            Matrix block(m, m);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) block(i, j) = h.matrix()(idx[i], idx[j]);
            Eigen::SelfAdjointEigenSolver<Matrix> es(block);
            for (int j = 0; j < m; ++j) {
                Vector v = Vector::Zero(dim);
                for (int i = 0; i < m; ++i) v(idx[i]) = es.eigenvectors()(i, j);
                levels.push_back({es.eigenvalues()(j), std::move(v), sector});
            }
        }
        std::stable_sort(levels.begin(), levels.end(),
                         [](const Level& x, const Level& y) { return x.energy < y.energy; });
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
        std::optional<Operator> parity;
        if (structured) parity = parity_operator(FockSpace::from_dim(dim));
        for (int j = 0; j < dim; ++j) {
            Vector v = es.eigenvectors().col(j);
            int label = 0;
            if (parity) label = (v.dot(parity->matrix() * v).real() >= 0.0) ? 1 : -1;
            levels.push_back({es.eigenvalues()(j), std::move(v), label});
        }
    }

    for (int j = 0; j < k; ++j) {
        result.energies.push_back(levels[j].energy);
        result.states.push_back(QuantumState::pure_unchecked(levels[j].state.normalized()));
        result.parities.push_back(levels[j].parity);
    }
    return result;
}

double instantaneous_ground_fidelity(const QuantumState& state, const Operator& h) {
    if (state.dim() != h.dim()) throw DimensionMismatch("instantaneous_ground_fidelity: dimension mismatch");
    const EigenResult eig = eigensolve(h, h.dim());
    const double tol = 1e-9 * std::max(1.0, max_abs_entry(h.matrix()));
    double fidelity = 0.0;
    for (std::size_t j = 0; j < eig.energies.size() && eig.energies[j] - eig.energies.front() <= tol; ++j) {
        const Vector& gs = eig.states[j].vector();
        fidelity += state.is_pure() ? std::norm(gs.dot(state.vector())) : gs.dot(state.density() * gs).real();
    }
    return std::clamp(fidelity, 0.0, 1.0);
}

}  // namespace qrabi

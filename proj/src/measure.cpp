#include "qrabi/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qrabi {

double parity_expectation(const QuantumState& state) {
    const FockSpace space = FockSpace::from_dim(state.dim());
    double value = 0.0;
    for (int k = 0; k < state.dim(); ++k) {
        const double p = state.is_pure() ? std::norm(state.vector()(k)) : state.density()(k, k).real();
        value += parity_of_index(space, k) * p;
    }
    return value;
}

double purity(const Matrix& rho) {
    // Tr ρ² = Σ_ij |ρ_ij|² for Hermitian ρ
    return rho.cwiseAbs2().sum();
}

double purity(const QuantumState& state) {
    if (state.is_pure()) {
        const double n2 = state.vector().squaredNorm();
        return n2 * n2;
    }
    return purity(state.density());
}

double spin_purity(const QuantumState& state) { return purity(Matrix(partial_trace_mode(state))); }

WitnessReport witness(double spin_purity_value, double p_rev) {
    if (spin_purity_value < 0.0 || spin_purity_value > 1.0 + kStateTolerance)
        throw std::invalid_argument("witness: spin purity outside [0, 1]");
    if (p_rev < 0.0 || p_rev > 1.0 + kStateTolerance) throw std::invalid_argument("witness: P_Rev outside [0, 1]");
    WitnessReport r;
    r.spin_purity = spin_purity_value;
    r.revival_probability = p_rev;
    r.witness_upper_bound = spin_purity_value - p_rev * p_rev;
    r.entangled_flag = r.witness_upper_bound < 0.0;
    return r;
}

FockSnapshot fock_populations(const QuantumState& state, bool spin_resolved, double time) {
    const FockSpace space = FockSpace::from_dim(state.dim());
    const int d = space.mode_dim();
    auto pop = [&](int k) { return state.is_pure() ? std::norm(state.vector()(k)) : state.density()(k, k).real(); };

    FockSnapshot snap;
    snap.time = time;
    snap.p_n.assign(d, 0.0);
    std::vector<double> branch[2] = {std::vector<double>(d), std::vector<double>(d)};
    double weight[2] = {0.0, 0.0};
    for (int s = 0; s < 2; ++s)
        for (int n = 0; n < d; ++n) {
            const double p = pop(s * d + n);
            branch[s][n] = p;
            weight[s] += p;
            snap.p_n[n] += p;
        }
    if (spin_resolved) {
        FockSnapshot::SpinResolved sr;
        sr.weight_down = weight[0];
        sr.weight_up = weight[1];
        for (int s = 0; s < 2; ++s)
            if (weight[s] > 0.0)
                for (double& p : branch[s]) p /= weight[s];
        sr.given_down = std::move(branch[0]);
        sr.given_up = std::move(branch[1]);
        snap.spin_resolved = std::move(sr);
    }
    return snap;
}

namespace {

Eigen::MatrixXd bsb_design(std::span<const double> times, int n_levels, double eta_omega, double gamma) {
    Eigen::MatrixXd a(static_cast<Eigen::Index>(times.size()), n_levels);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        const double decay = std::exp(-gamma * t);
        for (int n = 0; n < n_levels; ++n)
            a(static_cast<Eigen::Index>(i), n) = 0.5 * (1.0 - decay * std::cos(std::sqrt(n + 1.0) * eta_omega * t));
    }
    return a;
}

/// min ½‖Ap − y‖² over the probability simplex (primal active-set method).
/// Returns the minimizer; `solves` counts KKT solves.
Eigen::VectorXd simplex_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, int& solves) {
    const int m = static_cast<int>(a.cols());
    Eigen::MatrixXd q = a.transpose() * a;
    q.diagonal().array() += 1e-13 * std::max(1.0, q.trace() / m);
    const Eigen::VectorXd b = a.transpose() * y;

    Eigen::VectorXd p = Eigen::VectorXd::Constant(m, 1.0 / m);
    std::vector<bool> active(m, false);
    const double tol = 1e-14;

    for (int guard = 0; guard < 10 * m + 10; ++guard) {
        std::vector<int> free_idx;
        for (int i = 0; i < m; ++i)
            if (!active[i]) free_idx.push_back(i);
        const int f = static_cast<int>(free_idx.size());

        // KKT system  [Q_FF 1; 1ᵀ 0][p_F; μ] = [b_F; 1]
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(f + 1, f + 1);
        Eigen::VectorXd rhs(f + 1);
        for (int i = 0; i < f; ++i) {
            for (int j = 0; j < f; ++j) kkt(i, j) = q(free_idx[i], free_idx[j]);
            kkt(i, f) = kkt(f, i) = 1.0;
            rhs(i) = b(free_idx[i]);
        }
        rhs(f) = 1.0;
        const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
        ++solves;
        const double mu = sol(f);

        Eigen::VectorXd candidate = Eigen::VectorXd::Zero(m);
        for (int i = 0; i < f; ++i) candidate(free_idx[i]) = sol(i);
        const Eigen::VectorXd dir = candidate - p;

        if (dir.cwiseAbs().maxCoeff() <= 1e-15) {
            // Stationary on the working set: release the active bound with the most negative multiplier.
            const Eigen::VectorXd grad = q * p - b;
            int release = -1;
            double most_negative = -tol * std::max(1.0, b.cwiseAbs().maxCoeff());
            for (int i = 0; i < m; ++i) {
                if (!active[i]) continue;
                const double lambda = grad(i) + mu;
                if (lambda < most_negative) {
                    most_negative = lambda;
                    release = i;
                }
            }
            if (release < 0) break;
            active[release] = false;
            continue;
        }

        double step = 1.0;
        int blocking = -1;
        for (int i : free_idx)
            if (dir(i) < 0.0) {
                const double s = -p(i) / dir(i);
                if (s < step) {
                    step = s;
                    blocking = i;
                }
            }
        p += step * dir;
        if (blocking >= 0) {
            p(blocking) = 0.0;
            active[blocking] = true;
        }
    }
    for (int i = 0; i < m; ++i) p(i) = std::max(0.0, p(i));
    p /= p.sum();
    return p;
}

struct InnerFit {
    Eigen::VectorXd p;
    double sse = 0.0;
};

}  // namespace

BsbSignal synth_bsb_signal(std::span<const double> p_n, double eta_omega, double gamma, const TimeGrid& grid) {
    double total = 0.0;
    for (double p : p_n) {
        if (p < -kStateTolerance) throw std::invalid_argument("synth_bsb_signal: negative population");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-6) throw std::invalid_argument("synth_bsb_signal: populations not normalized");
    BsbSignal s;
    s.times = grid.samples();
    s.eta_omega = eta_omega;
    s.gamma = gamma;
    s.p_up.resize(s.times.size());
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        const double t = s.times[i];
        const double decay = std::exp(-gamma * t);
        double v = 0.0;
        for (std::size_t n = 0; n < p_n.size(); ++n)
            v += p_n[n] * (1.0 - decay * std::cos(std::sqrt(n + 1.0) * eta_omega * t));
        s.p_up[i] = 0.5 * v;
    }
    return s;
}

PhononFit fit_phonon_distribution(const BsbSignal& signal, int n_fit_max, const FitOptions& options) {
    if (n_fit_max < 0) throw std::invalid_argument("fit_phonon_distribution: n_fit_max must be >= 0");
    if (signal.times.size() != signal.p_up.size())
        throw std::invalid_argument("fit_phonon_distribution: times and p_up differ in length");
    const std::size_t needed = 2 * static_cast<std::size_t>(n_fit_max + 2);
    if (signal.times.size() < needed)
        throw std::invalid_argument("fit_phonon_distribution: need at least " + std::to_string(needed) +
                                    " samples, got " + std::to_string(signal.times.size()));

    const int levels = n_fit_max + 1;
    const Eigen::Map<const Eigen::VectorXd> y(signal.p_up.data(), static_cast<Eigen::Index>(signal.p_up.size()));
    int solves = 0;
    auto inner = [&](double gamma) {
        const Eigen::MatrixXd a = bsb_design(signal.times, levels, signal.eta_omega, gamma);
        InnerFit r;
        r.p = simplex_least_squares(a, y, solves);
        r.sse = (a * r.p - y).squaredNorm();
        return r;
    };

    // γ enters nonlinearly; for fixed γ the problem is a simplex-constrained linear least squares.
    // Bracket the best γ on a log grid (seeded with the initial guess), then golden-section refine.
    const double t_span = *std::max_element(signal.times.begin(), signal.times.end());
    const double scale = t_span > 0.0 ? 1.0 / t_span : 1.0;
    std::vector<double> grid{0.0};
    for (int i = 0; i <= 60; ++i) grid.push_back(scale * 1e-3 * std::pow(10.0, 4.5 * i / 60.0));
    grid.push_back(std::max(0.0, options.initial_gamma));
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::size_t best = 0;
    std::vector<double> sse(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        sse[i] = inner(grid[i]).sse;
        if (sse[i] < sse[best]) best = i;
    }

    double lo = grid[best == 0 ? 0 : best - 1];
    double hi = grid[std::min(best + 1, grid.size() - 1)];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = inner(x1).sse;
    double f2 = inner(x2).sse;
    double previous = std::min(f1, f2);
    bool converged = false;
    int iterations = 0;
    while (solves < options.max_iterations) {
        ++iterations;
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = inner(x1).sse;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = inner(x2).sse;
        }
        const double current = std::min(f1, f2);
        const double rel_change = std::abs(previous - current) / std::max(current, std::numeric_limits<double>::min());
        const bool narrow = (hi - lo) <= 1e-9 * std::max(hi, scale);
        previous = current;
        if (narrow || (rel_change < options.tolerance && (hi - lo) <= 1e-6 * std::max(hi, scale)) || current == 0.0) {
            converged = true;
            break;
        }
    }

    double gamma = grid[best];
    InnerFit fit = inner(gamma);
    for (double candidate : {x1, x2}) {
        InnerFit alt = inner(candidate);
        if (alt.sse < fit.sse) {
            fit = std::move(alt);
            gamma = candidate;
        }
    }

    PhononFit out;
    out.p_n.assign(fit.p.data(), fit.p.data() + fit.p.size());
    out.gamma = gamma;
    out.residual = std::sqrt(fit.sse / static_cast<double>(signal.times.size()));
    out.iterations = iterations;
    out.converged = converged;
    return out;
}

std::vector<double> sample_shots(std::span<const double> probabilities, int shots, std::mt19937_64& rng) {
    if (shots < 0) throw std::invalid_argument("sample_shots: shots must be >= 0");
    std::vector<double> out(probabilities.begin(), probabilities.end());
    if (shots == 0) return out;
    for (double& p : out) {
        std::binomial_distribution<int> draw(shots, std::clamp(p, 0.0, 1.0));
        p = static_cast<double>(draw(rng)) / shots;
    }
    return out;
}

}  // namespace qrabi

// measure.hpp: parity, purity, the purity-based entanglement witness,
// Fock populations, and blue-sideband readout synthesis / fitting.

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "qrabi/evolve.hpp"
#include "qrabi/hilbert.hpp"

namespace qrabi {

struct WitnessReport {
    double spin_purity = 1.0;
    double revival_probability = 0.0;
    double witness_upper_bound = 0.0;  // spin_purity − revival_probability²
    bool entangled_flag = false;       // sufficient condition only
};

struct FockSnapshot {
    struct SpinResolved {
        std::vector<double> given_down;  // p(n|↓)
        std::vector<double> given_up;    // p(n|↑)
        double weight_down = 0.0;
        double weight_up = 0.0;
    };

    double time = 0.0;
    std::vector<double> p_n;
    std::optional<SpinResolved> spin_resolved;
};

struct BsbSignal {
    std::vector<double> times;
    std::vector<double> p_up;
    double eta_omega = 0.0;  // rad/s
    double gamma = 0.0;      // 1/s
};

struct FitOptions {
    double initial_gamma = 100.0;  // 1/s
    int max_iterations = 5000;
    double tolerance = 1e-10;      // relative change of the residual
};

struct PhononFit {
    std::vector<double> p_n;
    double gamma = 0.0;
    double residual = 0.0;  // RMS of model − data
    int iterations = 0;
    bool converged = false;
};

/// ⟨Π⟩ with Π|↓,0⟩ = +|↓,0⟩.
double parity_expectation(const QuantumState& state);

double purity(const Matrix& rho);
double purity(const QuantumState& state);
double spin_purity(const QuantumState& state);

WitnessReport witness(double spin_purity, double p_rev);

FockSnapshot fock_populations(const QuantumState& state, bool spin_resolved, double time = 0.0);

/// P_↑(t) = ½ Σ_n p(n)[1 − e^{−γt} cos(√(n+1) ηΩ t)].
BsbSignal synth_bsb_signal(std::span<const double> p_n, double eta_omega, double gamma, const TimeGrid& grid);

/// Least squares over {p_n >= 0, Σ p_n = 1, γ >= 0} for n = 0..n_fit_max.
PhononFit fit_phonon_distribution(const BsbSignal& signal, int n_fit_max, const FitOptions& options = {});

/// Replaces each probability by the mean of `shots` Bernoulli trials.
std::vector<double> sample_shots(std::span<const double> probabilities, int shots, std::mt19937_64& rng);

/// Fit range default: the generating n_max, capped at 15.
inline int default_n_fit_max(int n_max) { return n_max < 15 ? n_max : 15; }

}  // namespace qrabi

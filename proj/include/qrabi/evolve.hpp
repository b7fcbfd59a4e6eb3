// evolve.hpp: unitary and Lindblad time evolution, parity-resolved eigensolver.

#pragma once

#include <stdexcept>
#include <vector>

#include "qrabi/hilbert.hpp"
#include "qrabi/model.hpp"

namespace qrabi {

/// Motional-mode decoherence: jumps √κ↑ a†, √κ↓ a, √κ_φ a†a.
struct NoiseModel {
    double heating_rate = 0.0;    // quanta/s
    double cooling_rate = 0.0;    // quanta/s
    double dephasing_rate = 0.0;  // 1/s

    void validate() const;
    bool is_noiseless() const { return heating_rate == 0.0 && cooling_rate == 0.0 && dephasing_rate == 0.0; }

    /// κ↑ = κ↓ = 60 quanta/s, κ_φ = 500 /s. Illustrative magnitudes, not measured ones.
    static NoiseModel defaults() { return {60.0, 60.0, 500.0}; }
};

/// Sample times strictly increasing and not before t_start (the time of the initial state).
class TimeGrid {
public:
    TimeGrid(double t_start, std::vector<double> samples);
    /// `count` points from t0 to t1 inclusive, with t_start = t0.
    static TimeGrid uniform(double t0, double t1, std::size_t count);

    double t_start() const { return t_start_; }
    double t_end() const { return samples_.back(); }
    const std::vector<double>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }

private:
    double t_start_;
    std::vector<double> samples_;
};

struct EigenResult {
    std::vector<double> energies;  // ascending
    std::vector<QuantumState> states;
    std::vector<int> parities;     // ±1
    bool parity_resolved = false;  // true when [H, Π] = 0 and labels are exact
};

struct IntegratorOptions {
    int steps_per_period = 64;  // per period of the fastest frequency present; >= 40 required
    bool exact_static = true;   // spectral propagator for static H in evolve_unitary
    bool check_truncation = true;
    double truncation_threshold = 1e-6;
};

class TruncationOverflow : public std::runtime_error {
public:
    TruncationOverflow(double time, double population);
    double time() const { return time_; }
    double population() const { return population_; }

private:
    double time_;
    double population_;
};

/// Population in the two highest Fock levels (both spin branches).
double top_fock_population(const QuantumState& state);

std::vector<QuantumState> evolve_unitary(const TimeDependentHamiltonian& h, const QuantumState& psi0,
                                         const TimeGrid& grid, const IntegratorOptions& options = {});

std::vector<QuantumState> evolve_lindblad(const TimeDependentHamiltonian& h, const NoiseModel& noise,
                                          const QuantumState& rho0, const TimeGrid& grid,
                                          const IntegratorOptions& options = {});

/// Lowest k eigenpairs. When H commutes with Π the two parity blocks are
/// diagonalized separately, so degenerate levels come out as parity eigenstates.
EigenResult eigensolve(const Operator& h, int k);

bool commutes_with_parity(const Operator& h);

/// Overlap with the ground space of h (projector onto all levels degenerate with the lowest).
double instantaneous_ground_fidelity(const QuantumState& state, const Operator& h);

}  // namespace qrabi

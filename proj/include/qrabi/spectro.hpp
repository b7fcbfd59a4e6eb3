// spectro.hpp: probe-drive spectroscopy and exact-diagonalization reference curves.

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qrabi/evolve.hpp"
#include "qrabi/model.hpp"

namespace qrabi {

struct SweepResult {
    double ratio = 0.0;
    std::vector<double> probe_freqs;  // Hz, strictly increasing
    std::vector<double> p_up_final;
    std::vector<double> detected_peaks;  // Hz
};

struct SweepOptions {
    int n_max = 0;  // 0 → default_n_max
    IntegratorOptions integrator{};
    /// Replaces the exactly diagonalized ground state (e.g. with an adiabatically prepared one).
    std::optional<QuantumState> initial_state;
    unsigned threads = 0;  // 0 → hardware concurrency
};

struct PeakCriteria {
    double min_height = 0.1;
    double min_prominence = 0.05;
};

/// g_p/g = 0.02 for 350 μs up to ratio 0.3, g_p/g = 0.01 for 450 μs from 0.4 on.
ProbeParams probe_config_for_ratio(double ratio, double g);

/// `points` frequencies (Hz) over [lo, hi]·ω_m/2π.
std::vector<double> default_sweep_grid(double omega_m, std::size_t points = 201, double lo = 0.25, double hi = 3.5);

/// Starts in the ground state of the resonant model at `ratio`, applies the probe
/// for probe.duration at each frequency, records the final ⟨σ_+σ_−⟩.
SweepResult probe_sweep(double ratio, double g, const ProbeParams& probe, std::vector<double> freq_grid,
                        const SweepOptions& options = {});

/// Lowest k splittings E_i − E_gs to states of parity opposite the ground state, in units of ω_m.
/// Resonant model (ω₀ = ω_m); ratio 0 is the uncoupled limit.
std::vector<std::vector<double>> reference_spectrum(std::span<const double> ratio_grid, double g, int k);

std::vector<double> detect_peaks(std::span<const double> freqs, std::span<const double> values,
                                 const PeakCriteria& criteria = {});
std::vector<double> detect_peaks(const SweepResult& sweep);

}  // namespace qrabi

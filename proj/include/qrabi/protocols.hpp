// protocols.hpp: drivers for the three trapped-ion experiments:
// coupling-regime dynamics, DSC wave-packet bouncing, and adiabatic
// ground-state preparation with time reversal.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qrabi/evolve.hpp"
#include "qrabi/measure.hpp"
#include "qrabi/model.hpp"

namespace qrabi {

/// Sampled channels over a common time axis; channel order is insertion order.
class TimeSeries {
public:
    TimeSeries() = default;
    explicit TimeSeries(std::vector<double> times) : times_(std::move(times)) {}

    const std::vector<double>& times() const { return times_; }
    std::size_t size() const { return times_.size(); }

    void add_channel(std::string name, std::vector<double> values);
    bool has_channel(std::string_view name) const;
    const std::vector<double>& channel(std::string_view name) const;
    std::vector<double>& channel(std::string_view name);
    std::vector<std::string> channel_names() const;

    /// Index of the sample closest to t.
    std::size_t nearest_index(double t) const;

private:
    std::vector<double> times_;
    std::vector<std::pair<std::string, std::vector<double>>> channels_;
};

struct ProtocolOptions {
    std::size_t samples = 0;  // 0 → protocol default
    int n_max = 0;            // 0 → default_n_max of the target parameters
    IntegratorOptions integrator{};
    int shots = 0;            // 0 → exact probabilities
    std::uint64_t seed = 1;
};

/// Resonant Rabi model (ω₀ = ω_m = g/ratio) from |↑,0⟩; channels p_up, n_mean, N_total.
TimeSeries run_regime_dynamics(double ratio, double g, double t_max, const NoiseModel& noise,
                               const ProtocolOptions& options = {});

enum class BounceCase { degenerate, nondegenerate };

struct BounceResult {
    TimeSeries series;  // p0, n_mean, p_up
    std::vector<FockSnapshot> snapshots;
    RabiParams params;
    double period = 0.0;  // T = 2π/ω_m
};

/// g = 2π·12.5 kHz, g/ω_m = 1.25, ω₀ = 0 or 0.8g, from |↓,0⟩.
/// Empty snapshot_times → 7 equally spaced instants in [0, T].
BounceResult run_bounce(BounceCase which, int periods, const NoiseModel& noise,
                        std::vector<double> snapshot_times = {}, const ProtocolOptions& options = {});

struct AdiabaticResult {
    TimeSeries series;  // p_up, spin_purity, fidelity, parity, n_mean
    RampSchedule schedule;
    int n_max = 0;
    FockSnapshot target_snapshot;  // spin-resolved, at t_tar
    double target_fidelity = 0.0;
    double target_spin_purity = 0.0;
    double target_total_purity = 0.0;
    double target_parity = 0.0;
    std::optional<QuantumState> target_state;
    std::optional<double> revival_probability;   // ⟨↓,0|ρ(t_rev)|↓,0⟩
    std::optional<double> reversed_total_purity;
    std::optional<WitnessReport> witness;
    /// Tr ρ_tar² ≥ Tr ρ_rev² ≥ P_Rev²; false flags a noise model that breaks the assumption.
    bool purity_chain_holds = true;
};

/// g = 2π·12.5 kHz, δ_r = 0, δ_b(t) from the schedule, starting in |↓,0⟩.
/// The schedule's δ_tar must equal 2g/target_ratio.
AdiabaticResult run_adiabatic(double target_ratio, const RampSchedule& schedule, const NoiseModel& noise,
                              bool with_reverse, const ProtocolOptions& options = {});

}  // namespace qrabi

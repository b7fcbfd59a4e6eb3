// model.hpp: Rabi-model Hamiltonians, the bichromatic drive frame and its
// parameter mapping, detuning ramps, and the parity-breaking probe.
//
// Internal units: angular frequencies in rad/s, times in seconds.

#pragma once

#include <functional>
#include <numbers>
#include <vector>

#include "qrabi/hilbert.hpp"

namespace qrabi {

namespace units {
inline constexpr double two_pi = 2.0 * std::numbers::pi;
/// Ordinary frequency in kHz → angular frequency in rad/s.
constexpr double khz(double f) { return two_pi * 1e3 * f; }
constexpr double to_khz(double omega) { return omega / (two_pi * 1e3); }
constexpr double us(double t) { return t * 1e-6; }
constexpr double to_us(double t) { return t * 1e6; }
}  // namespace units

/// Coupling used throughout the trapped-ion experiments: 2π·12.5 kHz.
inline constexpr double kIonCoupling = units::khz(12.5);

struct RabiParams {
    double omega0 = 0.0;   // qubit splitting
    double omega_m = 0.0;  // mode frequency (0 is legal)
    double g = 0.0;        // coupling, >= 0

    /// g/ω_m; throws std::domain_error when ω_m <= 0.
    double coupling_ratio() const;
    void validate() const;

    /// ω₀ = ω_m = g/ratio.
    static RabiParams resonant(double ratio, double g);
};

struct IonDriveParams {
    double delta_r = 0.0;    // signed red-sideband detuning
    double delta_b = 0.0;    // signed blue-sideband detuning
    double eta_omega = 0.0;  // ηΩ with Ω = Ω_r = Ω_b, >= 0

    void validate() const;
};

/// δ_b(t) = (δ_max − δ_tar) e^{−t/τ} + δ_tar on [0, t_tar], snapped to δ_tar at t_tar.
/// With `reversed` the domain extends to [0, 2·t_tar] and the second leg mirrors the first.
struct RampSchedule {
    double delta_max = 0.0;
    double delta_tar = 0.0;
    double tau = 0.0;
    double t_tar = 0.0;
    bool reversed = false;

    void validate() const;
    double end_time() const { return reversed ? 2.0 * t_tar : t_tar; }

    /// δ_max = 2π·200 kHz, t_tar = 300 μs, τ = t_tar/10; δ_tar = 2g/target_ratio.
    static RampSchedule standard(double target_ratio, double g = kIonCoupling, bool reversed = false);
};

struct ProbeParams {
    double g_p = 0.0;       // rad/s
    double nu_p = 0.0;      // Hz (ordinary frequency)
    double duration = 0.0;  // s

    void validate() const;
};

/// Sum Σ_k c_k(t)·A_k of fixed operators with scalar coefficients.
///
/// Individual terms need not be Hermitian (the bichromatic drive is built
/// from σ_+a and its conjugate), but the sum must be at every t.
class TimeDependentHamiltonian {
public:
    using Coefficient = std::function<Complex(double)>;

    struct Term {
        Operator op;
        Coefficient coefficient;  // empty → constant 1
        double angular_frequency = 0.0;  // fastest rate present in the coefficient, for step control
    };

    TimeDependentHamiltonian() = default;
    explicit TimeDependentHamiltonian(std::vector<Term> terms);
    static TimeDependentHamiltonian constant(Operator h);

    int dim() const { return dim_; }
    bool is_static() const;
    const std::vector<Term>& terms() const { return terms_; }

    Complex coefficient(std::size_t k, double t) const;
    Operator at(double t) const;
    /// Upper bound on ‖H(t)‖ for t in [t0, t1], from coefficients sampled at the ends and midpoint.
    double norm_bound(double t0, double t1) const;
    double max_angular_frequency() const;

private:
    std::vector<Term> terms_;
    int dim_ = 0;
};

/// H = (ω₀/2)σ_z + ω_m a†a + g σ_x(a + a†).
Operator qrm_hamiltonian(const RabiParams& p, const FockSpace& space);
/// Jaynes-Cummings coupling g(σ_+a + σ_−a†) alone, without free terms.
Operator jaynes_cummings_coupling(double g, const FockSpace& space);

/// ω₀ = (δ_b+δ_r)/2, ω_m = (δ_b−δ_r)/2, g = ηΩ/2.
RabiParams ion_to_qrm(const IonDriveParams& d);
/// δ_b = ω₀+ω_m, δ_r = ω₀−ω_m, ηΩ = 2g.
IonDriveParams qrm_to_ion(const RabiParams& p);

/// H_br(t) = (ηΩ/2) σ_+(a e^{iδ_r t} + a† e^{iδ_b t}) + h.c.
Operator bichromatic_hamiltonian(const IonDriveParams& d, double t, const FockSpace& space);
TimeDependentHamiltonian bichromatic_drive(const IonDriveParams& d, const FockSpace& space);

double schedule_value(const RampSchedule& s, double t);
/// Lab-frame Rabi Hamiltonian with δ_r = 0, ηΩ = 2g and δ_b following the schedule.
TimeDependentHamiltonian ramp_drive(double g, const RampSchedule& s, const FockSpace& space);
RabiParams ramp_params(double g, const RampSchedule& s, double t);

/// H_QRM + g_p sin(2πν_p t) σ_x.
Operator probed_hamiltonian(const RabiParams& p, const ProbeParams& pr, double t, const FockSpace& space);
TimeDependentHamiltonian probed_drive(const RabiParams& p, const ProbeParams& pr, const FockSpace& space);

/// max(20, ⌈8(g/ω_m)² + 10⌉) for ω_m > 0, otherwise 40.
int default_n_max(const RabiParams& p);

}  // namespace qrabi

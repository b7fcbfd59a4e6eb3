#include "qrabi/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qrabi {

// ------------------------------------------------------------ parameter records

double RabiParams::coupling_ratio() const {
    if (!(omega_m > 0.0)) throw std::domain_error("coupling_ratio: omega_m must be > 0");
    return g / omega_m;
}

void RabiParams::validate() const {
    if (!(g >= 0.0)) throw std::invalid_argument("RabiParams: g must be >= 0");
    if (!std::isfinite(omega0) || !std::isfinite(omega_m)) throw std::invalid_argument("RabiParams: non-finite value");
}

RabiParams RabiParams::resonant(double ratio, double g) {
    if (!(ratio > 0.0)) throw std::invalid_argument("RabiParams::resonant: ratio must be > 0");
    const double w = g / ratio;
    return {w, w, g};
}

void IonDriveParams::validate() const {
    if (!(eta_omega >= 0.0)) throw std::invalid_argument("IonDriveParams: eta_omega must be >= 0");
}

void RampSchedule::validate() const {
    if (!(tau > 0.0)) throw std::invalid_argument("RampSchedule: tau must be > 0");
    if (!(t_tar > 0.0)) throw std::invalid_argument("RampSchedule: t_tar must be > 0");
}

RampSchedule RampSchedule::standard(double target_ratio, double g, bool reversed) {
    if (!(target_ratio > 0.0)) throw std::invalid_argument("RampSchedule::standard: ratio must be > 0");
    const double t_tar = units::us(300.0);
    return {units::khz(200.0), 2.0 * g / target_ratio, t_tar / 10.0, t_tar, reversed};
}

void ProbeParams::validate() const {
    if (!(g_p >= 0.0)) throw std::invalid_argument("ProbeParams: g_p must be >= 0");
    if (!(duration >= 0.0)) throw std::invalid_argument("ProbeParams: duration must be >= 0");
}

int default_n_max(const RabiParams& p) {
    if (!(p.omega_m > 0.0)) return 40;
    const double r = p.g / p.omega_m;
    return std::max(20, static_cast<int>(std::ceil(8.0 * r * r + 10.0)));
}

// ------------------------------------------------------ TimeDependentHamiltonian

TimeDependentHamiltonian::TimeDependentHamiltonian(std::vector<Term> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw std::invalid_argument("TimeDependentHamiltonian: no terms");
    dim_ = terms_.front().op.dim();
    for (const auto& term : terms_)
        if (term.op.dim() != dim_) throw DimensionMismatch("TimeDependentHamiltonian: term dimension mismatch");
}

TimeDependentHamiltonian TimeDependentHamiltonian::constant(Operator h) {
    if (!h.is_hermitian()) throw std::invalid_argument("TimeDependentHamiltonian::constant: H not Hermitian");
    return TimeDependentHamiltonian({Term{std::move(h), {}, 0.0}});
}

bool TimeDependentHamiltonian::is_static() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const Term& t) { return !t.coefficient; });
}

Complex TimeDependentHamiltonian::coefficient(std::size_t k, double t) const {
    const auto& c = terms_.at(k).coefficient;
    return c ? c(t) : Complex{1.0, 0.0};
}

Operator TimeDependentHamiltonian::at(double t) const {
    Matrix sum = Matrix::Zero(dim_, dim_);
    for (std::size_t k = 0; k < terms_.size(); ++k) sum += coefficient(k, t) * terms_[k].op.matrix();
    return Operator::hermitian(std::move(sum));
}

double TimeDependentHamiltonian::norm_bound(double t0, double t1) const {
    double best = 0.0;
    for (double t : {t0, 0.5 * (t0 + t1), t1}) {
        double bound = 0.0;
        for (std::size_t k = 0; k < terms_.size(); ++k) bound += std::abs(coefficient(k, t)) * terms_[k].op.norm_bound();
        best = std::max(best, bound);
    }
    return best;
}

double TimeDependentHamiltonian::max_angular_frequency() const {
    double w = 0.0;
    for (const auto& term : terms_) w = std::max(w, std::abs(term.angular_frequency));
    return w;
}

// ---------------------------------------------------------------- Hamiltonians

namespace {

struct ModeOps {
    Operator sz, sx, sp_a, sp_adag, number, x_quad;
};

ModeOps building_blocks(const FockSpace& space) {
    const Operator a = annihilation(space);
    const Operator adag = creation(space);
    return {
        embed_spin(pauli(PauliAxis::z), space),
        embed_spin(pauli(PauliAxis::x), space),
        embed(pauli(PauliAxis::plus), a),
        embed(pauli(PauliAxis::plus), adag),
        embed_mode(number_operator(space)),
        embed(pauli(PauliAxis::x), a + adag),
    };
}

}  // namespace

Operator qrm_hamiltonian(const RabiParams& p, const FockSpace& space) {
    p.validate();
    const ModeOps ops = building_blocks(space);
    Matrix h = 0.5 * p.omega0 * ops.sz.matrix() + p.omega_m * ops.number.matrix() + p.g * ops.x_quad.matrix();
    return Operator::hermitian(std::move(h));
}

Operator jaynes_cummings_coupling(double g, const FockSpace& space) {
    const Operator sp_a = embed(pauli(PauliAxis::plus), annihilation(space));
    return Operator::hermitian(g * (sp_a.matrix() + sp_a.matrix().adjoint()));
}

RabiParams ion_to_qrm(const IonDriveParams& d) {
    return {0.5 * (d.delta_b + d.delta_r), 0.5 * (d.delta_b - d.delta_r), 0.5 * d.eta_omega};
}

IonDriveParams qrm_to_ion(const RabiParams& p) {
    return {p.omega0 - p.omega_m, p.omega0 + p.omega_m, 2.0 * p.g};
}

TimeDependentHamiltonian bichromatic_drive(const IonDriveParams& d, const FockSpace& space) {
    d.validate();
    const ModeOps ops = building_blocks(space);
    const double amp = 0.5 * d.eta_omega;
    const double dr = d.delta_r;
    const double db = d.delta_b;
    using Term = TimeDependentHamiltonian::Term;
    std::vector<Term> terms;
    terms.push_back(Term{ops.sp_a * amp, [dr](double t) { return std::polar(1.0, dr * t); }, dr});
    terms.push_back(Term{ops.sp_adag * amp, [db](double t) { return std::polar(1.0, db * t); }, db});
    terms.push_back(Term{ops.sp_a.adjoint() * amp, [dr](double t) { return std::polar(1.0, -dr * t); }, dr});
    terms.push_back(Term{ops.sp_adag.adjoint() * amp, [db](double t) { return std::polar(1.0, -db * t); }, db});
    return TimeDependentHamiltonian(std::move(terms));
}

Operator bichromatic_hamiltonian(const IonDriveParams& d, double t, const FockSpace& space) {
    return bichromatic_drive(d, space).at(t);
}

double schedule_value(const RampSchedule& s, double t) {
    s.validate();
    if (t < 0.0 || t > s.end_time())
        throw std::out_of_range("schedule_value: t = " + std::to_string(t) + " outside [0, " +
                                std::to_string(s.end_time()) + "]");
    const double leg_t = (t > s.t_tar) ? 2.0 * s.t_tar - t : t;
    if (leg_t >= s.t_tar) return s.delta_tar;
    return (s.delta_max - s.delta_tar) * std::exp(-leg_t / s.tau) + s.delta_tar;
}

RabiParams ramp_params(double g, const RampSchedule& s, double t) {
    return ion_to_qrm({0.0, schedule_value(s, t), 2.0 * g});
}

TimeDependentHamiltonian ramp_drive(double g, const RampSchedule& s, const FockSpace& space) {
    s.validate();
    const ModeOps ops = building_blocks(space);
    // With δ_r = 0: ω₀ = ω_m = δ_b/2, hence H = δ_b(t)·(σ_z/4 + a†a/2) + g σ_x(a + a†).
    Operator free = Operator::hermitian(0.25 * ops.sz.matrix() + 0.5 * ops.number.matrix());
    using Term = TimeDependentHamiltonian::Term;
    std::vector<Term> terms;
    terms.push_back(Term{std::move(free), [s](double t) {
                             return Complex{schedule_value(s, std::clamp(t, 0.0, s.end_time())), 0.0};
                         },
                         0.0});
    terms.push_back(Term{ops.x_quad * g, {}, 0.0});
    return TimeDependentHamiltonian(std::move(terms));
}

Operator probed_hamiltonian(const RabiParams& p, const ProbeParams& pr, double t, const FockSpace& space) {
    return probed_drive(p, pr, space).at(t);
}

TimeDependentHamiltonian probed_drive(const RabiParams& p, const ProbeParams& pr, const FockSpace& space) {
    pr.validate();
    const double w = units::two_pi * pr.nu_p;
    using Term = TimeDependentHamiltonian::Term;
    std::vector<Term> terms;
    terms.push_back(Term{qrm_hamiltonian(p, space), {}, 0.0});
    terms.push_back(Term{embed_spin(pauli(PauliAxis::x), space) * pr.g_p,
                         [w](double t) { return Complex{std::sin(w * t), 0.0}; }, w});
    return TimeDependentHamiltonian(std::move(terms));
}

}  // namespace qrabi

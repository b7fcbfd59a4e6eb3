#include <doctest.h>

#include <cmath>
#include <random>

#include "qrabi/evolve.hpp"
#include "qrabi/model.hpp"
#include "support.hpp"

using namespace qrabi;
using units::khz;
using units::us;

namespace {

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS((RabiParams{1.0, 1.0, -0.1}.validate()), std::invalid_argument);
    CHECK_NOTHROW((RabiParams{1.0, 0.0, 1.0}.validate()));
    CHECK_THROWS_AS((RabiParams{1.0, 0.0, 1.0}.coupling_ratio()), std::domain_error);
    CHECK(std::abs(RabiParams::resonant(1.2, kIonCoupling).coupling_ratio() - 1.2) < 1e-12);
    CHECK_THROWS_AS((IonDriveParams{0.0, 1.0, -1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((RampSchedule{1.0, 0.5, 0.0, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((RampSchedule{1.0, 0.5, 1.0, 0.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ProbeParams{-1.0, 1.0, 1.0}.validate()), std::invalid_argument);
}

TEST_CASE("uncoupled resonant model has |↓,0⟩ at −ω/2") {
    const double w = khz(100.0);
    const FockSpace s(10);
    const auto eig = eigensolve(qrm_hamiltonian({w, w, 0.0}, s), 3);
    CHECK(std::abs(eig.energies[0] + w / 2) < 1e-9 * w);
    CHECK(std::abs(std::norm(eig.states[0].vector()(0)) - 1.0) < 1e-12);
    CHECK(std::abs(eig.energies[1] - w / 2) < 1e-9 * w);
    CHECK(std::abs(eig.energies[2] - w / 2) < 1e-9 * w);
}

TEST_CASE("qrm ground state at ratio 1.2 has parity +1") {
    const RabiParams p = RabiParams::resonant(1.2, kIonCoupling);
    const FockSpace s(default_n_max(p));
    const auto eig = eigensolve(qrm_hamiltonian(p, s), 1);
    CHECK(eig.parity_resolved);
    CHECK(eig.parities[0] == 1);
    CHECK(std::abs(expectation(eig.states[0], parity_operator(s)).real() - 1.0) < 1e-9);
}

TEST_CASE("[H, Π] = 0 and the probe anticommutes with Π (random parameters)") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const RabiParams p{khz(400.0 * uni(rng)), khz(400.0 * uni(rng)), khz(50.0 * uni(rng))};
        const FockSpace s(1 + trial % 25);
        const Operator h = qrm_hamiltonian(p, s);
        CHECK(h.is_hermitian());
        const Operator pi = parity_operator(s);
        CHECK(max_abs_entry(commutator(h, pi).matrix()) < 1e-9 * std::max(1.0, max_abs_entry(h.matrix())));
        const Operator x = embed_spin(pauli(PauliAxis::x), s);
        CHECK(max_abs_entry(anticommutator(x, pi).matrix()) < 1e-12);
        CHECK(commutes_with_parity(h));
    }
}

TEST_CASE("ion drive mapping examples") {
    const auto jc = ion_to_qrm({0.0, khz(625.0), khz(25.0)});
    CHECK(rel_close(jc.omega0, khz(312.5), 1e-12));
    CHECK(rel_close(jc.omega_m, khz(312.5), 1e-12));
    CHECK(rel_close(jc.g, khz(12.5), 1e-12));
    CHECK(rel_close(jc.coupling_ratio(), 0.04, 1e-12));

    const auto degenerate = ion_to_qrm({-khz(10.0), khz(10.0), khz(25.0)});
    CHECK(degenerate.omega0 == 0.0);
    CHECK(rel_close(degenerate.omega_m, khz(10.0), 1e-12));
    CHECK(rel_close(degenerate.coupling_ratio(), 1.25, 1e-12));

    const auto nondeg = ion_to_qrm({0.0, khz(20.0), khz(25.0)});
    CHECK(rel_close(nondeg.omega0, 0.8 * kIonCoupling, 1e-12));
    CHECK(rel_close(nondeg.coupling_ratio(), 1.25, 1e-12));

    for (double r : {0.04, 0.6, 1.2, 2.0}) {
        const auto d = qrm_to_ion(RabiParams::resonant(r, kIonCoupling));
        CHECK(d.delta_r == 0.0);
        CHECK(rel_close(d.delta_b, 2.0 * kIonCoupling / r, 1e-12));
    }
    CHECK(rel_close(RampSchedule::standard(1.2).delta_tar, khz(2.0 * 12.5 / 1.2), 1e-12));
    CHECK(rel_close(khz(2.0 * 12.5 / 1.2), khz(20.8333333333), 1e-10));
}

TEST_CASE("ion mapping round trip on random parameters") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const IonDriveParams d{khz(500.0 * uni(rng)), khz(500.0 * uni(rng)), khz(50.0 * std::abs(uni(rng)))};
        const IonDriveParams back = qrm_to_ion(ion_to_qrm(d));
        const double scale = std::max(std::abs(d.delta_r), std::abs(d.delta_b));
        CHECK(std::abs(back.delta_r - d.delta_r) <= 1e-12 * scale);
        CHECK(std::abs(back.delta_b - d.delta_b) <= 1e-12 * scale);
        CHECK(rel_close(back.eta_omega, d.eta_omega, 1e-12));

        const RabiParams p{khz(300.0 * uni(rng)), khz(300.0 * uni(rng)), khz(30.0 * std::abs(uni(rng)))};
        const RabiParams q = ion_to_qrm(qrm_to_ion(p));
        const double pscale = std::max(std::abs(p.omega0), std::abs(p.omega_m));
        CHECK(std::abs(q.omega0 - p.omega0) <= 1e-12 * pscale);
        CHECK(std::abs(q.omega_m - p.omega_m) <= 1e-12 * pscale);
        CHECK(rel_close(q.g, p.g, 1e-12));
    }
}

TEST_CASE("bichromatic hamiltonian at t = 0 and with no drive") {
    const FockSpace s(8);
    const IonDriveParams d{khz(3.0), khz(17.0), khz(25.0)};
    const Matrix h0 = bichromatic_hamiltonian(d, 0.0, s).matrix();
    const Matrix expected = qrm_hamiltonian({0.0, 0.0, d.eta_omega / 2}, s).matrix();
    CHECK(test::max_abs(h0 - expected) < 1e-9);
    CHECK(max_abs_entry(bichromatic_hamiltonian({khz(3.0), khz(17.0), 0.0}, 1e-4, s).matrix()) == 0.0);
    for (double t : {0.0, 1.3e-5, 7.7e-5}) {
        const Operator ht = bichromatic_hamiltonian(d, t, s);
        CHECK(ht.is_hermitian());
        CHECK(test::max_abs(bichromatic_drive(d, s).at(t).matrix() - ht.matrix()) < 1e-9);
    }
}

TEST_CASE("ramp schedule values") {
    const RampSchedule s = RampSchedule::standard(1.2);
    CHECK(rel_close(s.delta_max, khz(200.0), 1e-15));
    CHECK(rel_close(s.tau, us(30.0), 1e-15));
    CHECK(schedule_value(s, 0.0) == s.delta_max);
    CHECK(rel_close(schedule_value(s, s.tau), s.delta_tar + (s.delta_max - s.delta_tar) / std::exp(1.0), 1e-12));
    CHECK(schedule_value(s, s.t_tar) == s.delta_tar);
    CHECK_THROWS_AS(schedule_value(s, 1.01 * s.t_tar), std::out_of_range);
    CHECK_THROWS_AS(schedule_value(s, -1e-9), std::out_of_range);

    RampSchedule r = s;
    r.reversed = true;
    CHECK(r.end_time() == 2.0 * s.t_tar);
    CHECK(schedule_value(r, 2.0 * s.t_tar) == s.delta_max);
    for (double t : {0.0, us(10.0), us(123.0), us(299.0)})
        CHECK(rel_close(schedule_value(r, 2.0 * s.t_tar - t), schedule_value(s, t), 1e-12));

    // Strictly decreasing on the forward leg.
    double prev = schedule_value(s, 0.0);
    for (int i = 1; i <= 300; ++i) {
        const double v = schedule_value(s, s.t_tar * i / 300.0);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("ramp drive reproduces the instantaneous rabi hamiltonian") {
    const RampSchedule s = RampSchedule::standard(1.5, kIonCoupling, true);
    const FockSpace space(30);
    const auto h = ramp_drive(kIonCoupling, s, space);
    for (double t : {0.0, us(20.0), us(300.0), us(450.0), us(600.0)}) {
        const RabiParams p = ramp_params(kIonCoupling, s, t);
        CHECK(p.omega0 == doctest::Approx(p.omega_m));
        CHECK(rel_close(p.omega0 + p.omega_m, schedule_value(s, t), 1e-12));
        CHECK(test::max_abs(h.at(t).matrix() - qrm_hamiltonian(p, space).matrix()) < 1e-6);
    }
}

TEST_CASE("probed hamiltonian") {
    const RabiParams p = RabiParams::resonant(0.3, khz(50.0));
    const FockSpace s(20);
    const Matrix h = qrm_hamiltonian(p, s).matrix();
    CHECK(test::max_abs(probed_hamiltonian(p, {0.0, 1e5, us(350.0)}, us(3.3), s).matrix() - h) == 0.0);
    const ProbeParams pr{0.02 * p.g, 4e5, us(350.0)};
    CHECK(test::max_abs(probed_hamiltonian(p, pr, 0.0, s).matrix() - h) == 0.0);
    CHECK(test::max_abs(probed_hamiltonian(p, pr, 0.5 / pr.nu_p, s).matrix() - h) < 1e-9);
    const double tq = 0.25 / pr.nu_p;
    const Matrix expected = h + pr.g_p * embed_spin(pauli(PauliAxis::x), s).matrix();
    CHECK(test::max_abs(probed_hamiltonian(p, pr, tq, s).matrix() - expected) < 1e-6);
    CHECK(test::max_abs(probed_drive(p, pr, s).at(tq).matrix() - expected) < 1e-6);
}

TEST_CASE("default truncation") {
    CHECK(default_n_max(RabiParams::resonant(0.04, kIonCoupling)) == 20);
    CHECK(default_n_max(RabiParams::resonant(2.0, kIonCoupling)) == 42);
    CHECK(default_n_max({0.0, 0.0, kIonCoupling}) == 40);
}

TEST_CASE("frame equivalence: bichromatic drive vs static rabi hamiltonian (random drives)") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const FockSpace s(25);
    for (int trial = 0; trial < 4; ++trial) {
        const IonDriveParams d{khz(20.0 * uni(rng)), khz(40.0 + 20.0 * uni(rng)), khz(10.0 + 5.0 * uni(rng))};
        const RabiParams p = ion_to_qrm(d);
        const auto psi0 = QuantumState::pure(test::random_product(FockSpace(25), rng));
        // Keep the random initial state well inside the cutoff.
        Vector v = psi0.vector();
        for (int sp = 0; sp < 2; ++sp) v.segment(sp * s.mode_dim() + 4, s.mode_dim() - 4).setZero();
        const auto start = QuantumState::pure(v / v.norm());

        const auto grid = TimeGrid::uniform(0.0, us(200.0), 11);
        const auto lab = evolve_unitary(bichromatic_drive(d, s), start, grid);
        const auto rot = evolve_unitary(TimeDependentHamiltonian::constant(qrm_hamiltonian(p, s)), start, grid);
        const Operator n = embed_mode(number_operator(s));
        const Operator z = embed_spin(pauli(PauliAxis::z), s);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(std::abs(expectation(lab[i], n).real() - expectation(rot[i], n).real()) < 1e-4);
            CHECK(std::abs(expectation(lab[i], z).real() - expectation(rot[i], z).real()) < 1e-4);
            for (int k = 0; k < s.dim(); ++k)
                CHECK(std::abs(std::norm(lab[i].vector()(k)) - std::norm(rot[i].vector()(k))) < 1e-4);
        }
    }
}

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "qrabi/evolve.hpp"
#include "qrabi/model.hpp"
#include "qrabi/protocols.hpp"

using namespace qrabi;
using units::us;

namespace {

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }
double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

void check_probability_channel(const std::vector<double>& v) {
    for (double x : v) {
        CHECK(x >= -1e-7);
        CHECK(x <= 1.0 + 1e-7);
    }
}

}  // namespace

TEST_CASE("time series channels") {
    TimeSeries ts({0.0, 1.0, 2.0});
    ts.add_channel("a", {1.0, 2.0, 3.0});
    CHECK_THROWS_AS(ts.add_channel("b", {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(ts.add_channel("a", {1.0, 2.0, 3.0}), std::invalid_argument);
    CHECK(ts.has_channel("a"));
    CHECK(!ts.has_channel("b"));
    CHECK_THROWS_AS(ts.channel("b"), std::out_of_range);
    CHECK(ts.nearest_index(1.4) == 1);
    CHECK(ts.nearest_index(9.0) == 2);
    CHECK(ts.channel_names() == std::vector<std::string>{"a"});
}

TEST_CASE("regime dynamics: JC regime") {
    const auto ts = run_regime_dynamics(0.04, kIonCoupling, 2e-3, {});
    CHECK(ts.size() == 1001);
    CHECK(max_of(ts.channel("n_mean")) <= 1.05);
    const auto& n_total = ts.channel("N_total");
    CHECK(max_of(n_total) - min_of(n_total) < 0.02);
    check_probability_channel(ts.channel("p_up"));
}

TEST_CASE("regime dynamics: RWA breakdown") {
    const auto ts = run_regime_dynamics(1.2, kIonCoupling, us(600.0), {});
    CHECK(max_of(ts.channel("n_mean")) > 6.0);
    const auto& n_total = ts.channel("N_total");
    CHECK(max_of(n_total) - min_of(n_total) > 0.5);
}

TEST_CASE("regime dynamics shot noise is seeded") {
    ProtocolOptions opts;
    opts.shots = 100;
    opts.samples = 51;
    const auto a = run_regime_dynamics(0.6, kIonCoupling, us(200.0), {}, opts);
    const auto b = run_regime_dynamics(0.6, kIonCoupling, us(200.0), {}, opts);
    CHECK(a.channel("p_up") == b.channel("p_up"));
    opts.seed = 2;
    const auto c = run_regime_dynamics(0.6, kIonCoupling, us(200.0), {}, opts);
    CHECK(a.channel("p_up") != c.channel("p_up"));
    CHECK(a.channel("n_mean") == c.channel("n_mean"));
    CHECK_THROWS_AS(run_regime_dynamics(-1.0, kIonCoupling, us(200.0), {}), std::invalid_argument);
}

TEST_CASE("degenerate bounce revivals") {
    const auto b = run_bounce(BounceCase::degenerate, 5, {});
    CHECK(std::abs(b.period - us(100.0)) < 1e-12);
    const auto& p0 = b.series.channel("p0");
    for (int k = 1; k <= 5; ++k) CHECK(p0[b.series.nearest_index(k * b.period)] >= 0.95);
    double between = 1.0;
    for (std::size_t i = 0; i < b.series.size(); ++i)
        if (b.series.times()[i] > 0.3 * b.period && b.series.times()[i] < 0.7 * b.period)
            between = std::min(between, p0[i]);
    CHECK(between < 0.05);
    const double target = 4.0 * 1.25 * 1.25;
    const double peak = max_of(b.series.channel("n_mean"));
    CHECK(peak >= 0.8 * target);
    CHECK(peak <= 1.2 * target);
    CHECK(b.snapshots.size() == 7);
    CHECK(b.snapshots.front().time == 0.0);
    CHECK(std::abs(b.snapshots.back().time - b.period) < 1e-15);
    for (const auto& s : b.snapshots) REQUIRE(s.spin_resolved);
    check_probability_channel(p0);
}

TEST_CASE("bounce with default noise decays revival by revival") {
    ProtocolOptions opts;
    opts.n_max = 40;
    const auto b = run_bounce(BounceCase::degenerate, 5, NoiseModel::defaults(), {}, opts);
    const auto& p0 = b.series.channel("p0");
    double prev = 2.0;
    for (int k = 1; k <= 5; ++k) {
        const double v = p0[b.series.nearest_index(k * b.period)];
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("nondegenerate bounce degrades") {
    const auto b = run_bounce(BounceCase::nondegenerate, 3, {});
    const auto& p0 = b.series.channel("p0");
    CHECK(p0[b.series.nearest_index(3 * b.period)] < p0[b.series.nearest_index(b.period)]);
}

TEST_CASE("adiabatic preparation at ratio 1.2") {
    const auto r = run_adiabatic(1.2, RampSchedule::standard(1.2), {}, true);
    CHECK(r.target_fidelity >= 0.99);
    REQUIRE(r.revival_probability);
    CHECK(*r.revival_probability >= 0.98);
    CHECK(r.target_parity >= 0.98);
    REQUIRE(r.witness);
    CHECK(r.witness->entangled_flag);
    CHECK(r.purity_chain_holds);
    REQUIRE(r.target_state);

    const RabiParams p = RabiParams::resonant(1.2, kIonCoupling);
    const auto gs = eigensolve(qrm_hamiltonian(p, FockSpace(r.n_max)), 1).states.front();
    CHECK(std::abs(r.target_spin_purity - spin_purity(gs)) < 0.02);

    const auto& sp = r.series.channel("spin_purity");
    CHECK(std::abs(sp.front() - 1.0) < 1e-9);
    CHECK(min_of(sp) < 0.7);
    CHECK(sp.back() > 0.95);
    for (const char* name : {"p_up", "fidelity"}) check_probability_channel(r.series.channel(name));
    CHECK(r.series.size() == 601);
}

TEST_CASE("adiabatic ratio 2.0 spin purity tracks the exact ground state") {
    const auto r = run_adiabatic(2.0, RampSchedule::standard(2.0), {}, false);
    const RabiParams p = RabiParams::resonant(2.0, kIonCoupling);
    const auto gs = eigensolve(qrm_hamiltonian(p, FockSpace(r.n_max)), 1).states.front();
    CHECK(std::abs(r.target_spin_purity - spin_purity(gs)) < 0.02);
    CHECK(!r.revival_probability);
    CHECK(!r.witness);
}

TEST_CASE("diabatic schedule fails to prepare the ground state") {
    RampSchedule s = RampSchedule::standard(1.2);
    s.t_tar *= 0.05;
    s.tau *= 0.05;
    CHECK(run_adiabatic(1.2, s, {}, false).target_fidelity < 0.9);
}

TEST_CASE("noisy adiabatic run keeps the purity chain") {
    const auto r = run_adiabatic(1.2, RampSchedule::standard(1.2), NoiseModel::defaults(), true);
    CHECK(r.purity_chain_holds);
    CHECK(r.target_total_purity < 1.0);
    CHECK(*r.revival_probability < 0.99);
}

TEST_CASE("adiabatic rejects a mismatched schedule") {
    CHECK_THROWS_AS(run_adiabatic(1.5, RampSchedule::standard(1.2), {}, false), std::invalid_argument);
}

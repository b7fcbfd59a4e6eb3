#include "qrabi/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace qrabi {

// ---------------------------------------------------------------- TimeSeries

void TimeSeries::add_channel(std::string name, std::vector<double> values) {
    if (values.size() != times_.size())
        throw std::invalid_argument("TimeSeries: channel '" + name + "' has " + std::to_string(values.size()) +
                                    " values for " + std::to_string(times_.size()) + " times");
    if (has_channel(name)) throw std::invalid_argument("TimeSeries: duplicate channel '" + name + "'");
    channels_.emplace_back(std::move(name), std::move(values));
}

bool TimeSeries::has_channel(std::string_view name) const {
    return std::any_of(channels_.begin(), channels_.end(), [&](const auto& c) { return c.first == name; });
}

const std::vector<double>& TimeSeries::channel(std::string_view name) const {
    for (const auto& c : channels_)
        if (c.first == name) return c.second;
    throw std::out_of_range("TimeSeries: no channel '" + std::string(name) + "'");
}

std::vector<double>& TimeSeries::channel(std::string_view name) {
    return const_cast<std::vector<double>&>(std::as_const(*this).channel(name));
}

std::vector<std::string> TimeSeries::channel_names() const {
    std::vector<std::string> names;
    for (const auto& c : channels_) names.push_back(c.first);
    return names;
}

std::size_t TimeSeries::nearest_index(double t) const {
    if (times_.empty()) throw std::out_of_range("TimeSeries: empty");
    std::size_t best = 0;
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (std::abs(times_[i] - t) < std::abs(times_[best] - t)) best = i;
    return best;
}

// ------------------------------------------------------------------ helpers

namespace {

std::vector<double> diagonal_populations(const QuantumState& s) {
    std::vector<double> p(s.dim());
    for (int k = 0; k < s.dim(); ++k) p[k] = s.is_pure() ? std::norm(s.vector()(k)) : s.density()(k, k).real();
    return p;
}

struct DiagonalObservables {
    double p_up = 0.0;
    double n_mean = 0.0;
    double p0 = 0.0;
};

DiagonalObservables diagonal_observables(const QuantumState& s) {
    const FockSpace space = FockSpace::from_dim(s.dim());
    const int d = space.mode_dim();
    const std::vector<double> p = diagonal_populations(s);
    DiagonalObservables o;
    for (int sp = 0; sp < 2; ++sp)
        for (int n = 0; n < d; ++n) {
            const double w = p[sp * d + n];
            o.n_mean += n * w;
            if (sp == 1) o.p_up += w;
            if (n == 0) o.p0 += w;
        }
    return o;
}

std::vector<QuantumState> run_evolution(const TimeDependentHamiltonian& h, const QuantumState& initial,
                                        const NoiseModel& noise, const TimeGrid& grid, const IntegratorOptions& opts) {
    noise.validate();
    if (noise.is_noiseless()) return evolve_unitary(h, initial, grid, opts);
    return evolve_lindblad(h, noise, QuantumState::mixed(initial.to_density()), grid, opts);
}

void apply_shot_noise(TimeSeries& series, std::initializer_list<std::string_view> names, int shots,
                      std::uint64_t seed) {
    if (shots <= 0) return;
    std::mt19937_64 rng(seed);
    for (auto name : names) {
        auto& values = series.channel(name);
        values = sample_shots(values, shots, rng);
    }
}

FockSpace space_for(const RabiParams& p, int n_max_override) {
    return FockSpace(n_max_override > 0 ? n_max_override : default_n_max(p));
}

}  // namespace

// ---------------------------------------------------------------- protocols

TimeSeries run_regime_dynamics(double ratio, double g, double t_max, const NoiseModel& noise,
                               const ProtocolOptions& options) {
    if (!(ratio > 0.0)) throw std::invalid_argument("run_regime_dynamics: ratio must be > 0");
    if (!(t_max > 0.0)) throw std::invalid_argument("run_regime_dynamics: t_max must be > 0");
    const RabiParams params = RabiParams::resonant(ratio, g);
    const FockSpace space = space_for(params, options.n_max);
    const auto h = TimeDependentHamiltonian::constant(qrm_hamiltonian(params, space));
    const TimeGrid grid = TimeGrid::uniform(0.0, t_max, options.samples ? options.samples : 1001);

    const auto states = run_evolution(h, basis_state(Spin::up, 0, space), noise, grid, options.integrator);
    std::vector<double> p_up, n_mean, n_total;
    for (const auto& s : states) {
        const auto o = diagonal_observables(s);
        p_up.push_back(o.p_up);
        n_mean.push_back(o.n_mean);
        n_total.push_back(o.p_up + o.n_mean);
    }
    TimeSeries series(grid.samples());
    series.add_channel("p_up", std::move(p_up));
    series.add_channel("n_mean", std::move(n_mean));
    series.add_channel("N_total", std::move(n_total));
    apply_shot_noise(series, {"p_up"}, options.shots, options.seed);
    return series;
}

BounceResult run_bounce(BounceCase which, int periods, const NoiseModel& noise, std::vector<double> snapshot_times,
                        const ProtocolOptions& options) {
    if (periods < 1) throw std::invalid_argument("run_bounce: periods must be >= 1");
    const double g = kIonCoupling;
    const double omega_m = g / 1.25;
    BounceResult result;
    result.params = {which == BounceCase::degenerate ? 0.0 : 0.8 * g, omega_m, g};
    result.period = units::two_pi / omega_m;
    const double period = result.period;

    if (snapshot_times.empty())
        for (int i = 0; i < 7; ++i) snapshot_times.push_back(period * i / 6.0);
    std::sort(snapshot_times.begin(), snapshot_times.end());

    const std::size_t per_period = options.samples ? options.samples : 100;
    const std::size_t count = per_period * periods + 1;
    std::vector<double> series_times(count);
    for (std::size_t i = 0; i < count; ++i) series_times[i] = period * static_cast<double>(i) / per_period;

    // One evolution over the union of series and snapshot instants.
    std::vector<double> all = series_times;
    all.insert(all.end(), snapshot_times.begin(), snapshot_times.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end(),
                          [&](double x, double y) { return std::abs(x - y) <= 1e-12 * period; }),
              all.end());
    if (all.front() < 0.0) throw std::invalid_argument("run_bounce: negative snapshot time");

    const FockSpace space = space_for(result.params, options.n_max);
    const auto h = TimeDependentHamiltonian::constant(qrm_hamiltonian(result.params, space));
    const auto states = run_evolution(h, basis_state(Spin::down, 0, space), noise, TimeGrid(0.0, all),
                                      options.integrator);
    auto state_at = [&](double t) -> const QuantumState& {
        const auto it = std::min_element(all.begin(), all.end(),
                                         [&](double x, double y) { return std::abs(x - t) < std::abs(y - t); });
        return states[static_cast<std::size_t>(it - all.begin())];
    };

    std::vector<double> p0, n_mean, p_up;
    for (double t : series_times) {
        const auto o = diagonal_observables(state_at(t));
        p0.push_back(o.p0);
        n_mean.push_back(o.n_mean);
        p_up.push_back(o.p_up);
    }
    result.series = TimeSeries(series_times);
    result.series.add_channel("p0", std::move(p0));
    result.series.add_channel("n_mean", std::move(n_mean));
    result.series.add_channel("p_up", std::move(p_up));
    apply_shot_noise(result.series, {"p0", "p_up"}, options.shots, options.seed);

    for (double t : snapshot_times) result.snapshots.push_back(fock_populations(state_at(t), true, t));
    return result;
}

AdiabaticResult run_adiabatic(double target_ratio, const RampSchedule& schedule, const NoiseModel& noise,
                              bool with_reverse, const ProtocolOptions& options) {
    if (!(target_ratio > 0.0)) throw std::invalid_argument("run_adiabatic: target ratio must be > 0");
    schedule.validate();
    const double g = kIonCoupling;
    const double expected_tar = 2.0 * g / target_ratio;
    if (std::abs(schedule.delta_tar - expected_tar) > 1e-9 * expected_tar)
        throw std::invalid_argument("run_adiabatic: schedule delta_tar does not match the target ratio");

    AdiabaticResult result;
    result.schedule = schedule;
    result.schedule.reversed = with_reverse;
    const RampSchedule& sched = result.schedule;

    const FockSpace space = space_for(RabiParams::resonant(target_ratio, g), options.n_max);
    result.n_max = space.n_max();
    const auto h = ramp_drive(g, sched, space);

    const std::size_t per_leg = options.samples ? options.samples : 301;
    std::vector<double> times = TimeGrid::uniform(0.0, sched.t_tar, per_leg).samples();
    const std::size_t target_index = times.size() - 1;
    if (with_reverse)
        for (std::size_t i = 1; i < per_leg; ++i)
            times.push_back(sched.t_tar + sched.t_tar * static_cast<double>(i) / (per_leg - 1));
    if (with_reverse) times.back() = 2.0 * sched.t_tar;

    const TimeGrid grid(0.0, times);
    const auto states = run_evolution(h, basis_state(Spin::down, 0, space), noise, grid, options.integrator);

    std::vector<double> p_up, s_purity, fidelity, parity, n_mean;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto o = diagonal_observables(states[i]);
        p_up.push_back(o.p_up);
        n_mean.push_back(o.n_mean);
        s_purity.push_back(spin_purity(states[i]));
        parity.push_back(parity_expectation(states[i]));
        const Operator hi = qrm_hamiltonian(ramp_params(g, sched, times[i]), space);
        fidelity.push_back(instantaneous_ground_fidelity(states[i], hi));
    }

    const QuantumState& target = states[target_index];
    result.target_snapshot = fock_populations(target, true, sched.t_tar);
    result.target_fidelity = fidelity[target_index];
    result.target_spin_purity = s_purity[target_index];
    result.target_total_purity = purity(target);
    result.target_parity = parity[target_index];
    result.target_state = target;

    if (with_reverse) {
        const QuantumState& last = states.back();
        const double p_rev = last.is_pure() ? std::norm(last.vector()(0)) : last.density()(0, 0).real();
        result.revival_probability = std::clamp(p_rev, 0.0, 1.0);
        result.reversed_total_purity = purity(last);
        const double slack = 1e-9;
        result.purity_chain_holds = result.target_total_purity >= *result.reversed_total_purity - slack &&
                                    *result.reversed_total_purity >= p_rev * p_rev - slack;
        result.witness = witness(std::min(result.target_spin_purity, 1.0), *result.revival_probability);
    }

    result.series = TimeSeries(times);
    result.series.add_channel("p_up", std::move(p_up));
    result.series.add_channel("spin_purity", std::move(s_purity));
    result.series.add_channel("fidelity", std::move(fidelity));
    result.series.add_channel("parity", std::move(parity));
    result.series.add_channel("n_mean", std::move(n_mean));
    apply_shot_noise(result.series, {"p_up"}, options.shots, options.seed);
    return result;
}

}  // namespace qrabi

#include "qrabi/spectro.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "qrabi/measure.hpp"

namespace qrabi {

ProbeParams probe_config_for_ratio(double ratio, double g) {
    if (ratio <= 0.35) return {0.02 * g, 0.0, units::us(350.0)};
    return {0.01 * g, 0.0, units::us(450.0)};
}

std::vector<double> default_sweep_grid(double omega_m, std::size_t points, double lo, double hi) {
    if (points < 2) throw std::invalid_argument("default_sweep_grid: need at least 2 points");
    const double f_m = omega_m / units::two_pi;
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) grid[i] = f_m * (lo + (hi - lo) * static_cast<double>(i) / (points - 1));
    return grid;
}

SweepResult probe_sweep(double ratio, double g, const ProbeParams& probe, std::vector<double> freq_grid,
                        const SweepOptions& options) {
    probe.validate();
    if (freq_grid.empty()) throw std::invalid_argument("probe_sweep: empty frequency grid");
    for (std::size_t i = 1; i < freq_grid.size(); ++i)
        if (!(freq_grid[i] > freq_grid[i - 1])) throw std::invalid_argument("probe_sweep: frequencies not increasing");
    if (!(probe.duration > 0.0)) throw std::invalid_argument("probe_sweep: probe duration must be > 0");

    const RabiParams params = RabiParams::resonant(ratio, g);
    const FockSpace space(options.n_max > 0 ? options.n_max : default_n_max(params));
    const QuantumState initial = options.initial_state
                                     ? *options.initial_state
                                     : eigensolve(qrm_hamiltonian(params, space), 1).states.front();
    if (initial.dim() != space.dim()) throw DimensionMismatch("probe_sweep: initial state dimension mismatch");
    if (!initial.is_pure()) throw std::invalid_argument("probe_sweep: initial state must be pure");

    SweepResult result;
    result.ratio = ratio;
    result.probe_freqs = std::move(freq_grid);
    result.p_up_final.assign(result.probe_freqs.size(), 0.0);

    const Operator up = embed_spin(spin_up_projector(), space);
    const TimeGrid grid(0.0, {probe.duration});
    auto run_point = [&](std::size_t i) {
        ProbeParams p = probe;
        p.nu_p = result.probe_freqs[i];
        const auto final_state = evolve_unitary(probed_drive(params, p, space), initial, grid, options.integrator);
        result.p_up_final[i] = std::clamp(expectation(final_state.back(), up).real(), 0.0, 1.0);
    };

    // Each frequency is independent; results land in their own slot so merge order is fixed.
    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(result.probe_freqs.size()));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < result.probe_freqs.size(); i = next++) {
            try {
                run_point(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    result.detected_peaks = detect_peaks(result);
    return result;
}

std::vector<std::vector<double>> reference_spectrum(std::span<const double> ratio_grid, double g, int k) {
    if (k < 1) throw std::invalid_argument("reference_spectrum: k must be >= 1");
    if (!(g > 0.0)) throw std::invalid_argument("reference_spectrum: g must be > 0");
    std::vector<std::vector<double>> out;
    for (double ratio : ratio_grid) {
        if (ratio < 0.0) throw std::invalid_argument("reference_spectrum: negative ratio");
        // Rescaled splittings depend on the ratio only; ratio 0 keeps ω_m = g with the coupling off.
        const RabiParams params = ratio > 0.0 ? RabiParams::resonant(ratio, g) : RabiParams{g, g, 0.0};
        const FockSpace space(default_n_max(params));
        const EigenResult eig = eigensolve(qrm_hamiltonian(params, space), space.dim());
        std::vector<double> splittings;
        for (std::size_t j = 1; j < eig.energies.size() && static_cast<int>(splittings.size()) < k; ++j)
            if (eig.parities[j] != eig.parities[0])
                splittings.push_back((eig.energies[j] - eig.energies[0]) / params.omega_m);
        out.push_back(std::move(splittings));
    }
    return out;
}

std::vector<double> detect_peaks(std::span<const double> freqs, std::span<const double> values,
                                 const PeakCriteria& criteria) {
    if (freqs.size() != values.size()) throw std::invalid_argument("detect_peaks: size mismatch");
    const std::size_t n = values.size();
    std::vector<double> peaks;
    if (n < 3) return peaks;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        // Plateaus count once, at their left edge.
        if (!(values[i] > values[i - 1] && values[i] >= values[i + 1])) continue;
        if (!(values[i] > criteria.min_height)) continue;

        double left_min = values[i];
        for (std::size_t j = i; j-- > 0;) {
            if (values[j] > values[i]) break;
            left_min = std::min(left_min, values[j]);
        }
        double right_min = values[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            if (values[j] > values[i]) break;
            right_min = std::min(right_min, values[j]);
        }
        const double prominence = values[i] - std::max(left_min, right_min);
        if (!(prominence > criteria.min_prominence)) continue;

        // Vertex of the parabola through the three samples around the maximum.
        const double x0 = freqs[i - 1], x1 = freqs[i], x2 = freqs[i + 1];
        const double y0 = values[i - 1], y1 = values[i], y2 = values[i + 1];
        const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
        const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
        const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
        double vertex = x1;
        if (a < 0.0) vertex = std::clamp(-b / (2.0 * a), x0, x2);
        peaks.push_back(vertex);
    }
    return peaks;
}

std::vector<double> detect_peaks(const SweepResult& sweep) { return detect_peaks(sweep.probe_freqs, sweep.p_up_final); }

}  // namespace qrabi

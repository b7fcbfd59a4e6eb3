#include "qrabi/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "qrabi/evolve.hpp"
#include "qrabi/measure.hpp"
#include "qrabi/model.hpp"
#include "qrabi/protocols.hpp"
#include "qrabi/spectro.hpp"

namespace qrabi::cli {

namespace {

constexpr unsigned bit(Experiment e) { return 1u << static_cast<unsigned>(e); }
constexpr unsigned D = bit(Experiment::dynamics), B = bit(Experiment::bounce), A = bit(Experiment::adiabatic),
                   S = bit(Experiment::spectrum), F = bit(Experiment::fit), E = bit(Experiment::eigs);
constexpr unsigned ALL = D | B | A | S | F | E;

struct KeySpec {
    const char* name;
    unsigned experiments;
    const char* help;
};

// Canonical order; the metadata header follows it.
constexpr KeySpec kKeys[] = {
    {"case", B, "bounce case list: degenerate, nondegenerate"},
    {"ratio", D | A | S | F | E, "coupling ratio g/omega_m (comma-separated list)"},
    {"g-khz", D | S | E, "coupling g/2pi in kHz"},
    {"omega-m-khz", E, "mode frequency omega_m/2pi in kHz (auto: g/ratio)"},
    {"omega0-khz", E, "qubit frequency omega0/2pi in kHz (auto: omega_m)"},
    {"t-max-us", D, "evolution time in us"},
    {"periods", B, "number of mode periods"},
    {"snapshots", B, "Fock snapshots spread over the first period"},
    {"delta-max-khz", A, "initial blue detuning in kHz"},
    {"t-tar-us", A, "ramp duration in us"},
    {"tau-us", A, "ramp time constant in us"},
    {"reverse", A, "run the reversed leg (on/off)"},
    {"bsb-duration-us", A, "length of the synthetic blue-sideband readout in us"},
    {"bsb-samples", A, "samples of the synthetic blue-sideband readout"},
    {"g-p-ratio", S, "probe amplitude g_p/g (auto: per ratio)"},
    {"duration-us", S, "probe duration in us (auto: per ratio)"},
    {"f-lo", S, "lowest probe frequency in units of omega_m/2pi"},
    {"f-hi", S, "highest probe frequency in units of omega_m/2pi"},
    {"points", S, "probe frequencies per ratio"},
    {"prep", S, "initial state: exact or adiabatic"},
    {"reference-k", S, "exact splittings listed per ratio"},
    {"input", F, "CSV with t_us and p_up columns"},
    {"eta-omega-khz", A | F, "sideband Rabi frequency eta*Omega/2pi in kHz"},
    {"n-fit-max", F, "highest Fock level in the fit"},
    {"k", E, "number of eigenvalues"},
    {"samples", D | B | A, "output samples (auto: protocol default)"},
    {"n-max", D | B | A | S, "Fock cutoff (auto: from parameters)"},
    {"steps-per-period", D | B | A | S, "integrator steps per fastest period (>= 40)"},
    {"noise", D | B | A, "motional decoherence (on/off)"},
    {"heating-rate", D | B | A, "heating rate in quanta/s"},
    {"cooling-rate", D | B | A, "cooling rate in quanta/s"},
    {"dephasing-rate", D | B | A, "motional dephasing rate in 1/s"},
    {"shots", D | B | A, "projective shots per sample (0: exact)"},
    {"seed", D | B | A, "shot-noise seed"},
    {"threads", S, "worker threads (auto: hardware)"},
    {"output", ALL, "output path prefix"},
};

const KeySpec* find_key(std::string_view name) {
    for (const auto& k : kKeys)
        if (name == k.name) return &k;
    return nullptr;
}

std::string default_value(std::string_view key, Experiment e) {
    using X = Experiment;
    if (key == "case") return "degenerate";
    if (key == "ratio") {
        switch (e) {
            case X::dynamics: return "0.04";
            case X::adiabatic: return "1.2";
            case X::spectrum: return "0.3";
            case X::eigs: return "1";
            default: return "auto";
        }
    }
    if (key == "g-khz") return e == X::spectrum ? "50" : "12.5";
    if (key == "t-max-us") return "2000";
    if (key == "periods") return "5";
    if (key == "snapshots") return "7";
    if (key == "delta-max-khz") return "200";
    if (key == "t-tar-us") return "300";
    if (key == "tau-us") return "30";
    if (key == "reverse") return "on";
    if (key == "bsb-duration-us") return "400";
    if (key == "bsb-samples") return "201";
    if (key == "f-lo") return "0.25";
    if (key == "f-hi") return "3.5";
    if (key == "points") return "201";
    if (key == "prep") return "exact";
    if (key == "reference-k") return "3";
    if (key == "input") return "";
    if (key == "eta-omega-khz") return "25";
    if (key == "n-fit-max") return "15";
    if (key == "k") return "10";
    if (key == "steps-per-period") return "64";
    if (key == "noise") return "off";
    if (key == "heating-rate") return "60";
    if (key == "cooling-rate") return "60";
    if (key == "dephasing-rate") return "500";
    if (key == "shots") return "0";
    if (key == "seed") return "1";
    if (key == "output") return "qrabi_" + to_string(e);
    return "auto";
}

std::string normalize_key(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

// ------------------------------------------------------------ value parsing

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
        throw ConfigError(key, "expected a number, got '" + text + "'");
    return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
    long long v = 0;
    const auto t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError(key, "expected an integer, got '" + text + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    const auto t = trim(text);
    if (t == "on" || t == "true" || t == "1" || t == "yes") return true;
    if (t == "off" || t == "false" || t == "0" || t == "no") return false;
    throw ConfigError(key, "expected on/off, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& key, const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError(key, "empty list entry in '" + text + "'");
        out.push_back(item);
    }
    if (out.empty()) throw ConfigError(key, "empty list");
    return out;
}

bool is_auto(const std::string& text) { return trim(text) == "auto"; }

double positive(const std::string& key, double v) {
    if (!(v > 0.0)) throw ConfigError(key, "must be > 0");
    return v;
}

double non_negative(const std::string& key, double v) {
    if (!(v >= 0.0)) throw ConfigError(key, "must be >= 0");
    return v;
}

long long at_least(const std::string& key, long long v, long long lo) {
    if (v < lo) throw ConfigError(key, "must be >= " + std::to_string(lo));
    return v;
}

// -------------------------------------------------------------- formatting

std::string num(double v) { return fmt::format("{:.10g}", v); }

std::string base_path(const RunConfig& c) {
    std::string base = c.output;
    if (base.size() > 4 && base.ends_with(".csv")) base.resize(base.size() - 4);
    return base;
}

class CsvFile {
public:
    CsvFile(const std::string& path, const RunConfig& config, const std::string& header) : path_(path), out_(path) {
        if (!out_) throw ConfigError("output", "cannot open '" + path + "' for writing");
        out_ << metadata_line(config) << '\n' << header << '\n';
    }
    void row(std::initializer_list<std::string> cells) {
        bool first = true;
        for (const auto& c : cells) {
            if (!first) out_ << ',';
            out_ << c;
            first = false;
        }
        out_ << '\n';
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ofstream out_;
};

NoiseModel noise_of(const RunConfig& c) {
    if (!c.noise) return {};
    return {c.heating_rate, c.cooling_rate, c.dephasing_rate};
}

ProtocolOptions protocol_options(const RunConfig& c) {
    ProtocolOptions o;
    o.samples = c.samples;
    o.n_max = c.n_max;
    o.integrator.steps_per_period = c.steps_per_period;
    o.shots = c.shots;
    o.seed = c.seed;
    return o;
}

// -------------------------------------------------------------- experiments

int emit_dynamics(const RunConfig& c, std::ostream& out) {
    CsvFile file(base_path(c) + ".csv", c, "ratio,t_us,p_up,n_mean,n_total");
    for (double ratio : c.ratios) {
        const auto series = run_regime_dynamics(ratio, units::khz(c.g_khz), units::us(c.t_max_us), noise_of(c),
                                                protocol_options(c));
        const auto& p_up = series.channel("p_up");
        const auto& n_mean = series.channel("n_mean");
        const auto& n_total = series.channel("N_total");
        for (std::size_t i = 0; i < series.size(); ++i)
            file.row({num(ratio), num(units::to_us(series.times()[i])), num(p_up[i]), num(n_mean[i]),
                      num(n_total[i])});
    }
    out << "wrote " << file.path() << '\n';
    return kExitOk;
}

int emit_bounce(const RunConfig& c, std::ostream& out) {
    const std::string base = base_path(c);
    CsvFile series_file(base + ".csv", c, "case,t_us,p0,n_mean,p_up");
    CsvFile snap_file(base + "_snapshots.csv", c, "case,t_us,n,p_n,p_n_given_down,p_n_given_up");
    std::stringstream cases(c.bounce_case);
    std::string name;
    while (std::getline(cases, name, ',')) {
        const BounceCase which = name == "degenerate" ? BounceCase::degenerate : BounceCase::nondegenerate;
        const double period = units::two_pi / (kIonCoupling / 1.25);
        std::vector<double> snaps;
        for (int i = 0; i < c.snapshots; ++i)
            snaps.push_back(c.snapshots == 1 ? 0.0 : period * i / (c.snapshots - 1));
        const auto result = run_bounce(which, c.periods, noise_of(c), snaps, protocol_options(c));
        const auto& p0 = result.series.channel("p0");
        const auto& n_mean = result.series.channel("n_mean");
        const auto& p_up = result.series.channel("p_up");
        for (std::size_t i = 0; i < result.series.size(); ++i)
            series_file.row({name, num(units::to_us(result.series.times()[i])), num(p0[i]), num(n_mean[i]),
                             num(p_up[i])});
        for (const auto& s : result.snapshots)
            for (std::size_t n = 0; n < s.p_n.size(); ++n)
                snap_file.row({name, num(units::to_us(s.time)), std::to_string(n), num(s.p_n[n]),
                               num(s.spin_resolved->given_down[n]), num(s.spin_resolved->given_up[n])});
    }
    out << "wrote " << series_file.path() << ", " << snap_file.path() << '\n';
    return kExitOk;
}

RampSchedule schedule_of(const RunConfig& c, double ratio) {
    RampSchedule s{units::khz(c.delta_max_khz), 2.0 * kIonCoupling / ratio, units::us(c.tau_us),
                   units::us(c.t_tar_us), c.reverse};
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("tau-us", e.what());
    }
    return s;
}

int emit_adiabatic(const RunConfig& c, std::ostream& out) {
    const std::string base = base_path(c);
    CsvFile series_file(base + ".csv", c, "ratio,t_us,p_up,spin_purity,fidelity,parity,n_mean");
    CsvFile summary_file(base + "_summary.csv", c,
                         "ratio,fidelity,spin_purity,total_purity,parity,p_rev,reversed_purity,witness_bound,"
                         "entangled,purity_chain");
    CsvFile target_file(base + "_target.csv", c, "ratio,n,p_n,p_n_given_down,p_n_given_up");
    CsvFile bsb_file(base + "_bsb.csv", c, "ratio,t_us,p_up");
    const double nan = std::nan("");
    for (double ratio : c.ratios) {
        const auto r = run_adiabatic(ratio, schedule_of(c, ratio), noise_of(c), c.reverse, protocol_options(c));
        const auto& ts = r.series.times();
        const auto& p_up = r.series.channel("p_up");
        const auto& sp = r.series.channel("spin_purity");
        const auto& fid = r.series.channel("fidelity");
        const auto& par = r.series.channel("parity");
        const auto& nm = r.series.channel("n_mean");
        for (std::size_t i = 0; i < ts.size(); ++i)
            series_file.row({num(ratio), num(units::to_us(ts[i])), num(p_up[i]), num(sp[i]), num(fid[i]),
                             num(par[i]), num(nm[i])});

        const double p_rev = r.revival_probability.value_or(nan);
        const double bound = r.witness ? r.witness->witness_upper_bound : nan;
        const bool entangled = r.witness && r.witness->entangled_flag;
        summary_file.row({num(ratio), num(r.target_fidelity), num(r.target_spin_purity), num(r.target_total_purity),
                          num(r.target_parity), num(p_rev), num(r.reversed_total_purity.value_or(nan)), num(bound),
                          entangled ? "1" : "0", r.purity_chain_holds ? "1" : "0"});
        out << fmt::format("ratio {} fidelity {:.6f} parity {:+.6f} P_Rev {:.6f} witness_bound {:+.6f}{}\n", num(ratio),
                           r.target_fidelity, r.target_parity, p_rev, bound, entangled ? " entangled" : "");
        if (!r.purity_chain_holds)
            out << "  note: purity ordering Tr rho_tar^2 >= Tr rho_rev^2 >= P_Rev^2 violated; bound not valid\n";

        const auto& snap = r.target_snapshot;
        for (std::size_t n = 0; n < snap.p_n.size(); ++n)
            target_file.row({num(ratio), std::to_string(n), num(snap.p_n[n]), num(snap.spin_resolved->given_down[n]),
                             num(snap.spin_resolved->given_up[n])});

        // Blue-sideband readout of the prepared motional distribution, fed to `qrabi fit`.
        const auto bsb = synth_bsb_signal(snap.p_n, units::khz(c.eta_omega_khz), 0.0,
                                          TimeGrid::uniform(0.0, units::us(c.bsb_duration_us), c.bsb_samples));
        for (std::size_t i = 0; i < bsb.times.size(); ++i)
            bsb_file.row({num(ratio), num(units::to_us(bsb.times[i])), num(bsb.p_up[i])});
    }
    out << "wrote " << series_file.path() << ", " << summary_file.path() << ", " << target_file.path() << ", "
        << bsb_file.path() << '\n';
    return kExitOk;
}

int emit_spectrum(const RunConfig& c, std::ostream& out) {
    const std::string base = base_path(c);
    CsvFile sweep_file(base + ".csv", c, "ratio,nu_p_khz,p_up");
    CsvFile peaks_file(base + "_peaks.csv", c, "ratio,peak_khz,peak_over_omega_m");
    CsvFile ref_file(base + "_reference.csv", c, "ratio,index,splitting_over_omega_m");
    const double g = units::khz(c.g_khz);
    for (double ratio : c.ratios) {
        const RabiParams params = RabiParams::resonant(ratio, g);
        ProbeParams probe = probe_config_for_ratio(ratio, g);
        if (c.g_p_ratio > 0.0) probe.g_p = c.g_p_ratio * g;
        if (c.duration_us > 0.0) probe.duration = units::us(c.duration_us);

        SweepOptions opts;
        opts.n_max = c.n_max;
        opts.integrator.steps_per_period = c.steps_per_period;
        opts.threads = c.threads;
        if (c.prep == "adiabatic") {
            ProtocolOptions po;
            po.n_max = c.n_max > 0 ? c.n_max : default_n_max(params);
            po.integrator.steps_per_period = c.steps_per_period;
            const auto prep = run_adiabatic(ratio, RampSchedule::standard(ratio), {}, false, po);
            opts.n_max = po.n_max;
            opts.initial_state = prep.target_state;
        }
        const auto sweep = probe_sweep(ratio, g, probe, default_sweep_grid(params.omega_m, c.points, c.f_lo, c.f_hi),
                                       opts);
        const double f_m = params.omega_m / units::two_pi;
        for (std::size_t i = 0; i < sweep.probe_freqs.size(); ++i)
            sweep_file.row({num(ratio), num(sweep.probe_freqs[i] / 1e3), num(sweep.p_up_final[i])});
        for (double peak : sweep.detected_peaks) peaks_file.row({num(ratio), num(peak / 1e3), num(peak / f_m)});

        const double one[] = {ratio};
        const auto ref = reference_spectrum(one, g, c.reference_k).front();
        for (std::size_t j = 0; j < ref.size(); ++j) ref_file.row({num(ratio), std::to_string(j), num(ref[j])});
        out << fmt::format("ratio {}: {} peaks\n", num(ratio), sweep.detected_peaks.size());
    }
    out << "wrote " << sweep_file.path() << ", " << peaks_file.path() << ", " << ref_file.path() << '\n';
    return kExitOk;
}

BsbSignal read_bsb_csv(const RunConfig& c) {
    std::ifstream in(c.input);
    if (!in) throw ConfigError("input", "cannot open '" + c.input + "'");
    std::vector<std::string> header;
    int t_col = -1, p_col = -1, r_col = -1;
    BsbSignal signal;
    signal.eta_omega = units::khz(c.eta_omega_khz);
    std::optional<double> seen_ratio;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty() || line.front() == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
        if (header.empty()) {
            header = cells;
            for (int i = 0; i < static_cast<int>(cells.size()); ++i) {
                if (cells[i] == "t_us") t_col = i;
                if (cells[i] == "p_up") p_col = i;
                if (cells[i] == "ratio") r_col = i;
            }
            if (t_col < 0 || p_col < 0) throw ConfigError("input", "header needs t_us and p_up columns");
            continue;
        }
        if (static_cast<int>(cells.size()) != static_cast<int>(header.size()))
            throw ConfigError("input", "ragged row '" + line + "'");
        if (r_col >= 0) {
            const double r = parse_double("input", cells[r_col]);
            if (!c.ratios.empty()) {
                if (std::abs(r - c.ratios.front()) > 1e-12 * std::max(1.0, r)) continue;
            } else if (seen_ratio && *seen_ratio != r) {
                throw ConfigError("ratio", "input holds several ratios; select one");
            }
            seen_ratio = r;
        }
        signal.times.push_back(units::us(parse_double("input", cells[t_col])));
        signal.p_up.push_back(parse_double("input", cells[p_col]));
    }
    if (signal.times.empty()) throw ConfigError("input", "no data rows");
    return signal;
}

int emit_fit(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const BsbSignal signal = read_bsb_csv(c);
    PhononFit fit;
    try {
        fit = fit_phonon_distribution(signal, c.n_fit_max);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("n-fit-max", e.what());
    }
    const std::string base = base_path(c);
    CsvFile dist_file(base + ".csv", c, "n,p_n");
    for (std::size_t n = 0; n < fit.p_n.size(); ++n) dist_file.row({std::to_string(n), num(fit.p_n[n])});
    CsvFile summary_file(base + "_summary.csv", c, "gamma_per_s,residual,iterations,converged");
    summary_file.row({num(fit.gamma), num(fit.residual), std::to_string(fit.iterations), fit.converged ? "1" : "0"});
    out << fmt::format("gamma {:.6g} 1/s, rms residual {:.3e}, {} iterations\n", fit.gamma, fit.residual,
                       fit.iterations);
    out << "wrote " << dist_file.path() << ", " << summary_file.path() << '\n';
    if (!fit.converged) {
        err << "error: fit did not converge within the iteration budget\n";
        return kExitNumerical;
    }
    return kExitOk;
}

int emit_eigs(const RunConfig& c, std::ostream& out) {
    CsvFile file(base_path(c) + ".csv", c, "ratio,index,energy_khz,parity");
    for (double ratio : c.ratios) {
        RabiParams p;
        if (c.omega_m_set) {
            p.omega_m = units::khz(c.omega_m_khz);
            p.g = ratio * p.omega_m;
        } else {
            if (!(ratio > 0.0)) throw ConfigError("omega-m-khz", "required when ratio is 0");
            p.g = units::khz(c.g_khz);
            p.omega_m = p.g / ratio;
        }
        p.omega0 = c.omega0_set ? units::khz(c.omega0_khz) : p.omega_m;
        const FockSpace space(default_n_max(p));
        if (c.k > space.dim()) throw ConfigError("k", "exceeds the Hilbert-space dimension " + std::to_string(space.dim()));
        const auto eig = eigensolve(qrm_hamiltonian(p, space), c.k);
        for (std::size_t j = 0; j < eig.energies.size(); ++j)
            file.row({num(ratio), std::to_string(j), num(units::to_khz(eig.energies[j])),
                      std::to_string(eig.parities[j])});
    }
    out << "wrote " << file.path() << '\n';
    return kExitOk;
}

// Rewrites `--a_b` and `--a_b=v` to dashed form so both spellings reach CLI11.
std::vector<std::string> normalized_args(int argc, const char* const* argv) {
    std::vector<std::string> args(argv, argv + argc);
    for (std::size_t i = 1; i < args.size(); ++i) {
        auto& a = args[i];
        if (!a.starts_with("--")) continue;
        const auto eq = a.find('=');
        std::replace(a.begin(), eq == std::string::npos ? a.end() : a.begin() + eq, '_', '-');
    }
    return args;
}

}  // namespace

std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::dynamics: return "dynamics";
        case Experiment::bounce: return "bounce";
        case Experiment::adiabatic: return "adiabatic";
        case Experiment::spectrum: return "spectrum";
        case Experiment::fit: return "fit";
        case Experiment::eigs: return "eigs";
    }
    return "unknown";
}

RunConfig resolve_config(Experiment experiment, const std::map<std::string, std::string>& file_values,
                         const std::map<std::string, std::string>& flag_values) {
    std::map<std::string, std::string> values;
    for (const auto* layer : {&file_values, &flag_values})
        for (const auto& [raw, v] : *layer) {
            const std::string key = normalize_key(raw);
            const KeySpec* spec = find_key(key);
            if (!spec) throw ConfigError(key, "unknown key");
            if (!(spec->experiments & bit(experiment)))
                throw ConfigError(key, "not a key of '" + to_string(experiment) + "'");
            values[key] = trim(v);
        }

    RunConfig c;
    c.experiment = experiment;
    for (const auto& spec : kKeys) {
        if (!(spec.experiments & bit(experiment))) continue;
        const std::string key = spec.name;
        const auto it = values.find(key);
        const bool given = it != values.end();
        const std::string v = given ? it->second : default_value(key, experiment);
        c.effective.emplace_back(key, v);

        if (key == "case") {
            for (const auto& item : split_list(key, v))
                if (item != "degenerate" && item != "nondegenerate")
                    throw ConfigError(key, "expected degenerate or nondegenerate, got '" + item + "'");
            c.bounce_case = v;
        } else if (key == "ratio") {
            if (is_auto(v)) continue;
            for (const auto& item : split_list(key, v)) {
                const double r = parse_double(key, item);
                if (experiment == Experiment::eigs ? !(r >= 0.0) : !(r > 0.0))
                    throw ConfigError(key, experiment == Experiment::eigs ? "must be >= 0" : "must be > 0");
                c.ratios.push_back(r);
            }
            if (experiment == Experiment::fit && c.ratios.size() > 1) throw ConfigError(key, "fit takes one ratio");
        } else if (key == "g-khz") {
            c.g_khz = positive(key, parse_double(key, v));
        } else if (key == "omega-m-khz") {
            if ((c.omega_m_set = !is_auto(v))) c.omega_m_khz = positive(key, parse_double(key, v));
        } else if (key == "omega0-khz") {
            if ((c.omega0_set = !is_auto(v))) c.omega0_khz = non_negative(key, parse_double(key, v));
        } else if (key == "t-max-us") {
            c.t_max_us = positive(key, parse_double(key, v));
        } else if (key == "periods") {
            c.periods = static_cast<int>(at_least(key, parse_integer(key, v), 1));
        } else if (key == "snapshots") {
            c.snapshots = static_cast<int>(at_least(key, parse_integer(key, v), 1));
        } else if (key == "delta-max-khz") {
            c.delta_max_khz = positive(key, parse_double(key, v));
        } else if (key == "t-tar-us") {
            c.t_tar_us = positive(key, parse_double(key, v));
        } else if (key == "tau-us") {
            c.tau_us = positive(key, parse_double(key, v));
        } else if (key == "reverse") {
            c.reverse = parse_bool(key, v);
        } else if (key == "bsb-duration-us") {
            c.bsb_duration_us = positive(key, parse_double(key, v));
        } else if (key == "bsb-samples") {
            c.bsb_samples = static_cast<std::size_t>(at_least(key, parse_integer(key, v), 2));
        } else if (key == "g-p-ratio") {
            if (!is_auto(v)) c.g_p_ratio = positive(key, parse_double(key, v));
        } else if (key == "duration-us") {
            if (!is_auto(v)) c.duration_us = positive(key, parse_double(key, v));
        } else if (key == "f-lo") {
            c.f_lo = positive(key, parse_double(key, v));
        } else if (key == "f-hi") {
            c.f_hi = positive(key, parse_double(key, v));
            if (!(c.f_hi > c.f_lo)) throw ConfigError(key, "must exceed f-lo");
        } else if (key == "points") {
            c.points = static_cast<std::size_t>(at_least(key, parse_integer(key, v), 3));
        } else if (key == "prep") {
            if (v != "exact" && v != "adiabatic") throw ConfigError(key, "expected exact or adiabatic, got '" + v + "'");
            c.prep = v;
        } else if (key == "reference-k") {
            c.reference_k = static_cast<int>(at_least(key, parse_integer(key, v), 1));
        } else if (key == "input") {
            if (v.empty()) throw ConfigError(key, "required");
            c.input = v;
        } else if (key == "eta-omega-khz") {
            c.eta_omega_khz = positive(key, parse_double(key, v));
        } else if (key == "n-fit-max") {
            c.n_fit_max = static_cast<int>(at_least(key, parse_integer(key, v), 1));
        } else if (key == "k") {
            c.k = static_cast<int>(at_least(key, parse_integer(key, v), 1));
        } else if (key == "samples") {
            if (!is_auto(v)) c.samples = static_cast<std::size_t>(at_least(key, parse_integer(key, v), 2));
        } else if (key == "n-max") {
            if (!is_auto(v)) c.n_max = static_cast<int>(at_least(key, parse_integer(key, v), 1));
        } else if (key == "steps-per-period") {
            c.steps_per_period = static_cast<int>(at_least(key, parse_integer(key, v), 40));
        } else if (key == "noise") {
            c.noise = parse_bool(key, v);
        } else if (key == "heating-rate") {
            c.heating_rate = non_negative(key, parse_double(key, v));
        } else if (key == "cooling-rate") {
            c.cooling_rate = non_negative(key, parse_double(key, v));
        } else if (key == "dephasing-rate") {
            c.dephasing_rate = non_negative(key, parse_double(key, v));
        } else if (key == "shots") {
            c.shots = static_cast<int>(at_least(key, parse_integer(key, v), 0));
        } else if (key == "seed") {
            c.seed = static_cast<std::uint64_t>(at_least(key, parse_integer(key, v), 0));
        } else if (key == "threads") {
            if (!is_auto(v)) c.threads = static_cast<unsigned>(at_least(key, parse_integer(key, v), 1));
        } else if (key == "output") {
            if (v.empty()) throw ConfigError(key, "must not be empty");
            c.output = v;
        }
    }

    if (experiment == Experiment::spectrum && c.prep == "adiabatic" && std::abs(c.g_khz - 12.5) > 1e-12)
        throw ConfigError("prep", "adiabatic preparation runs at g-khz = 12.5");
    if (experiment == Experiment::adiabatic)
        for (double r : c.ratios)
            if (!(2.0 * units::khz(12.5) / r < units::khz(c.delta_max_khz)))
                throw ConfigError("delta-max-khz", "must exceed the target detuning 2g/ratio");
    return c;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    std::map<std::string, std::string> values;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config", fmt::format("{}:{}: expected key = value", path, lineno));
        const std::string key = normalize_key(trim(line.substr(0, eq)));
        if (key.empty()) throw ConfigError("config", fmt::format("{}:{}: missing key", path, lineno));
        values[key] = trim(line.substr(eq + 1));
    }
    return values;
}

namespace {

std::string describe(Experiment e) {
    switch (e) {
        case Experiment::dynamics: return "spin and phonon dynamics from |up,0> for each coupling ratio";
        case Experiment::bounce: return "wave-packet bouncing in the deep strong coupling regime";
        case Experiment::adiabatic: return "adiabatic ground-state preparation, reversal and entanglement witness";
        case Experiment::spectrum: return "probe-drive spectroscopy with exact reference splittings";
        case Experiment::fit: return "phonon distribution from a blue-sideband readout CSV";
        case Experiment::eigs: return "lowest eigenvalues of the Rabi Hamiltonian with parity labels";
    }
    return "";
}

}  // namespace

RunConfig parse_config(int argc, const char* const* argv) {
    CLI::App app{"Quantum Rabi model simulator for trapped-ion experiments", "qrabi"};
    app.require_subcommand(1);
    std::string config_path;
    std::map<std::string, std::string> flags;
    std::map<CLI::App*, Experiment> subs;
    for (Experiment e : {Experiment::dynamics, Experiment::bounce, Experiment::adiabatic, Experiment::spectrum,
                         Experiment::fit, Experiment::eigs}) {
        auto* sub = app.add_subcommand(to_string(e), describe(e));
        subs[sub] = e;
        sub->add_option("--config", config_path, "flat key = value file; flags override it");
        for (const auto& spec : kKeys) {
            if (!(spec.experiments & bit(e))) continue;
            const std::string key = spec.name;
            sub->add_option_function<std::string>(
                "--" + key, [&flags, key](const std::string& v) { flags[key] = v; },
                fmt::format("{} [{}]", spec.help, default_value(key, e)));
        }
    }

    const auto args = normalized_args(argc, argv);
    std::vector<const char*> ptrs;
    for (const auto& a : args) ptrs.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(ptrs.size()), ptrs.data());
    } catch (const CLI::CallForHelp&) {
        const auto chosen = app.get_subcommands();
        throw HelpRequested(chosen.empty() ? app.help() : chosen.front()->help());
    } catch (const CLI::ExtrasError& e) {
        std::string key = "arguments";
        for (const auto& a : args)
            if (a.starts_with("--")) {
                const std::string name = a.substr(2, a.find('=') - 2);
                bool known = name == "config" || name == "help";
                if (const KeySpec* s = find_key(name); s && !app.get_subcommands().empty())
                    known = s->experiments & bit(subs[app.get_subcommands().front()]);
                if (!known) {
                    key = name;
                    break;
                }
            }
        throw ConfigError(key, std::string("unknown key (") + e.what() + ")");
    } catch (const CLI::ParseError& e) {
        throw ConfigError("arguments", e.what());
    }

    const Experiment e = subs.at(app.get_subcommands().front());
    const auto file_values = config_path.empty() ? std::map<std::string, std::string>{} : read_config_file(config_path);
    return resolve_config(e, file_values, flags);
}

std::string metadata_line(const RunConfig& config) {
    std::string line = "# experiment=" + to_string(config.experiment);
    for (const auto& [k, v] : config.effective) line += " " + k + "=" + v;
    return line;
}

int run_and_emit(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        switch (config.experiment) {
            case Experiment::dynamics: return emit_dynamics(config, out);
            case Experiment::bounce: return emit_bounce(config, out);
            case Experiment::adiabatic: return emit_adiabatic(config, out);
            case Experiment::spectrum: return emit_spectrum(config, out);
            case Experiment::fit: return emit_fit(config, out, err);
            case Experiment::eigs: return emit_eigs(config, out);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const TruncationOverflow& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig config;
    try {
        config = parse_config(argc, argv);
    } catch (const HelpRequested& h) {
        out << h.what();
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return run_and_emit(config, out, err);
}

}  // namespace qrabi::cli

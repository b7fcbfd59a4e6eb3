#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "qrabi/evolve.hpp"
#include "qrabi/measure.hpp"
#include "qrabi/model.hpp"
#include "qrabi/spectro.hpp"

using namespace qrabi;
using units::khz;
using units::us;

TEST_CASE("probe configuration per ratio") {
    const double g = khz(50.0);
    for (double r : {0.1, 0.2, 0.3}) {
        const auto p = probe_config_for_ratio(r, g);
        CHECK(p.g_p == doctest::Approx(0.02 * g));
        CHECK(p.duration == doctest::Approx(us(350.0)));
    }
    for (double r : {0.4, 0.6, 1.0}) {
        const auto p = probe_config_for_ratio(r, g);
        CHECK(p.g_p == doctest::Approx(0.01 * g));
        CHECK(p.duration == doctest::Approx(us(450.0)));
    }
}

TEST_CASE("default sweep grid") {
    const double wm = khz(100.0);
    const auto grid = default_sweep_grid(wm);
    CHECK(grid.size() == 201);
    CHECK(grid.front() == doctest::Approx(25e3));
    CHECK(grid.back() == doctest::Approx(350e3));
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
}

TEST_CASE("reference spectrum limits and ordering") {
    const double g = khz(50.0);
    const double tiny[] = {0.02, 0.0};
    const auto ref = reference_spectrum(tiny, g, 3);
    CHECK(std::abs(ref[0][0] - 1.0) < 0.02);
    CHECK(std::abs(ref[0][1] - 1.0) < 0.02);
    CHECK(std::abs(ref[1][0] - 1.0) < 1e-9);
    CHECK(std::abs(ref[1][1] - 1.0) < 1e-9);

    const double half[] = {0.5};
    const auto r5 = reference_spectrum(half, g, 3).front();
    CHECK(r5.size() == 3);
    for (std::size_t i = 0; i < r5.size(); ++i) {
        CHECK(r5[i] > 0.0);
        if (i) CHECK(r5[i] > r5[i - 1]);
    }
}

TEST_CASE("reference spectrum is continuous in the ratio") {
    std::vector<double> grid;
    for (int i = 1; i <= 50; ++i) grid.push_back(0.02 * i);
    const auto ref = reference_spectrum(grid, khz(50.0), 3);
    for (std::size_t i = 1; i < ref.size(); ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(ref[i][j] - ref[i - 1][j]) < 0.1 * ref[i - 1][j]);
}

TEST_CASE("peak detection on synthetic signals") {
    std::vector<double> f, flat, one, two;
    for (int i = 0; i <= 400; ++i) {
        const double x = 100.0 + 0.5 * i;
        f.push_back(x);
        flat.push_back(0.02);
        auto bump = [&](double f0) { return 0.8 / (1.0 + std::pow((x - f0) / 3.0, 2)); };
        one.push_back(0.02 + bump(171.3));
        two.push_back(0.02 + bump(150.0) + bump(170.0));
    }
    CHECK(detect_peaks(f, flat).empty());
    const auto p1 = detect_peaks(f, one);
    REQUIRE(p1.size() == 1);
    CHECK(std::abs(p1[0] - 171.3) < 0.5);
    const auto p2 = detect_peaks(f, two);
    REQUIRE(p2.size() == 2);
    CHECK(std::abs(p2[0] - 150.0) < 0.5);
    CHECK(std::abs(p2[1] - 170.0) < 0.5);

    std::vector<double> low = one;
    for (double& v : low) v *= 0.1;
    CHECK(detect_peaks(f, low).empty());
    const std::vector<double> short_f{1.0, 2.0};
    CHECK(detect_peaks(short_f, short_f).empty());
    CHECK_THROWS_AS(detect_peaks(f, short_f), std::invalid_argument);
}

TEST_CASE("probe off gives a flat response") {
    const double g = khz(50.0);
    ProbeParams probe{0.0, 0.0, us(50.0)};
    SweepOptions opts;
    opts.n_max = 20;
    const auto sweep = probe_sweep(0.3, g, probe, {100e3, 150e3, 200e3}, opts);
    const RabiParams p = RabiParams::resonant(0.3, g);
    const auto gs = eigensolve(qrm_hamiltonian(p, FockSpace(20)), 1).states.front();
    const double static_up = expectation(gs, embed_spin(spin_up_projector(), FockSpace(20))).real();
    for (double v : sweep.p_up_final) CHECK(std::abs(v - static_up) < 1e-9);
    CHECK(sweep.detected_peaks.empty());
}

TEST_CASE("probe sweep finds the lowest opposite-parity line at ratio 0.6") {
    const double g = khz(50.0);
    const double ratio = 0.6;
    const RabiParams p = RabiParams::resonant(ratio, g);
    const auto probe = probe_config_for_ratio(ratio, g);
    const double f_m = p.omega_m / units::two_pi;
    const double one[] = {ratio};
    const double line = reference_spectrum(one, g, 1).front().front() * f_m;
    std::vector<double> grid;
    for (int i = -10; i <= 10; ++i) grid.push_back(line + i * 0.5e3);
    const auto sweep = probe_sweep(ratio, g, probe, grid);
    REQUIRE(!sweep.detected_peaks.empty());
    const double best = *std::min_element(sweep.detected_peaks.begin(), sweep.detected_peaks.end(), [&](double a, double b) {
        return std::abs(a - line) < std::abs(b - line);
    });
    CHECK(std::abs(best - line) < 1.0 / probe.duration);
    for (double v : sweep.p_up_final) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("sweep results do not depend on the thread count") {
    const double g = khz(50.0);
    const auto probe = probe_config_for_ratio(0.3, g);
    ProbeParams shortp = probe;
    shortp.duration = us(40.0);
    SweepOptions one, four;
    one.threads = 1;
    four.threads = 4;
    const std::vector<double> grid{100e3, 120e3, 140e3, 160e3, 180e3};
    CHECK(probe_sweep(0.3, g, shortp, grid, one).p_up_final == probe_sweep(0.3, g, shortp, grid, four).p_up_final);
    const std::vector<double> bad{2.0, 1.0};
    CHECK_THROWS_AS(probe_sweep(0.3, g, shortp, bad), std::invalid_argument);
}

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sqzmem/errors.hpp"
#include "sqzmem/parallel.hpp"
#include "sqzmem/quadrature.hpp"
#include "sqzmem/timedomain.hpp"
#include "test_helpers.hpp"

using namespace sqzmem;
using namespace sqzmem::testing;

namespace {

struct Moments {
    double mean = 0.0;
    double var = 0.0;
};

Moments moments(const std::vector<double>& v) {
    Moments m;
    for (double x : v) m.mean += x;
    m.mean /= v.size();
    for (double x : v) m.var += (x - m.mean) * (x - m.mean);
    m.var /= (v.size() - 1);
    return m;
}

TemporalMode input_mode(const TimingConfig& cfg) {
    const auto w = classical_waveforms(cfg, 0.15);
    return temporal_mode(w.input, cfg.dt(), cfg.pulse_center_us - cfg.pulse_fwhm_us,
                         cfg.pulse_center_us + cfg.pulse_fwhm_us);
}

/// Effectively constant LO phase: the ramp barely moves over the test run.
TimingConfig frozen_ramp() {
    TimingConfig cfg;
    cfg.lo_ramp_period_s = 1e12;
    return cfg;
}

std::vector<double> quadratures(const ShotSynthesizer& syn, std::int64_t n, std::int64_t first = 0) {
    std::vector<double> out(n), scratch(syn.timing().samples());
    for (std::int64_t k = 0; k < n; ++k) out[k] = syn.synthesize_quadrature(first + k, scratch);
    return out;
}

}  // namespace

TEST_CASE("timing configuration validation") {
    TimingConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.samples() == 800);

    auto bad = cfg;
    bad.sample_rate_per_us = 30.0;  // 30 * 0.6 < 20
    CHECK_THROWS_AS(bad.validate(), ConfigInconsistencyError);
    bad = cfg;
    bad.calib_start_us = 0.5;
    CHECK_THROWS_AS(bad.validate(), ConfigInconsistencyError);
    bad = cfg;
    bad.retrieval_window_us = 9.0;
    CHECK_THROWS_AS(bad.validate(), ConfigInconsistencyError);
    bad = cfg;
    bad.storage_duration_us = 3.5;
    CHECK_THROWS_AS(bad.validate(), ConfigInconsistencyError);

    const auto moved = cfg.with_storage(2.0);
    CHECK_NOTHROW(moved.validate());
    CHECK(moved.calib_start_us == doctest::Approx(1.02 + 0.38 * 2.0));
    CHECK(moved.retrieval_window_us == doctest::Approx(5.0));
}

TEST_CASE("classical waveforms") {
    const TimingConfig cfg;
    const auto w = classical_waveforms(cfg, 0.15);
    CHECK(std::abs(measure_fwhm(w.input, cfg.dt()) - 0.6) <= cfg.dt());
    CHECK(energy(w.retrieval, cfg.dt()) / energy(w.input, cfg.dt()) == doctest::Approx(0.15).epsilon(1e-9));

    for (int k = 0; k < cfg.samples(); ++k) {
        const double t = cfg.time(k);
        if (t < cfg.control_off_us) CHECK(w.stored[k] == w.input[k]);
        if (t >= cfg.control_off_us && t < cfg.control_on_us() - 1e-9) CHECK(w.stored[k] == 0.0);
        if (t >= cfg.retrieval_window_us) CHECK(w.stored[k] == 0.0);
    }
    // Decaying transient after the control field returns.
    const int on = static_cast<int>(std::lround(cfg.control_on_us() / cfg.dt()));
    CHECK(w.retrieval[on] > w.retrieval[on + 10]);
    CHECK(w.retrieval[on + 10] > w.retrieval[on + 50]);

    SUBCASE("zero storage, unit efficiency") {
        // The transmitted front is the input itself and the transient carries
        // the full input energy; its shape stays exponential.
        auto c = cfg;
        c.storage_duration_us = 0.0;
        const auto z = classical_waveforms(c, 1.0);
        for (int k = 0; k < c.samples(); ++k) {
            if (c.time(k) < c.control_off_us) CHECK(z.stored[k] == z.input[k]);
        }
        CHECK(energy(z.retrieval, c.dt()) == doctest::Approx(energy(z.input, c.dt())).epsilon(1e-12));
    }
    CHECK_THROWS_AS(classical_waveforms(cfg, 1.5), ConfigInconsistencyError);
}

TEST_CASE("temporal modes") {
    SUBCASE("constant intensity on [0, 1] us") {
        const std::vector<double> flat(200, 3.0);
        const auto m = temporal_mode(flat, 0.01, 0.0, 1.0);
        for (int k = 0; k < 100; ++k) CHECK(m.samples[k] == doctest::Approx(1.0).epsilon(1e-12));
        for (int k = 100; k < 200; ++k) CHECK(m.samples[k] == 0.0);
    }
    const TimingConfig cfg;
    const auto w = classical_waveforms(cfg, 0.15);
    SUBCASE("input pulse") {
        const auto m = input_mode(cfg);
        CHECK(std::abs(m.norm_squared() - 1.0) < 1e-9);
        // Independent norm: analytic integral of the raised cosine is fwhm.
        for (int k = 0; k < cfg.samples(); ++k) {
            CHECK(m.samples[k] >= 0.0);
            CHECK(m.samples[k] == doctest::Approx(std::sqrt(w.input[k] / 0.6)).epsilon(1e-9));
        }
    }
    SUBCASE("retrieval transient") {
        const auto m = temporal_mode(w.stored, cfg.dt(), cfg.control_on_us(), cfg.retrieval_window_us);
        CHECK(std::abs(m.norm_squared() - 1.0) < 1e-9);
        for (int k = 0; k < cfg.samples(); ++k) {
            const double t = cfg.time(k);
            if (m.samples[k] != 0.0) {
                CHECK(t > 2.0);
                CHECK(t < 4.0);
            }
        }
    }
    SUBCASE("zero energy") {
        CHECK_THROWS_AS(temporal_mode(w.stored, cfg.dt(), 1.2, 1.8), ZeroEnergyError);
    }
}

TEST_CASE("LO phase ramp") {
    const TimingConfig cfg;
    CHECK(lo_phase_ramp(0, cfg) == 0.0);
    CHECK(lo_phase_ramp(312, cfg) == doctest::Approx(2.0 * pi * 312.0 / 312.5));
    CHECK(lo_phase_ramp(625, cfg) == doctest::Approx(0.0).epsilon(1e-9));
    int crossings = 0;
    for (std::int64_t k = 1; k < 100000; ++k) {
        const double a = lo_phase_ramp(k - 1, cfg), b = lo_phase_ramp(k, cfg);
        CHECK(b >= 0.0);
        CHECK(b <= 2.0 * pi);
        if ((a - pi) * (b - pi) < 0.0) ++crossings;
    }
    // Each sweep through pi passes the whole of [0, pi) once.
    CHECK(crossings >= 100);
}

TEST_CASE("shot synthesis and matched filtering") {
    const TimingConfig cfg;
    const auto mode = input_mode(cfg);
    MemoryChannelParams ch;

    SUBCASE("projection returns the drawn quadrature") {
        const auto state = make_squeezed_thermal(input_fit_params(0.3), 20);
        ShotSynthesizer syn(state, mode, cfg, ch, 11, {});
        for (int k = 0; k < 50; ++k) {
            const auto shot = syn.synthesize(k);
            CHECK(shot.samples.size() == 800u);
            CHECK(shot.control_on_mask.size() == 800u);
            CHECK(std::abs(matched_filter(shot, mode) - syn.drawn_quadrature(k)) < 1e-12);
        }
        CHECK_THROWS_AS(syn.synthesize(3), SeedReuseError);
    }
    SUBCASE("vacuum without Raman noise is N(0, 1)") {
        ch.raman_db = 0.0;
        ShotSynthesizer syn(DensityMatrix(20), mode, cfg, ch, 5, {});
        const auto m = moments(quadratures(syn, 20000));
        CHECK(std::abs(m.mean) < 3.0 / std::sqrt(20000.0));
        CHECK(std::abs(m.var - 1.0) < 3.0 * std::sqrt(2.0 / 20000));
    }
    SUBCASE("all-zero photocurrent") {
        ShotRecord zero{0.0, std::vector<double>(800, 0.0), std::vector<bool>(800, false)};
        CHECK(matched_filter(zero, mode) == 0.0);
        ShotRecord shorter{0.0, std::vector<double>(700, 0.0), {}};
        CHECK_THROWS_AS(matched_filter(shorter, mode), WindowMismatchError);
    }
    SUBCASE("white noise of unit variance projects to unit variance") {
        std::mt19937_64 gen(3);
        std::normal_distribution<double> normal;
        std::vector<double> q(10000), shot(800);
        for (auto& v : q) {
            for (auto& s : shot) s = normal(gen);
            v = matched_filter(shot, mode);
        }
        CHECK(std::abs(moments(q).var - 1.0) < 0.02);
    }
    SUBCASE("mismatched mode grid") {
        TemporalMode wrong = mode;
        wrong.samples.resize(400);
        CHECK_THROWS_AS(ShotSynthesizer(DensityMatrix(20), wrong, cfg, ch, 1, {}), WindowMismatchError);
    }
}

TEST_CASE("SNL calibration") {
    std::mt19937_64 gen(9);
    std::normal_distribution<double> wide(0.0, 2.0), unit;
    std::vector<double> v(100000);
    for (auto& x : v) x = wide(gen);
    CHECK(calibrate_snl(v) == doctest::Approx(0.5).epsilon(0.01));
    for (auto& x : v) x = unit(gen);
    CHECK(std::abs(calibrate_snl(v) - 1.0) < 3.0 * std::sqrt(2.0 / v.size()));
    CHECK_THROWS_AS(calibrate_snl(std::span(v).first(999)), InsufficientSamplesError);

    // Calibrated vacuum dataset with a detector gain.
    const TimingConfig cfg;
    ShotSynthesizer::Options opt;
    opt.schedule = ControlSchedule::always_off;
    opt.gain = 1.7;
    ShotSynthesizer syn(DensityMatrix(20), input_mode(cfg), cfg, MemoryChannelParams{}, 21, opt);
    const double scale = calibrate_snl(quadratures(syn, 100000));
    CHECK(scale == doctest::Approx(1.0 / 1.7).epsilon(0.01));
    // A fresh vacuum dataset of 100,000 shots, calibrated with that scale.
    auto fresh = quadratures(syn, 100000, 100000);
    for (auto& x : fresh) x *= scale;
    CHECK(std::abs(moments(fresh).var - 1.0) < 0.01);
}

TEST_CASE("end-to-end quadrature statistics at fixed phase") {
    const auto cfg = frozen_ramp();
    const auto mode = input_mode(cfg);
    const MemoryChannelParams ch;
    const int n = 20000;

    ShotSynthesizer::Options vac;
    vac.schedule = ControlSchedule::always_off;
    vac.gain = 2.0;
    vac.stream = 1;
    ShotSynthesizer vacuum(DensityMatrix(20), mode, cfg, ch, 8, vac);
    const double scale = calibrate_snl(quadratures(vacuum, 100000));

    PropertyRng rng(4);
    for (int trial = 0; trial < 4; ++trial) {
        const SqueezedThermalParams p{rng.uniform(0.0, 0.45), rng.uniform(0.0, 0.3), rng.uniform(0.0, pi)};
        const auto state = make_squeezed_thermal(p, 20);
        const double theta = rng.uniform(0.0, pi);
        ShotSynthesizer::Options opt;
        opt.lo_offset = theta;
        opt.gain = 2.0;
        opt.stream = 10 + trial;
        ShotSynthesizer syn(state, mode, cfg, ch, 8, opt);
        auto q = quadratures(syn, n);
        for (auto& x : q) x *= scale;
        const double expect = quad_variance(state, theta);
        CHECK(std::abs(moments(q).var - expect) < 3.0 * expect * std::sqrt(2.0 / n));
    }
}

TEST_CASE("phase-averaged statistics and variance trace") {
    const TimingConfig cfg;
    const auto mode = input_mode(cfg);
    const MemoryChannelParams ch;
    const auto state = make_squeezed_thermal(input_fit_params(0.7), 20);

    SUBCASE("phase average of the quadrature variance") {
        ShotSynthesizer syn(state, mode, cfg, ch, 17, {});
        const int n = 20000;
        const auto q = quadratures(syn, n);
        double avg = 0.0;
        for (int k = 0; k < n; ++k) avg += quad_variance(state, syn.true_lo_phase(k));
        avg /= n;
        CHECK(std::abs(moments(q).var - avg) < 3.0 * avg * std::sqrt(2.0 / n));
    }

    SUBCASE("vacuum trace: calibration window and control-on floor") {
        ShotSynthesizer syn(DensityMatrix(20), mode, cfg, ch, 23, {});
        VarianceAccumulator acc(cfg.samples());
        for (int k = 0; k < 20000; ++k) acc.add(syn.synthesize(k).samples);
        const auto trace = variance_trace(acc, cfg);
        CHECK(window_mean(trace, cfg.calib_start_us, cfg.calib_end_us) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(window_mean(trace, 0.0, 0.4) - std::pow(10.0, 0.01)) < 0.01);
        CHECK(std::abs(window_mean(trace, 2.5, 8.0) - std::pow(10.0, 0.01)) < 0.01);
    }

    SUBCASE("broadband front raises the pulse window") {
        const auto w = classical_waveforms(cfg, 0.15);
        ShotSynthesizer::Options opt;
        opt.broadband.push_back({w.front, state});
        ShotSynthesizer syn(state, mode, cfg, ch, 29, opt);
        VarianceAccumulator acc(cfg.samples());
        for (int k = 0; k < 5000; ++k) acc.add(syn.synthesize(k).samples);
        const auto trace = variance_trace(acc, cfg);
        const double peak = window_mean(trace, 0.9, 1.02);
        const auto e = min_max_variance(state);
        CHECK(peak > 1.2);
        CHECK(peak < std::pow(10.0, 0.01) + 0.5 * (e.vmin + e.vmax) - 1.0 + 0.05);
    }

    SUBCASE("variance accumulator merge matches sequential accumulation") {
        std::mt19937_64 gen(1);
        std::normal_distribution<double> normal;
        VarianceAccumulator all(5), a(5), b(5);
        std::vector<double> row(5);
        for (int k = 0; k < 300; ++k) {
            for (auto& x : row) x = 3.0 + normal(gen);
            all.add(row);
            (k < 120 ? a : b).add(row);
        }
        a.merge(b);
        for (int i = 0; i < 5; ++i) CHECK(a.variance()[i] == doctest::Approx(all.variance()[i]).epsilon(1e-12));
    }
}

TEST_CASE("mode orthogonality") {
    const TimingConfig cfg;
    const auto mode = input_mode(cfg);
    const MemoryChannelParams ch;
    const auto state = make_squeezed_thermal(input_fit_params(0.2), 20);
    ShotSynthesizer syn(state, mode, cfg, ch, 31, {});

    // Odd companion of f on the pulse support (control on, floor 10^0.01),
    // and a flat mode in the dark interval (floor 1).
    TemporalMode odd = mode;
    for (int k = 0; k < cfg.samples(); ++k) odd.samples[k] *= cfg.time(k) - cfg.pulse_center_us;
    double dot = 0.0;
    for (int k = 0; k < cfg.samples(); ++k) dot += odd.samples[k] * mode.samples[k];
    for (int k = 0; k < cfg.samples(); ++k) odd.samples[k] -= dot / (mode.norm_squared() / cfg.dt()) * mode.samples[k];
    const double norm = std::sqrt(odd.norm_squared());
    for (auto& f : odd.samples) f /= norm;
    std::vector<double> flat_i(cfg.samples(), 0.0);
    for (int k = 0; k < cfg.samples(); ++k) {
        if (cfg.time(k) >= 1.6 && cfg.time(k) < 2.0) flat_i[k] = 1.0;
    }
    const auto dark = temporal_mode(flat_i, cfg.dt(), 1.6, 2.0);

    const int n = 20000;
    std::vector<double> a(n), b(n);
    for (int k = 0; k < n; ++k) {
        const auto shot = syn.synthesize(k);
        a[k] = matched_filter(shot, odd);
        b[k] = matched_filter(shot, dark);
    }
    // Chi-square at the 1% level, normal approximation for large n.
    auto z = [&](const std::vector<double>& v, double sigma2) {
        return ((n - 1) * moments(v).var / sigma2 - (n - 1)) / std::sqrt(2.0 * (n - 1));
    };
    CHECK(std::abs(z(a, std::pow(10.0, 0.01))) < 2.576);
    CHECK(std::abs(z(b, 1.0)) < 2.576);
}

TEST_CASE("deterministic generation independent of worker count") {
    const TimingConfig cfg;
    const auto mode = input_mode(cfg);
    const auto state = make_squeezed_thermal(input_fit_params(), 20);
    auto run = [&](int workers) {
        ShotSynthesizer syn(state, mode, cfg, MemoryChannelParams{}, 99, {});
        const std::int64_t n = 3000, block = 256;
        std::vector<double> q(n);
        std::vector<VarianceAccumulator> accs(block_count(n, block), VarianceAccumulator(cfg.samples()));
        parallel_blocks(n, block, workers, [&](std::int64_t b, std::int64_t begin, std::int64_t end) {
            std::vector<double> scratch(cfg.samples());
            for (std::int64_t k = begin; k < end; ++k) {
                q[k] = syn.synthesize_quadrature(k, scratch);
                accs[b].add(scratch);
            }
        });
        VarianceAccumulator total(cfg.samples());
        for (const auto& a : accs) total.merge(a);
        return std::make_pair(q, total.variance());
    };
    const auto one = run(1);
    for (int workers : {4, 8}) {
        const auto other = run(workers);
        CHECK(other.first == one.first);
        CHECK(other.second == one.second);
    }
}

TEST_CASE("LO phase estimation") {
    const TimingConfig cfg;
    const int n = 2000;

    SUBCASE("noiseless trace inverts exactly") {
        const double src_phase = 0.9, offset = 0.4;
        const auto source = make_squeezed_thermal(input_fit_params(src_phase), 20);
        const auto trace = sideband_variance_trace(source, cfg, n, offset, 0.0, 1);
        const auto est = estimate_lo_phase(trace, cfg);
        CHECK(est.phases.size() == static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            const double truth = wrap_mod_pi(lo_phase_ramp(k, cfg) + offset - src_phase);
            double d = std::abs(est.phases[k] - truth);
            d = std::min(d, pi - d);
            CHECK(d < 1e-6);
        }
    }
    SUBCASE("one percent trace noise") {
        const auto source = make_squeezed_thermal(input_fit_params(0.0), 20);
        double sq = 0.0;
        int count = 0;
        for (int trial = 0; trial < 100; ++trial) {
            const double offset = 0.03 * trial;
            const auto trace = sideband_variance_trace(source, cfg, 700, offset, 0.01, 100 + trial);
            const auto est = estimate_lo_phase(trace, cfg);
            for (int k = 0; k < 700; k += 7) {
                double d = std::abs(est.phases[k] - wrap_mod_pi(lo_phase_ramp(k, cfg) + offset));
                d = std::min(d, pi - d);
                sq += d * d;
                ++count;
            }
        }
        CHECK(std::sqrt(sq / count) < 0.05);
    }
    SUBCASE("vacuum has no contrast") {
        const auto trace = sideband_variance_trace(DensityMatrix(20), cfg, n, 0.0, 0.01, 2);
        CHECK_THROWS_AS(estimate_lo_phase(trace, cfg), LowContrastError);
    }
    SUBCASE("trace shorter than one ramp period") {
        const auto source = make_squeezed_thermal(input_fit_params(0.0), 20);
        const auto trace = sideband_variance_trace(source, cfg, 300, 0.0, 0.0, 2);
        CHECK_THROWS_AS(estimate_lo_phase(trace, cfg), InsufficientCoverageError);
    }
}

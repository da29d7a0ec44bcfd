#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "sqzmem/channel.hpp"
#include "sqzmem/density_matrix.hpp"

namespace sqzmem {

/// Acquisition timing. Times in microseconds relative to the trace start.
struct TimingConfig {
    double pulse_fwhm_us = 0.6;
    double pulse_center_us = 1.0;
    double control_off_us = 1.02;
    double storage_duration_us = 1.0;
    /// End of the retrieval analysis window (the control field stays on until then).
    double retrieval_window_us = 4.0;
    double calib_start_us = 1.4;
    double calib_end_us = 2.0;
    double acq_window_us = 8.0;
    double sample_rate_per_us = 100.0;
    double rep_period_ms = 4.0;
    double lo_ramp_period_s = 2.5;
    std::int64_t shots = 100000;

    /// Throws ConfigInconsistencyError.
    void validate() const;

    double dt() const { return 1.0 / sample_rate_per_us; }
    int samples() const;
    double time(int k) const { return k * dt(); }
    double control_on_us() const { return control_off_us + storage_duration_us; }

    /// Copy with a new storage time; the calibration window keeps its relative
    /// position inside the dark interval.
    TimingConfig with_storage(double storage_us) const;
};

struct ClassicalWaveforms {
    double dt;
    std::vector<double> input;   ///< pulse without storage
    std::vector<double> stored;  ///< transmitted front, dark storage interval, retrieval
    /// Retrieval part of `stored` only (zero before the control field returns).
    std::vector<double> retrieval;
    /// Transmitted front of `stored` (zero from control-off on).
    std::vector<double> front;
};

/// Raised-cosine input pulse and the storage/retrieval waveform whose
/// retrieved energy is `efficiency` times the input energy.
ClassicalWaveforms classical_waveforms(const TimingConfig& cfg, double efficiency);

/// Full width at half maximum of a sampled unimodal waveform (linear interpolation).
double measure_fwhm(std::span<const double> intensity, double dt);

double energy(std::span<const double> intensity, double dt);

/// Unit-norm amplitude f(t_k), sum f^2 dt = 1, stored over the full trace.
struct TemporalMode {
    double dt = 0.01;
    std::vector<double> samples;

    double norm_squared() const;
};

/// f = sqrt(I) on [start, end), zero elsewhere, normalized.
TemporalMode temporal_mode(std::span<const double> intensity, double dt, double start_us, double end_us);

/// Triangle ramp over [0, 2 pi] with period lo_ramp_period, sampled once per repetition.
double lo_phase_ramp(std::int64_t shot_index, const TimingConfig& cfg);

struct ShotRecord {
    double lo_phase = 0.0;
    std::vector<double> samples;
    std::vector<bool> control_on_mask;
};

struct QuadratureRecord {
    double phase = 0.0;  ///< [0, pi)
    double value = 0.0;  ///< SNL units
};

/// Draws quadrature samples from pr(x | theta) by inverse CDF on cached
/// 4096-point grids, one per phase bin of width <= 0.01 rad.
class QuadratureSampler {
public:
    explicit QuadratureSampler(const DensityMatrix& rho);

    /// Sample in SNL units for LO phase `theta`, given a uniform variate u in (0, 1).
    double sample_snl(double theta, double u) const;

    static constexpr int grid_points = 4096;
    static constexpr int phase_bins = 315;

private:
    std::vector<double> grid_;
    std::vector<std::vector<double>> cdf_;  // per phase bin, normalized
};

enum class ControlSchedule {
    store_and_retrieve,  ///< on, off for the storage interval, on again
    no_retrieval,        ///< never switched back on
    always_off,          ///< clean vacuum calibration segment
    always_on,           ///< propagation without storage
};

/// Extra broadband quadrature noise over an intensity envelope: the local
/// variance density is N_floor + g(t) (V(theta) - 1) with g in [0, 1] and V the
/// phase-dependent SNL variance of `state`.
struct BroadbandSegment {
    std::vector<double> envelope;
    DensityMatrix state;
};

/// Per-(seed, stream, shot) generator. SplitMix64 mixing of the key seeds an mt19937_64.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/**
 * Synthesizes homodyne photocurrents that carry a quadrature sample q of
 * `state` exactly in `mode` and floor noise elsewhere:
 *     i_k = w_k + (q - sum_j w_j F_j) F_k,   F_k = f(t_k) sqrt(dt),
 * w_k independent with variance N(t_k) per sample. The projection onto F
 * returns q exactly; samples are finally multiplied by `gain`.
 */
class ShotSynthesizer {
public:
    struct Options {
        ControlSchedule schedule = ControlSchedule::store_and_retrieve;
        double lo_offset = 0.0;     ///< true LO phase = ramp + offset
        std::uint64_t stream = 0;   ///< distinguishes datasets drawn with one seed
        std::vector<BroadbandSegment> broadband;
        bool guard_reuse = true;
        double gain = 1.0;          ///< detector scale, undone by calibrate_snl
    };

    ShotSynthesizer(const DensityMatrix& state, TemporalMode mode, const TimingConfig& cfg,
                    const MemoryChannelParams& channel, std::uint64_t seed, Options options);

    /// Throws SeedReuseError when the same shot index is requested twice.
    ShotRecord synthesize(std::int64_t shot_index) const;

    /// Synthesizes and matched-filters in one pass, without keeping the record.
    double synthesize_quadrature(std::int64_t shot_index, std::span<double> scratch) const;

    /// The quadrature value (SNL, before gain) carried by shot `shot_index`;
    /// replays the shot's stream without claiming it.
    double drawn_quadrature(std::int64_t shot_index) const;

    double true_lo_phase(std::int64_t shot_index) const;
    const TemporalMode& mode() const { return mode_; }
    const std::vector<bool>& control_mask() const { return control_on_; }
    const TimingConfig& timing() const { return cfg_; }

private:
    void fill(std::int64_t shot_index, double theta, std::span<double> out) const;
    void claim(std::int64_t shot_index) const;

    QuadratureSampler sampler_;
    TemporalMode mode_;
    TimingConfig cfg_;
    std::uint64_t seed_;
    Options options_;
    std::vector<bool> control_on_;
    std::vector<double> floor_;
    struct SegmentModel {
        std::vector<double> envelope;
        // V(theta) = c0 + c1 cos 2 theta + c2 sin 2 theta
        double c0, c1, c2;
    };
    std::vector<SegmentModel> segments_;
    mutable std::mutex used_mutex_;
    mutable std::set<std::int64_t> used_;
};

std::vector<bool> control_schedule_mask(const TimingConfig& cfg, ControlSchedule schedule);

/// q_raw = sum_k i_k F_k, the projection onto the unit vector F_k = f(t_k) sqrt(dt). Throws WindowMismatchError on length/step mismatch.
double matched_filter(const ShotRecord& shot, const TemporalMode& mode);
double matched_filter(std::span<const double> samples, const TemporalMode& mode);

/// 1 / sqrt(sample variance). Throws InsufficientSamplesError below 1000 values.
double calibrate_snl(std::span<const double> vacuum_raw_values);

/// Streaming per-sample mean/variance with deterministic pairwise merging.
class VarianceAccumulator {
public:
    explicit VarianceAccumulator(int samples = 0);
    void add(std::span<const double> trace);
    void merge(const VarianceAccumulator& other);
    std::int64_t count() const { return count_; }
    std::vector<double> variance() const;

private:
    std::int64_t count_ = 0;
    std::vector<double> mean_;
    std::vector<double> m2_;
};

struct VarianceTracePoint {
    double time_us;
    double variance_snl;
};

/// Per-sample variance normalized by its mean over the calibration window.
std::vector<VarianceTracePoint> variance_trace(const VarianceAccumulator& acc, const TimingConfig& cfg);
std::vector<VarianceTracePoint> variance_trace(std::span<const ShotRecord> shots, const TimingConfig& cfg);

/// Mean of the trace over [start, end) microseconds.
double window_mean(std::span<const VarianceTracePoint> trace, double start_us, double end_us);

struct LoPhaseEstimate {
    double offset;      ///< a, SNL
    double amplitude;   ///< b, SNL
    double theta0;      ///< ramp angle of the squeezed quadrature, [0, pi)
    std::vector<double> phases;  ///< per shot, mod pi, relative to the squeezed quadrature
};

/// Fits V = a - b cos(2 (ramp(k) - theta0)) to the slow sideband variance
/// signal (one value per shot) and assigns each shot its model phase.
/// Throws LowContrastError when 2b < 0.05 SNL.
LoPhaseEstimate estimate_lo_phase(std::span<const double> sideband_variance, const TimingConfig& cfg,
                                  std::int64_t first_shot = 0);

/// Spectrum-analyzer emulation of the cw source: V_src(ramp(k) + lo_offset) with
/// multiplicative Gaussian noise of relative size `relative_noise`.
std::vector<double> sideband_variance_trace(const DensityMatrix& source, const TimingConfig& cfg, std::int64_t shots,
                                            double lo_offset, double relative_noise, std::uint64_t seed);

}  // namespace sqzmem

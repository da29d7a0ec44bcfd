#include "sqzmem/timedomain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "sqzmem/errors.hpp"
#include "sqzmem/oscillator.hpp"
#include "sqzmem/quadrature.hpp"

namespace sqzmem {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigInconsistencyError("timing: " + what);
}

std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double open_uniform(std::mt19937_64& g) { return ((g() >> 11) + 0.5) * 0x1.0p-53; }

double raised_cosine(double t, double centre, double fwhm) {
    const double s = (t - centre) / fwhm;
    return std::abs(s) < 1.0 ? 0.5 * (1.0 + std::cos(std::numbers::pi * s)) : 0.0;
}

}  // namespace

int TimingConfig::samples() const { return static_cast<int>(std::lround(acq_window_us * sample_rate_per_us)); }

void TimingConfig::validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    for (double v : {pulse_fwhm_us, pulse_center_us, control_off_us, storage_duration_us, retrieval_window_us,
                     calib_start_us, calib_end_us, acq_window_us, sample_rate_per_us, rep_period_ms,
                     lo_ramp_period_s}) {
        require(finite(v), "non-finite value");
    }
    require(pulse_fwhm_us > 0.0, "pulse_fwhm must be positive");
    require(sample_rate_per_us > 0.0, "sample_rate must be positive");
    require(sample_rate_per_us * pulse_fwhm_us >= 20.0, "sample_rate * pulse_fwhm must be >= 20");
    require(acq_window_us > 0.0 && samples() >= 2, "acquisition window too short");
    require(pulse_center_us - pulse_fwhm_us >= 0.0, "pulse starts before the acquisition window");
    require(pulse_center_us + pulse_fwhm_us <= acq_window_us, "pulse ends after the acquisition window");
    require(control_off_us > 0.0, "control_off_time must be positive");
    require(storage_duration_us >= 0.0, "storage_duration must be nonnegative");
    require(control_on_us() < retrieval_window_us, "retrieval window must end after the control field returns");
    require(retrieval_window_us <= acq_window_us, "retrieval window exceeds the acquisition window");
    require(calib_start_us < calib_end_us, "calibration window is empty");
    if (storage_duration_us > 0.0) {
        require(calib_start_us >= control_off_us && calib_end_us <= control_on_us() + 1e-12,
                "calibration window must lie inside the control-off interval");
    } else {
        require(calib_start_us >= 0.0 && calib_end_us <= acq_window_us, "calibration window outside acquisition");
    }
    require(calib_end_us - calib_start_us >= 2.0 * dt(), "calibration window shorter than two samples");
    require(rep_period_ms > 0.0 && lo_ramp_period_s > 0.0, "periods must be positive");
    require(lo_ramp_period_s * 1000.0 >= 2.0 * rep_period_ms, "LO ramp must span several repetitions");
    require(shots >= 1, "shots must be positive");
}

TimingConfig TimingConfig::with_storage(double storage_us) const {
    TimingConfig out = *this;
    const double base = storage_duration_us;
    out.storage_duration_us = storage_us;
    if (base > 0.0) {
        const double s = storage_us / base;
        out.calib_start_us = control_off_us + (calib_start_us - control_off_us) * s;
        out.calib_end_us = control_off_us + (calib_end_us - control_off_us) * s;
    }
    out.retrieval_window_us = std::min(acq_window_us, out.control_on_us() + (retrieval_window_us - control_on_us()));
    return out;
}

double energy(std::span<const double> intensity, double dt) {
    double e = 0.0;
    for (double v : intensity) e += v;
    return e * dt;
}

ClassicalWaveforms classical_waveforms(const TimingConfig& cfg, double efficiency) {
    cfg.validate();
    if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
        throw ConfigInconsistencyError("efficiency must lie in [0, 1]");
    }
    const int n = cfg.samples();
    const double dt = cfg.dt();
    ClassicalWaveforms w{dt, std::vector<double>(n), std::vector<double>(n), std::vector<double>(n, 0.0),
                         std::vector<double>(n, 0.0)};
    for (int k = 0; k < n; ++k) {
        w.input[k] = raised_cosine(cfg.time(k), cfg.pulse_center_us, cfg.pulse_fwhm_us);
        if (cfg.time(k) < cfg.control_off_us) w.front[k] = w.input[k];
    }

    // Retrieval transient: exponential decay from the moment the control
    // returns, confined to the retrieval window, carrying efficiency * E_in.
    const double t_on = cfg.control_on_us();
    const double decay = (cfg.retrieval_window_us - t_on) / 6.0;
    double shape_energy = 0.0;
    for (int k = 0; k < n; ++k) {
        const double t = cfg.time(k);
        if (t >= t_on - 1e-12 && t < cfg.retrieval_window_us) {
            w.retrieval[k] = std::exp(-(t - t_on) / decay);
            shape_energy += w.retrieval[k] * dt;
        }
    }
    const double scale = shape_energy > 0.0 ? efficiency * energy(w.input, dt) / shape_energy : 0.0;
    for (int k = 0; k < n; ++k) {
        w.retrieval[k] *= scale;
        w.stored[k] = w.front[k] + w.retrieval[k];
    }
    return w;
}

double measure_fwhm(std::span<const double> intensity, double dt) {
    if (intensity.empty()) return 0.0;
    const auto peak_it = std::max_element(intensity.begin(), intensity.end());
    const double half = 0.5 * *peak_it;
    if (half <= 0.0) return 0.0;
    const auto peak = static_cast<std::size_t>(peak_it - intensity.begin());
    std::size_t lo = peak;
    while (lo > 0 && intensity[lo - 1] >= half) --lo;
    std::size_t hi = peak;
    while (hi + 1 < intensity.size() && intensity[hi + 1] >= half) ++hi;
    double left = static_cast<double>(lo);
    if (lo > 0) left -= (intensity[lo] - half) / (intensity[lo] - intensity[lo - 1]);
    double right = static_cast<double>(hi);
    if (hi + 1 < intensity.size()) right += (intensity[hi] - half) / (intensity[hi] - intensity[hi + 1]);
    return (right - left) * dt;
}

double TemporalMode::norm_squared() const {
    double s = 0.0;
    for (double f : samples) s += f * f;
    return s * dt;
}

TemporalMode temporal_mode(std::span<const double> intensity, double dt, double start_us, double end_us) {
    if (!(dt > 0.0)) throw InvalidParameterError("temporal_mode: dt must be positive");
    TemporalMode mode{dt, std::vector<double>(intensity.size(), 0.0)};
    double e = 0.0;
    for (std::size_t k = 0; k < intensity.size(); ++k) {
        const double t = k * dt;
        if (t < start_us - 1e-12 || t >= end_us - 1e-12) continue;
        if (intensity[k] < 0.0) throw InvalidParameterError("temporal_mode: negative intensity on the window");
        mode.samples[k] = std::sqrt(intensity[k]);
        e += intensity[k] * dt;
    }
    if (!(e > 0.0)) throw ZeroEnergyError("temporal_mode: no intensity inside the window");
    const double inv = 1.0 / std::sqrt(e);
    for (double& f : mode.samples) f *= inv;
    return mode;
}

double lo_phase_ramp(std::int64_t shot_index, const TimingConfig& cfg) {
    const double period_shots = cfg.lo_ramp_period_s * 1000.0 / cfg.rep_period_ms;
    double u = std::fmod(static_cast<double>(shot_index) / period_shots, 1.0);
    if (u < 0.0) u += 1.0;
    return two_pi * (u < 0.5 ? 2.0 * u : 2.0 - 2.0 * u);
}

// ---------------------------------------------------------------------------

QuadratureSampler::QuadratureSampler(const DensityMatrix& rho) : grid_(grid_points), cdf_(phase_bins) {
    const int dim = rho.dim();
    const double h = 2.0 * max_quadrature_abs / (grid_points - 1);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> psi_rm(grid_points, dim);
    for (int i = 0; i < grid_points; ++i) {
        grid_[i] = -max_quadrature_abs + i * h;
        oscillator_wavefunctions(grid_[i], std::span<double>(psi_rm.row(i).data(), dim));
    }
    const MatrixR basis = psi_rm;

    const double width = std::numbers::pi / phase_bins;
    const MatrixC& m = rho.matrix();
    for (int b = 0; b < phase_bins; ++b) {
        const double theta = (b + 0.5) * width;
        MatrixR s(dim, dim);
        for (int r = 0; r < dim; ++r) {
            for (int c = 0; c < dim; ++c) s(r, c) = (m(r, c) * std::polar(1.0, (c - r) * theta)).real();
        }
        const VectorR pdf = (basis * s).cwiseProduct(basis).rowwise().sum();
        auto& cdf = cdf_[b];
        cdf.assign(grid_points, 0.0);
        for (int i = 1; i < grid_points; ++i) {
            cdf[i] = cdf[i - 1] + 0.5 * h * (std::max(0.0, pdf(i - 1)) + std::max(0.0, pdf(i)));
        }
        const double total = cdf.back();
        if (!(total > 0.0)) throw InvalidStateError("quadrature distribution has no weight on the grid");
        for (double& v : cdf) v /= total;
    }
}

double QuadratureSampler::sample_snl(double theta, double u) const {
    // Linear interpolation between neighbouring bin centres: pick one of the
    // two with the interpolation weight, reusing u for the inverse CDF.
    const double width = std::numbers::pi / phase_bins;
    double t = std::fmod(theta, two_pi);
    if (t < 0.0) t += two_pi;
    const double s = t / width - 0.5;
    const double lower = std::floor(s);
    const double frac = s - lower;

    // Split u into a bin selector and a fresh uniform for the inverse CDF.
    bool upper = u >= 1.0 - frac;
    double v = upper ? (u - (1.0 - frac)) / frac : u / (1.0 - frac);
    v = std::clamp(v, 1e-300, 1.0 - 1e-16);

    long long bin = static_cast<long long>(lower) + (upper ? 1 : 0);
    // Bins repeat with period pi in theta with x -> -x.
    long long wraps = bin >= 0 ? bin / phase_bins : -((-bin + phase_bins - 1) / phase_bins);
    bin -= wraps * phase_bins;
    const bool flip = (wraps % 2) != 0;

    const auto& cdf = cdf_[static_cast<std::size_t>(bin)];
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), v);
    std::size_t i = static_cast<std::size_t>(std::clamp<long>(it - cdf.begin(), 1, grid_points - 1));
    const double c0 = cdf[i - 1], c1 = cdf[i];
    const double a = c1 > c0 ? (v - c0) / (c1 - c0) : 0.5;
    const double x = grid_[i - 1] + a * (grid_[i] - grid_[i - 1]);
    return std::numbers::sqrt2 * (flip ? -x : x);
}

// ---------------------------------------------------------------------------

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    return splitmix(splitmix(splitmix(seed) ^ stream) ^ index);
}

std::vector<bool> control_schedule_mask(const TimingConfig& cfg, ControlSchedule schedule) {
    const int n = cfg.samples();
    std::vector<bool> mask(n);
    for (int k = 0; k < n; ++k) {
        const double t = cfg.time(k);
        switch (schedule) {
            case ControlSchedule::store_and_retrieve:
                mask[k] = t < cfg.control_off_us || t >= cfg.control_on_us() - 1e-12;
                break;
            case ControlSchedule::no_retrieval: mask[k] = t < cfg.control_off_us; break;
            case ControlSchedule::always_off: mask[k] = false; break;
            case ControlSchedule::always_on: mask[k] = true; break;
        }
    }
    return mask;
}

ShotSynthesizer::ShotSynthesizer(const DensityMatrix& state, TemporalMode mode, const TimingConfig& cfg,
                                 const MemoryChannelParams& channel, std::uint64_t seed, Options options)
    : sampler_(state), mode_(std::move(mode)), cfg_(cfg), seed_(seed), options_(std::move(options)) {
    cfg_.validate();
    channel.validate();
    const int n = cfg_.samples();
    if (static_cast<int>(mode_.samples.size()) != n || std::abs(mode_.dt - cfg_.dt()) > 1e-12) {
        throw WindowMismatchError("temporal mode does not match the acquisition grid");
    }
    if (std::abs(mode_.norm_squared() - 1.0) > 1e-9) throw InvalidParameterError("temporal mode is not unit-norm");
    if (!(options_.gain > 0.0)) throw InvalidParameterError("detector gain must be positive");
    control_on_ = control_schedule_mask(cfg_, options_.schedule);
    floor_.resize(n);
    const double raman = channel.env_variance_snl();
    for (int k = 0; k < n; ++k) floor_[k] = control_on_[k] ? raman : 1.0;
    for (const auto& seg : options_.broadband) {
        if (static_cast<int>(seg.envelope.size()) != n) {
            throw WindowMismatchError("broadband envelope does not match the acquisition grid");
        }
        const double v0 = quad_variance(seg.state, 0.0);
        const double v90 = quad_variance(seg.state, 0.5 * std::numbers::pi);
        const double v45 = quad_variance(seg.state, 0.25 * std::numbers::pi);
        const double c0 = 0.5 * (v0 + v90);
        segments_.push_back({seg.envelope, c0, 0.5 * (v0 - v90), v45 - c0});
    }
}

double ShotSynthesizer::true_lo_phase(std::int64_t shot_index) const {
    double t = std::fmod(lo_phase_ramp(shot_index, cfg_) + options_.lo_offset, two_pi);
    return t < 0.0 ? t + two_pi : t;
}

void ShotSynthesizer::claim(std::int64_t shot_index) const {
    if (!options_.guard_reuse) return;
    std::lock_guard lock(used_mutex_);
    if (!used_.insert(shot_index).second) {
        throw SeedReuseError("shot stream (seed " + std::to_string(seed_) + ", stream " +
                             std::to_string(options_.stream) + ", shot " + std::to_string(shot_index) +
                             ") requested twice");
    }
}

double ShotSynthesizer::drawn_quadrature(std::int64_t shot_index) const {
    std::mt19937_64 gen(stream_key(seed_, options_.stream, static_cast<std::uint64_t>(shot_index)));
    return sampler_.sample_snl(true_lo_phase(shot_index), open_uniform(gen));
}

void ShotSynthesizer::fill(std::int64_t shot_index, double theta, std::span<double> out) const {
    std::mt19937_64 gen(stream_key(seed_, options_.stream, static_cast<std::uint64_t>(shot_index)));
    const double q = sampler_.sample_snl(theta, open_uniform(gen));
    std::normal_distribution<double> normal;

    const double c2 = std::cos(2.0 * theta), s2 = std::sin(2.0 * theta);
    const double sqdt = std::sqrt(cfg_.dt());
    const std::size_t n = out.size();
    double proj = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double var = floor_[k];
        for (const auto& seg : segments_) {
            const double g = seg.envelope[k];
            if (g != 0.0) var += g * (seg.c0 + seg.c1 * c2 + seg.c2 * s2 - 1.0);
        }
        const double w = std::sqrt(std::max(var, 0.0)) * normal(gen);
        out[k] = w;
        proj += w * mode_.samples[k] * sqdt;
    }
    const double shift = q - proj;
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = options_.gain * (out[k] + shift * mode_.samples[k] * sqdt);
    }
}

ShotRecord ShotSynthesizer::synthesize(std::int64_t shot_index) const {
    claim(shot_index);
    ShotRecord rec;
    rec.lo_phase = true_lo_phase(shot_index);
    rec.samples.resize(cfg_.samples());
    rec.control_on_mask = control_on_;
    fill(shot_index, rec.lo_phase, rec.samples);
    return rec;
}

double ShotSynthesizer::synthesize_quadrature(std::int64_t shot_index, std::span<double> scratch) const {
    claim(shot_index);
    if (static_cast<int>(scratch.size()) != cfg_.samples()) throw WindowMismatchError("scratch buffer size");
    fill(shot_index, true_lo_phase(shot_index), scratch);
    return matched_filter(scratch, mode_);
}

// ---------------------------------------------------------------------------

double matched_filter(std::span<const double> samples, const TemporalMode& mode) {
    if (samples.size() != mode.samples.size()) {
        throw WindowMismatchError("matched filter: shot has " + std::to_string(samples.size()) +
                                  " samples, mode has " + std::to_string(mode.samples.size()));
    }
    const double sqdt = std::sqrt(mode.dt);
    double q = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) q += samples[k] * mode.samples[k];
    return q * sqdt;
}

double matched_filter(const ShotRecord& shot, const TemporalMode& mode) { return matched_filter(shot.samples, mode); }

double calibrate_snl(std::span<const double> values) {
    if (values.size() < 1000) {
        throw InsufficientSamplesError("calibration needs at least 1000 vacuum values, got " +
                                       std::to_string(values.size()));
    }
    double mean = 0.0, m2 = 0.0;
    std::size_t n = 0;
    for (double v : values) {
        ++n;
        const double d = v - mean;
        mean += d / n;
        m2 += d * (v - mean);
    }
    const double var = m2 / (n - 1);
    if (!(var > 0.0)) throw InvalidParameterError("calibration data have zero variance");
    return 1.0 / std::sqrt(var);
}

// ---------------------------------------------------------------------------

VarianceAccumulator::VarianceAccumulator(int samples) : mean_(samples, 0.0), m2_(samples, 0.0) {}

void VarianceAccumulator::add(std::span<const double> trace) {
    if (trace.size() != mean_.size()) throw WindowMismatchError("variance accumulator: trace length mismatch");
    ++count_;
    const double inv = 1.0 / static_cast<double>(count_);
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const double d = trace[k] - mean_[k];
        mean_[k] += d * inv;
        m2_[k] += d * (trace[k] - mean_[k]);
    }
}

void VarianceAccumulator::merge(const VarianceAccumulator& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
        *this = other;
        return;
    }
    if (other.mean_.size() != mean_.size()) throw WindowMismatchError("variance accumulator: length mismatch");
    const double na = static_cast<double>(count_), nb = static_cast<double>(other.count_);
    const double n = na + nb;
    for (std::size_t k = 0; k < mean_.size(); ++k) {
        const double d = other.mean_[k] - mean_[k];
        mean_[k] += d * nb / n;
        m2_[k] += other.m2_[k] + d * d * na * nb / n;
    }
    count_ += other.count_;
}

std::vector<double> VarianceAccumulator::variance() const {
    std::vector<double> v(m2_.size(), 0.0);
    if (count_ < 2) return v;
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = m2_[k] / static_cast<double>(count_ - 1);
    return v;
}

std::vector<VarianceTracePoint> variance_trace(const VarianceAccumulator& acc, const TimingConfig& cfg) {
    const auto var = acc.variance();
    if (static_cast<int>(var.size()) != cfg.samples()) throw WindowMismatchError("variance trace length mismatch");
    double ref = 0.0;
    int count = 0;
    for (int k = 0; k < cfg.samples(); ++k) {
        const double t = cfg.time(k);
        if (t >= cfg.calib_start_us - 1e-12 && t < cfg.calib_end_us - 1e-12) {
            ref += var[k];
            ++count;
        }
    }
    if (count == 0 || !(ref > 0.0)) throw InsufficientSamplesError("calibration window holds no variance");
    ref /= count;
    std::vector<VarianceTracePoint> out(var.size());
    for (std::size_t k = 0; k < var.size(); ++k) out[k] = {cfg.time(static_cast<int>(k)), var[k] / ref};
    return out;
}

std::vector<VarianceTracePoint> variance_trace(std::span<const ShotRecord> shots, const TimingConfig& cfg) {
    VarianceAccumulator acc(cfg.samples());
    for (const auto& s : shots) acc.add(s.samples);
    return variance_trace(acc, cfg);
}

double window_mean(std::span<const VarianceTracePoint> trace, double start_us, double end_us) {
    double s = 0.0;
    int n = 0;
    for (const auto& p : trace) {
        if (p.time_us >= start_us - 1e-12 && p.time_us < end_us - 1e-12) {
            s += p.variance_snl;
            ++n;
        }
    }
    if (n == 0) throw InvalidParameterError("window holds no trace samples");
    return s / n;
}

// ---------------------------------------------------------------------------

LoPhaseEstimate estimate_lo_phase(std::span<const double> trace, const TimingConfig& cfg, std::int64_t first_shot) {
    const auto n = static_cast<Eigen::Index>(trace.size());
    const double period_shots = cfg.lo_ramp_period_s * 1000.0 / cfg.rep_period_ms;
    if (static_cast<double>(n) < period_shots) {
        throw InsufficientCoverageError("sideband trace must span at least one LO ramp period");
    }
    // V = a + c1 cos 2 theta + c2 sin 2 theta, with c1 = -b cos 2 theta0, c2 = -b sin 2 theta0.
    Eigen::MatrixX3d design(n, 3);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double th = lo_phase_ramp(first_shot + k, cfg);
        design(k, 0) = 1.0;
        design(k, 1) = std::cos(2.0 * th);
        design(k, 2) = std::sin(2.0 * th);
        rhs(k) = trace[static_cast<std::size_t>(k)];
    }
    const Eigen::Vector3d c = design.colPivHouseholderQr().solve(rhs);
    LoPhaseEstimate est;
    est.offset = c(0);
    est.amplitude = std::hypot(c(1), c(2));
    if (2.0 * est.amplitude < 0.05) {
        throw LowContrastError("sideband contrast " + std::to_string(2.0 * est.amplitude) +
                               " SNL is below 0.05; LO phase indeterminate");
    }
    est.theta0 = wrap_mod_pi(0.5 * std::atan2(-c(2), -c(1)));
    est.phases.resize(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
        est.phases[static_cast<std::size_t>(k)] = wrap_mod_pi(lo_phase_ramp(first_shot + k, cfg) - est.theta0);
    }
    return est;
}

std::vector<double> sideband_variance_trace(const DensityMatrix& source, const TimingConfig& cfg, std::int64_t shots,
                                            double lo_offset, double relative_noise, std::uint64_t seed) {
    const double v0 = quad_variance(source, 0.0);
    const double v90 = quad_variance(source, 0.5 * std::numbers::pi);
    const double v45 = quad_variance(source, 0.25 * std::numbers::pi);
    const double c0 = 0.5 * (v0 + v90), c1 = 0.5 * (v0 - v90), c2 = v45 - c0;
    std::mt19937_64 gen(stream_key(seed, 0x5eedULL, 0));
    std::normal_distribution<double> normal;
    std::vector<double> out(static_cast<std::size_t>(std::max<std::int64_t>(shots, 0)));
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double th = lo_phase_ramp(static_cast<std::int64_t>(k), cfg) + lo_offset;
        const double v = c0 + c1 * std::cos(2.0 * th) + c2 * std::sin(2.0 * th);
        out[k] = v * (1.0 + relative_noise * normal(gen));
    }
    return out;
}

}  // namespace sqzmem

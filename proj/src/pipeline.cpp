#include "sqzmem/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <numbers>
#include <random>

#include "sqzmem/content_hash.hpp"
#include "sqzmem/dataset_io.hpp"
#include "sqzmem/errors.hpp"
#include "sqzmem/gaussian.hpp"
#include "sqzmem/parallel.hpp"
#include "sqzmem/quadrature.hpp"
#include "sqzmem/states.hpp"

namespace sqzmem {

using nlohmann::json;

namespace {

constexpr const char* library_version = "1.0.0";
constexpr std::int64_t shot_block = 1000;

// Stream ids of the synthesized datasets.
enum : std::uint64_t {
    stream_input = 1,
    stream_retrieval = 2,
    stream_calib_input = 3,
    stream_calib_retrieval = 4,
    stream_sweep = 0x5eeb,
    stream_phase_noise = 0x9015e,
};

// Minimum variance contrast (SNL) for a sweep point to carry a phase.
constexpr double sweep_min_contrast = 0.05;

int resolve_workers(int workers) { return workers > 0 ? workers : worker_count(); }

struct StreamOutput {
    std::vector<double> raw;
    VarianceAccumulator acc;
};

StreamOutput run_stream(const ShotSynthesizer& synth, std::int64_t n, bool accumulate, int workers) {
    const int samples = synth.timing().samples();
    StreamOutput out{std::vector<double>(static_cast<std::size_t>(n)), VarianceAccumulator(samples)};
    std::vector<VarianceAccumulator> blocks;
    if (accumulate) blocks.assign(static_cast<std::size_t>(block_count(n, shot_block)), VarianceAccumulator(samples));
    parallel_blocks(n, shot_block, workers, [&](std::int64_t b, std::int64_t begin, std::int64_t end) {
        std::vector<double> scratch(static_cast<std::size_t>(samples));
        for (std::int64_t i = begin; i < end; ++i) {
            out.raw[static_cast<std::size_t>(i)] = synth.synthesize_quadrature(i, scratch);
            if (accumulate) blocks[static_cast<std::size_t>(b)].add(scratch);
        }
    });
    for (const auto& b : blocks) out.acc.merge(b);
    return out;
}

std::vector<double> scaled(std::span<const double> v, double s) {
    std::vector<double> out(v.begin(), v.end());
    for (auto& x : out) x *= s;
    return out;
}

std::vector<QuadratureRecord> make_records(std::span<const double> phases, std::span<const double> raw, double scale) {
    std::vector<QuadratureRecord> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = {phases[i], scale * raw[i]};
    return out;
}

json summary_json(const SqueezingSummary& s) {
    return {{"squeezing_db", s.squeezing_db}, {"antisqueezing_db", s.antisqueezing_db}, {"theta_min_rad", s.theta_min}};
}

std::string variance_curve_csv(const DensityMatrix& rho) {
    std::vector<double> th, v;
    for (int k = 0; k <= 180; ++k) {
        th.push_back(std::numbers::pi * k / 180.0);
        v.push_back(quad_variance(rho, th.back()));
    }
    return columns_csv({"theta_rad", "variance_snl"}, {th, v});
}

// Squeezed thermal state with the variance extrema and orientation of rho.
DensityMatrix squeezed_thermal_fit(const DensityMatrix& rho) {
    const auto e = min_max_variance(rho);
    return make_squeezed_thermal(fit_squeezed_thermal(e.vmin, e.vmax, e.theta_min), max_fock_cutoff);
}

}  // namespace

Variant parse_variant(const std::string& text) {
    if (text == "standard") return Variant::standard;
    if (text == "store-vacuum") return Variant::store_vacuum;
    if (text == "no-retrieval") return Variant::no_retrieval;
    throw InvalidParameterError("unknown variant '" + text + "' (standard, store-vacuum, no-retrieval)");
}

std::string to_string(Variant v) {
    switch (v) {
        case Variant::standard: return "standard";
        case Variant::store_vacuum: return "store-vacuum";
        case Variant::no_retrieval: return "no-retrieval";
    }
    return "?";
}

ExperimentStates experiment_states(const RunConfig& cfg, Variant variant) {
    const auto params =
        fit_squeezed_thermal_db(cfg.source.squeezing_db, cfg.source.antisqueezing_db, cfg.source.phase_rad);
    DensityMatrix source = make_squeezed_thermal(params, max_fock_cutoff);
    const DensityMatrix vacuum(max_fock_cutoff);
    switch (variant) {
        case Variant::standard: {
            DensityMatrix retrieved = memory_channel(source, cfg.channel);
            return {source, source, retrieved};
        }
        case Variant::store_vacuum: return {source, vacuum, memory_channel(vacuum, cfg.channel)};
        case Variant::no_retrieval: return {source, source, vacuum};
    }
    throw InvalidParameterError("unknown variant");
}

SimulationResult simulate(const RunConfig& cfg, const SimulateOptions& opts) {
    cfg.validate();
    const TimingConfig& t = cfg.timing;
    const std::int64_t n = opts.shots.value_or(t.shots);
    if (n < 1000) throw InvalidParameterError("simulate needs at least 1000 shots");
    const int workers = resolve_workers(opts.workers);
    const auto states = experiment_states(cfg, opts.variant);

    SimulationResult res;
    res.variant = opts.variant;
    res.shots = n;
    res.waveforms = classical_waveforms(t, cfg.channel.efficiency());
    const auto& wf = res.waveforms;
    res.input_mode = temporal_mode(wf.input, wf.dt, t.pulse_center_us - t.pulse_fwhm_us,
                                   t.pulse_center_us + t.pulse_fwhm_us);
    res.retrieval_mode = temporal_mode(wf.retrieval, wf.dt, t.control_on_us(), t.retrieval_window_us);

    // Broadband envelopes relative to the input peak, so the pulse maximum
    // carries the full squeezed-state variance.
    const double peak = *std::max_element(wf.input.begin(), wf.input.end());
    const auto input_env = scaled(wf.input, 1.0 / peak);
    const auto front_env = scaled(wf.front, 1.0 / peak);
    const auto retrieval_env = scaled(wf.retrieval, 1.0 / peak);

    ShotSynthesizer::Options base;
    base.lo_offset = cfg.detection.lo_offset_rad;
    base.gain = cfg.detection.detector_gain;
    const DensityMatrix vacuum(max_fock_cutoff);

    std::vector<double> phases;
    if (opts.input_dataset || opts.retrieved_dataset) {
        const auto sideband = sideband_variance_trace(states.source, t, n, cfg.detection.lo_offset_rad,
                                                      cfg.detection.sideband_noise, cfg.seed);
        auto lo = estimate_lo_phase(sideband, t);
        res.lo_theta0 = lo.theta0;
        res.lo_contrast = 2.0 * lo.amplitude;
        phases = std::move(lo.phases);
    }

    auto calibration = [&](const TemporalMode& mode, std::uint64_t stream) {
        auto o = base;
        o.schedule = ControlSchedule::always_off;
        o.stream = stream;
        const ShotSynthesizer synth(vacuum, mode, t, cfg.channel, cfg.seed, o);
        return calibrate_snl(run_stream(synth, n, false, workers).raw);
    };

    if (opts.input_dataset) {
        auto o = base;
        o.schedule = ControlSchedule::always_off;
        o.stream = stream_input;
        o.broadband.push_back({input_env, states.input});
        const ShotSynthesizer synth(states.input, res.input_mode, t, cfg.channel, cfg.seed, o);
        const auto raw = run_stream(synth, n, false, workers).raw;
        res.input_scale = calibration(res.input_mode, stream_calib_input);
        res.input_records = make_records(phases, raw, res.input_scale);
    }

    if (opts.retrieved_dataset || opts.variance_trace) {
        auto o = base;
        o.stream = stream_retrieval;
        o.schedule = opts.variant == Variant::no_retrieval ? ControlSchedule::no_retrieval
                                                           : ControlSchedule::store_and_retrieve;
        o.broadband.push_back({front_env, states.input});
        if (opts.variant != Variant::no_retrieval) o.broadband.push_back({retrieval_env, states.retrieved});
        const ShotSynthesizer synth(states.retrieved, res.retrieval_mode, t, cfg.channel, cfg.seed, o);
        const auto stream = run_stream(synth, n, opts.variance_trace, workers);
        if (opts.variance_trace) res.trace = variance_trace(stream.acc, t);
        if (opts.retrieved_dataset) {
            res.retrieval_scale = calibration(res.retrieval_mode, stream_calib_retrieval);
            res.retrieved_records = make_records(phases, stream.raw, res.retrieval_scale);
        }
    }
    return res;
}

// ---------------------------------------------------------------------------

ReconstructionReport reconstruct_dataset(const std::vector<QuadratureRecord>& records, const RunConfig& cfg,
                                         bool with_bootstrap) {
    const auto opts = cfg.tomography.options();
    ReconstructionReport rep;
    rep.records = records.size();
    rep.binned = opts.use_binning(records.size());
    rep.result = mle_reconstruct(records, opts);
    rep.summary = squeezing_summary(rep.result.rho);
    if (with_bootstrap && cfg.tomography.bootstrap_resamples >= 2) {
        rep.bootstrap = bootstrap_uncertainty(records, opts, cfg.tomography.bootstrap_resamples, cfg.seed,
                                              rep.result.rho);
    }
    try {
        rep.variance_bins = binned_variance(records, cfg.tomography.variance_bins);
    } catch (const InsufficientSamplesError&) {
        rep.variance_bins.clear();
    }
    return rep;
}

std::string to_json(const ReconstructionReport& r) {
    json j;
    j["squeezing_db"] = r.summary.squeezing_db;
    j["antisqueezing_db"] = r.summary.antisqueezing_db;
    j["theta_min_rad"] = r.summary.theta_min;
    j["uncertainty_db"] = r.bootstrap ? json(r.bootstrap->uncertainty_db) : json(nullptr);
    if (r.bootstrap) {
        j["bootstrap"] = {{"resamples", r.bootstrap->resamples},
                          {"squeezing_std_db", r.bootstrap->squeezing_std_db},
                          {"antisqueezing_std_db", r.bootstrap->antisqueezing_std_db}};
    }
    j["iterations"] = r.result.iterations;
    j["converged"] = r.result.converged;
    j["loglik_final"] = r.result.loglik_trace.empty() ? 0.0 : r.result.loglik_trace.back();
    j["records"] = r.records;
    j["binned"] = r.binned;
    j["dim"] = r.result.rho.dim();
    json bins = json::array();
    for (const auto& b : r.variance_bins) {
        bins.push_back({{"mean_phase_rad", b.mean_phase},
                        {"variance_snl", b.variance_snl},
                        {"variance_db", b.variance_db},
                        {"error_db", b.error_db},
                        {"count", b.count}});
    }
    j["variance_bins"] = bins;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

PerformanceMetrics performance_metrics(const DensityMatrix& rho_in, const DensityMatrix& rho_retr, LogBase base) {
    if (rho_in.dim() != rho_retr.dim()) {
        throw DimensionMismatchError("report: input cutoff " + std::to_string(rho_in.dim()) +
                                     " differs from retrieved cutoff " + std::to_string(rho_retr.dim()));
    }
    // Pad so the added-noise benchmark has photon-number headroom.
    const DensityMatrix a = rho_in.resized(max_fock_cutoff);
    DensityMatrix b = rho_retr.resized(max_fock_cutoff);
    const auto ea = min_max_variance(a), eb = min_max_variance(b);

    PerformanceMetrics m;
    if (!ea.degenerate && !eb.degenerate) {
        m.alignment_rad = ea.theta_min - eb.theta_min;
        b = b.rotated(m.alignment_rad);
    }
    m.fidelity = fidelity(a, b);
    try {
        m.classical_fidelity_addnoise = fidelity(a, add_vacuum_units(a, 2.0));
    } catch (const CutoffTooSmallError&) {
        const auto g = GaussianStateOracle::squeezed_thermal(fit_squeezed_thermal(ea.vmin, ea.vmax, ea.theta_min));
        m.classical_fidelity_addnoise = gaussian_fidelity(g, g.with_added_noise(2.0));
        m.addnoise_method = "gaussian-fit";
    }
    m.classical_fidelity_vacuum = fidelity(a, DensityMatrix(max_fock_cutoff));
    m.ep_log_base = base;
    m.ep_in_matrix = entanglement_potential(a, base);
    m.ep_retr_matrix = entanglement_potential(b, base);
    m.in = squeezing_summary(a);
    m.retr = squeezing_summary(b);
    const DensityMatrix fa = squeezed_thermal_fit(a), fb = squeezed_thermal_fit(b);
    m.fidelity_fit = fidelity(fa, fb);
    m.ep_in = entanglement_potential(fa, base);
    m.ep_retr = entanglement_potential(fb, base);
    return m;
}

std::string to_json(const PerformanceMetrics& m) {
    json j;
    j["fidelity"] = m.fidelity;
    j["alignment_rad"] = m.alignment_rad;
    j["classical_fidelity_addnoise"] = m.classical_fidelity_addnoise;
    j["classical_fidelity_addnoise_method"] = m.addnoise_method;
    j["classical_fidelity_vacuum"] = m.classical_fidelity_vacuum;
    j["fidelity_fit"] = m.fidelity_fit;
    j["ep_in"] = m.ep_in;
    j["ep_retr"] = m.ep_retr;
    j["ep_in_matrix"] = m.ep_in_matrix;
    j["ep_retr_matrix"] = m.ep_retr_matrix;
    j["ep_log_base"] = to_string(m.ep_log_base);
    j["input"] = summary_json(m.in);
    j["retrieved"] = summary_json(m.retr);
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

SweepMode parse_sweep_param(const std::string& text) {
    if (text == "detuning") return SweepMode::detuning;
    if (text == "storage_time" || text == "storage-time") return SweepMode::storage_time;
    throw InvalidParameterError("unknown sweep parameter '" + text + "' (detuning, storage_time)");
}

SweepResult run_sweep(const RunConfig& cfg, SweepMode mode, const std::vector<double>& values,
                      const SweepOptions& opts) {
    cfg.validate();
    if (values.size() < 3) {
        throw FitError("sweep needs at least 3 values, got " + std::to_string(values.size()));
    }
    SweepResult out;
    out.mode = mode;
    out.fixed = mode == SweepMode::detuning ? cfg.channel.tau_storage_us : cfg.channel.delta_2photon_mhz;
    out.phase_model = opts.phase_noise.has_value();
    out.phase_noise = opts.phase_noise.value_or(0.0);
    if (out.phase_noise < 0.0) throw InvalidParameterError("phase noise must be nonnegative");

    // Points run one after another; each run is parallel internally.
    for (std::size_t i = 0; i < values.size(); ++i) {
        RunConfig c = cfg;
        if (mode == SweepMode::detuning) {
            c.channel.delta_2photon_mhz = values[i];
        } else {
            c.channel.tau_storage_us = values[i];
            c.timing = cfg.timing.with_storage(values[i]);
        }
        c.seed = stream_key(cfg.seed, stream_sweep, i);
        c.validate();

        SweepRow row;
        row.control = values[i];
        DensityMatrix rho(2);
        double reference = 0.0;
        if (out.phase_model) {
            const auto states = experiment_states(c, Variant::standard);
            rho = states.retrieved;
            reference = cfg.source.phase_rad;
        } else {
            SimulateOptions so;
            so.input_dataset = false;
            so.variance_trace = false;
            so.shots = cfg.sweep_shots;
            so.workers = opts.workers;
            const auto sim = simulate(c, so);
            rho = mle_reconstruct(sim.retrieved_records, c.tomography.options()).rho;
        }
        const auto s = squeezing_summary(rho);
        row.squeezing_db = s.squeezing_db;
        row.antisqueezing_db = s.antisqueezing_db;
        try {
            double phase = extract_phase(rho, sweep_min_contrast) - reference;
            if (out.phase_model) {
                std::mt19937_64 gen(stream_key(cfg.seed, stream_phase_noise, i));
                phase += out.phase_noise * std::normal_distribution<double>()(gen);
            }
            row.phase_mod_pi = wrap_mod_pi(phase);
        } catch (const DegeneratePhaseError&) {
            row.flagged = true;
        }
        out.rows.push_back(row);
    }

    std::vector<PhasePoint> points;
    for (const auto& r : out.rows) {
        if (r.phase_mod_pi) points.push_back({r.control, *r.phase_mod_pi, 0.0});
    }
    out.fit = unwrap_to_line(points, mode, out.fixed, 0.0);
    std::size_t k = 0;
    for (auto& r : out.rows) {
        r.model = 2.0 * std::numbers::pi * out.fixed * r.control;
        if (r.phase_mod_pi) r.unwrapped = out.fit.points[k++].unwrapped;
    }
    return out;
}

// ---------------------------------------------------------------------------

OutputSet::OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_)) throw IoError("cannot create output directory " + dir_.string());
}

void OutputSet::write(const std::string& name, const std::string& content) {
    write_text_file(dir_ / name, content);
    hashes_[name] = git_blob_sha1(content);
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void OutputSet::write_manifest(const std::string& command, const RunConfig& cfg, const std::string& started_utc,
                               const std::map<std::string, double>& extra) {
    json j;
    j["command"] = command;
    j["seed"] = cfg.seed;
    j["config"] = json::parse(to_json(cfg));
    j["versions"] = {{"sqzmem", library_version},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    j["timestamps"] = {{"started", started_utc}, {"finished", utc_timestamp()}};
    for (const auto& [k, v] : extra) j[k] = v;
    j["files"] = hashes_;
    write_text_file(dir_ / "manifest.json", j.dump(2) + "\n");
}

void emit_traces(OutputSet& out, const SimulationResult& sim) {
    const auto& wf = sim.waveforms;
    std::vector<double> t(wf.input.size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = static_cast<double>(k) * wf.dt;
    if (!sim.trace.empty()) out.write("variance_trace.csv", variance_trace_csv(sim.trace));
    out.write("waveforms.csv", columns_csv({"time_us", "input", "stored"}, {t, wf.input, wf.stored}));
    out.write("modes.csv",
              columns_csv({"time_us", "input_mode", "retrieval_mode"}, {t, sim.input_mode.samples, sim.retrieval_mode.samples}));
}

void emit_simulation(OutputSet& out, const SimulationResult& sim) {
    if (!sim.input_records.empty()) out.write("input_quadratures.csv", quadrature_csv(sim.input_records));
    if (!sim.retrieved_records.empty()) out.write("retrieved_quadratures.csv", quadrature_csv(sim.retrieved_records));
    emit_traces(out, sim);
}

void emit_report(OutputSet& out, const DensityMatrix& rho_in, const DensityMatrix& rho_retr,
                 const PerformanceMetrics& metrics) {
    out.write("metrics.json", to_json(metrics));
    std::vector<double> grid;
    for (int k = -40; k <= 40; ++k) grid.push_back(0.1 * k);
    out.write("wigner_in.csv", wigner_csv(grid, grid, wigner(rho_in, grid, grid)));
    out.write("wigner_retr.csv", wigner_csv(grid, grid, wigner(rho_retr, grid, grid)));
    out.write("variance_in.csv", variance_curve_csv(rho_in));
    out.write("variance_retr.csv", variance_curve_csv(rho_retr));
}

void emit_sweep(OutputSet& out, const SweepResult& sweep) {
    std::string csv = "control,phase_mod_pi,unwrapped,model,squeezing_db,antisqueezing_db,flagged\n";
    for (const auto& r : sweep.rows) {
        csv += format_double(r.control) + ",";
        csv += r.phase_mod_pi ? format_double(*r.phase_mod_pi) + "," + format_double(r.unwrapped) : std::string(",");
        csv += "," + format_double(r.model) + "," + format_double(r.squeezing_db) + "," +
               format_double(r.antisqueezing_db) + "," + (r.flagged ? "1" : "0") + "\n";
    }
    out.write("sweep.csv", csv);

    const auto& f = sweep.fit;
    json j;
    j["param"] = sweep.mode == SweepMode::detuning ? "detuning" : "storage_time";
    j["fixed"] = sweep.fixed;
    j["slope"] = f.slope;
    j["intercept"] = f.intercept;
    j["expected_slope"] = f.expected_slope;
    j["slope_rel_error"] = std::abs(f.slope - f.expected_slope) / std::abs(f.expected_slope);
    j["ambiguous"] = f.ambiguous;
    j["phase_model"] = sweep.phase_model;
    j["phase_noise_rad"] = sweep.phase_noise;
    j["points"] = f.points.size();
    j["flagged"] = sweep.rows.size() - f.points.size();
    out.write("sweep_fit.json", j.dump(2) + "\n");
}

}  // namespace sqzmem

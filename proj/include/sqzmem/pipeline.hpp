#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sqzmem/config.hpp"
#include "sqzmem/entanglement.hpp"
#include "sqzmem/timedomain.hpp"
#include "sqzmem/tomography.hpp"

namespace sqzmem {

enum class Variant {
    standard,
    store_vacuum,  ///< squeezed input blocked: the memory stores vacuum
    no_retrieval,  ///< squeezed state stored, control field never switched back on
};

Variant parse_variant(const std::string& text);
std::string to_string(Variant v);

/// Generator states (at the maximum cutoff) of one experiment variant.
struct ExperimentStates {
    DensityMatrix source;     ///< cw squeezed source seen by the spectrum analyzer
    DensityMatrix input;      ///< pulse entering the memory
    DensityMatrix retrieved;  ///< retrieved mode
};
ExperimentStates experiment_states(const RunConfig& cfg, Variant variant);

struct SimulateOptions {
    Variant variant = Variant::standard;
    bool input_dataset = true;
    bool retrieved_dataset = true;
    bool variance_trace = true;
    std::optional<std::int64_t> shots;  ///< overrides timing.shots
    int workers = 0;                    ///< 0: worker_count()
};

struct SimulationResult {
    Variant variant = Variant::standard;
    std::int64_t shots = 0;
    ClassicalWaveforms waveforms;
    TemporalMode input_mode;
    TemporalMode retrieval_mode;
    double input_scale = 0.0;      ///< SNL calibration factors (0 when not computed)
    double retrieval_scale = 0.0;
    double lo_theta0 = 0.0;        ///< fitted ramp angle of the squeezed quadrature
    double lo_contrast = 0.0;      ///< 2b of the sideband fit, SNL
    std::vector<QuadratureRecord> input_records;
    std::vector<QuadratureRecord> retrieved_records;
    std::vector<VarianceTracePoint> trace;
};

/// Full synthetic experiment: sideband LO-phase fit, photocurrent synthesis,
/// vacuum calibration and matched filtering for both temporal modes.
SimulationResult simulate(const RunConfig& cfg, const SimulateOptions& opts = {});

struct ReconstructionReport {
    ReconstructionResult result;
    SqueezingSummary summary;
    std::optional<BootstrapResult> bootstrap;
    std::vector<VarianceBin> variance_bins;
    std::size_t records = 0;
    bool binned = false;
};

ReconstructionReport reconstruct_dataset(const std::vector<QuadratureRecord>& records, const RunConfig& cfg,
                                         bool with_bootstrap);
std::string to_json(const ReconstructionReport& report);

struct PerformanceMetrics {
    double fidelity = 0.0;  ///< input vs retrieved, squeezing axes aligned
    double alignment_rad = 0.0;
    double classical_fidelity_addnoise = 0.0;
    /// "fock", or "gaussian-fit" when the noisy copy overflows the cutoff.
    std::string addnoise_method = "fock";
    double classical_fidelity_vacuum = 0.0;
    double fidelity_fit = 0.0;  ///< between the squeezed-thermal fits
    /// Entanglement potentials of the squeezed-thermal fits; the raw-matrix
    /// values below are biased upward by reconstruction noise.
    double ep_in = 0.0;
    double ep_retr = 0.0;
    double ep_in_matrix = 0.0;
    double ep_retr_matrix = 0.0;
    LogBase ep_log_base = LogBase::two;
    SqueezingSummary in;
    SqueezingSummary retr;
};

/// Throws DimensionMismatchError when the cutoffs differ.
PerformanceMetrics performance_metrics(const DensityMatrix& rho_in, const DensityMatrix& rho_retr, LogBase base);
std::string to_json(const PerformanceMetrics& m);

struct SweepRow {
    double control = 0.0;
    std::optional<double> phase_mod_pi;  ///< empty when the phase was degenerate
    double unwrapped = 0.0;
    double model = 0.0;
    double squeezing_db = 0.0;
    double antisqueezing_db = 0.0;
    bool flagged = false;
};

struct SweepResult {
    SweepMode mode = SweepMode::detuning;
    double fixed = 0.0;
    bool phase_model = false;
    double phase_noise = 0.0;
    std::vector<SweepRow> rows;
    UnwrapResult fit;
};

struct SweepOptions {
    /// Set: skip the simulation and perturb the model phase of each point by
    /// Gaussian noise of this size (rad).
    std::optional<double> phase_noise;
    int workers = 0;
};

/// Per-value end-to-end runs (timing.sweep_shots each), phase extraction and
/// unwrap fit. Throws FitError for fewer than 3 usable points.
SweepResult run_sweep(const RunConfig& cfg, SweepMode mode, const std::vector<double>& values,
                      const SweepOptions& opts = {});
SweepMode parse_sweep_param(const std::string& text);

/// Writes files into a directory and records their content hashes.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir);

    void write(const std::string& name, const std::string& content);
    const std::map<std::string, std::string>& hashes() const { return hashes_; }
    const std::filesystem::path& dir() const { return dir_; }

    /// Writes manifest.json (not itself hashed).
    void write_manifest(const std::string& command, const RunConfig& cfg, const std::string& started_utc,
                        const std::map<std::string, double>& extra = {});

private:
    std::filesystem::path dir_;
    std::map<std::string, std::string> hashes_;
};

std::string utc_timestamp();

/// File emitters shared by the commands.
void emit_simulation(OutputSet& out, const SimulationResult& sim);
void emit_traces(OutputSet& out, const SimulationResult& sim);
void emit_report(OutputSet& out, const DensityMatrix& rho_in, const DensityMatrix& rho_retr,
                 const PerformanceMetrics& metrics);
void emit_sweep(OutputSet& out, const SweepResult& sweep);

}  // namespace sqzmem

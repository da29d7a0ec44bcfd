#pragma once

#include <cstdint>
#include <string>

#include "sqzmem/channel.hpp"
#include "sqzmem/timedomain.hpp"
#include "sqzmem/tomography.hpp"

namespace sqzmem {

struct SourceConfig {
    double squeezing_db = 1.86;
    double antisqueezing_db = 5.38;
    double phase_rad = 0.0;
};

/// Detection chain knobs not covered by the timing section.
struct DetectionConfig {
    double lo_offset_rad = 0.37;  ///< unknown LO offset the sideband fit must recover
    double sideband_noise = 0.01; ///< relative noise on the spectrum-analyzer trace
    double detector_gain = 1.0;   ///< raw photocurrent scale, removed by SNL calibration
};

struct TomographyConfig {
    int dim = default_fock_cutoff;
    int max_iters = 2000;
    double loglik_rel_tol = 1e-8;
    std::string binning = "auto";  ///< auto | on | off
    XBinning x_binning;
    int bootstrap_resamples = 20;
    int variance_bins = 5;

    ReconstructionOptions options() const;
};

struct RunConfig {
    SourceConfig source;
    MemoryChannelParams channel;
    TimingConfig timing;
    std::int64_t sweep_shots = 20000;
    DetectionConfig detection;
    TomographyConfig tomography;
    std::uint64_t seed = 1;
    std::string output_dir = "out";

    /// Throws ConfigError (or the section's own validation error).
    void validate() const;
};

/// Strict parse: unknown keys raise ConfigError, missing keys keep defaults.
RunConfig run_config_from_json(const std::string& text);
std::string to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::string& path);

}  // namespace sqzmem

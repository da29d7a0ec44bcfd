#include "sqzmem/config.hpp"

#include <json.hpp>

#include <cmath>
#include <functional>
#include <map>

#include "sqzmem/dataset_io.hpp"
#include "sqzmem/errors.hpp"

namespace sqzmem {

using nlohmann::json;

namespace {

// Section reader that rejects unknown keys and type mismatches.
class Section {
public:
    Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) throw ConfigError("'" + name_ + "' must be an object");
    }

    template <typename T>
    Section& field(const char* key, T& out) {
        seen_.emplace(key, true);
        auto it = j_.find(key);
        if (it == j_.end()) return *this;
        try {
            out = it->template get<T>();
        } catch (const json::exception&) {
            throw ConfigError("bad type for '" + name_ + "." + key + "'");
        }
        if constexpr (std::is_floating_point_v<T>) {
            if (!std::isfinite(out)) throw ConfigError("non-finite '" + name_ + "." + key + "'");
        }
        return *this;
    }

    Section& custom(const char* key, const std::function<void(const json&)>& fn) {
        seen_.emplace(key, true);
        auto it = j_.find(key);
        if (it != j_.end()) fn(*it);
        return *this;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError("unknown key '" + name_ + "." + it.key() + "'");
        }
    }

private:
    const json& j_;
    std::string name_;
    std::map<std::string, bool> seen_;
};

}  // namespace

ReconstructionOptions TomographyConfig::options() const {
    ReconstructionOptions o;
    o.dim = dim;
    o.max_iters = max_iters;
    o.loglik_rel_tol = loglik_rel_tol;
    o.binning = x_binning;
    if (binning == "on") o.binned = true;
    else if (binning == "off") o.binned = false;
    return o;
}

void RunConfig::validate() const {
    if (!(source.squeezing_db >= 0.0) || !(source.antisqueezing_db >= source.squeezing_db)) {
        throw ConfigError("source: need 0 <= squeezing_db <= antisqueezing_db");
    }
    channel.validate();
    timing.validate();
    if (std::abs(timing.storage_duration_us - channel.tau_storage_us) > 1e-12) {
        throw ConfigError("timing.storage_duration_us must equal channel.tau_storage_us");
    }
    if (sweep_shots < 1000) throw ConfigError("sweep_shots must be >= 1000");
    if (!(detection.detector_gain > 0.0)) throw ConfigError("detection.detector_gain must be positive");
    if (!(detection.sideband_noise >= 0.0)) throw ConfigError("detection.sideband_noise must be nonnegative");
    if (tomography.binning != "auto" && tomography.binning != "on" && tomography.binning != "off") {
        throw ConfigError("tomography.binning must be auto, on or off");
    }
    if (tomography.bootstrap_resamples < 0) throw ConfigError("tomography.bootstrap_resamples must be >= 0");
    if (tomography.variance_bins < 1) throw ConfigError("tomography.variance_bins must be >= 1");
    try {
        tomography.options().validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("tomography: ") + e.what());
    }
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

RunConfig run_config_from_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    RunConfig c;
    Section top(root, "config");
    top.custom("source", [&](const json& j) {
           Section(j, "source")
               .field("squeezing_db", c.source.squeezing_db)
               .field("antisqueezing_db", c.source.antisqueezing_db)
               .field("phase_rad", c.source.phase_rad)
               .finish();
       })
        .custom("channel", [&](const json& j) {
            Section(j, "channel")
                .field("eta_ref", c.channel.eta_ref)
                .field("tau_mem_us", c.channel.tau_mem_us)
                .field("raman_db", c.channel.raman_db)
                .field("delta_2photon_mhz", c.channel.delta_2photon_mhz)
                .field("tau_storage_us", c.channel.tau_storage_us)
                .finish();
        })
        .custom("timing", [&](const json& j) {
            auto& t = c.timing;
            Section(j, "timing")
                .field("pulse_fwhm_us", t.pulse_fwhm_us)
                .field("pulse_center_us", t.pulse_center_us)
                .field("control_off_us", t.control_off_us)
                .field("storage_duration_us", t.storage_duration_us)
                .field("retrieval_window_us", t.retrieval_window_us)
                .custom("calib_window_us",
                        [&](const json& w) {
                            if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
                                throw ConfigError("timing.calib_window_us must be [start, end]");
                            }
                            t.calib_start_us = w[0].get<double>();
                            t.calib_end_us = w[1].get<double>();
                        })
                .field("acq_window_us", t.acq_window_us)
                .field("sample_rate_per_us", t.sample_rate_per_us)
                .field("rep_period_ms", t.rep_period_ms)
                .field("lo_ramp_period_s", t.lo_ramp_period_s)
                .field("shots", t.shots)
                .field("sweep_shots", c.sweep_shots)
                .finish();
        })
        .custom("detection", [&](const json& j) {
            Section(j, "detection")
                .field("lo_offset_rad", c.detection.lo_offset_rad)
                .field("sideband_noise", c.detection.sideband_noise)
                .field("detector_gain", c.detection.detector_gain)
                .finish();
        })
        .custom("tomography", [&](const json& j) {
            auto& t = c.tomography;
            Section(j, "tomography")
                .field("dim", t.dim)
                .field("max_iters", t.max_iters)
                .field("loglik_rel_tol", t.loglik_rel_tol)
                .field("binning", t.binning)
                .field("x_bins", t.x_binning.bins)
                .field("x_range_abs", t.x_binning.range_abs)
                .field("phase_bins", t.x_binning.phase_bins)
                .field("bootstrap_resamples", t.bootstrap_resamples)
                .field("variance_bins", t.variance_bins)
                .finish();
        })
        .field("seed", c.seed)
        .field("output_dir", c.output_dir)
        .finish();
    c.validate();
    return c;
}

std::string to_json(const RunConfig& c) {
    const auto& t = c.timing;
    json j;
    j["source"] = {{"squeezing_db", c.source.squeezing_db},
                   {"antisqueezing_db", c.source.antisqueezing_db},
                   {"phase_rad", c.source.phase_rad}};
    j["channel"] = {{"eta_ref", c.channel.eta_ref},
                    {"tau_mem_us", c.channel.tau_mem_us},
                    {"raman_db", c.channel.raman_db},
                    {"delta_2photon_mhz", c.channel.delta_2photon_mhz},
                    {"tau_storage_us", c.channel.tau_storage_us}};
    j["timing"] = {{"pulse_fwhm_us", t.pulse_fwhm_us},
                   {"pulse_center_us", t.pulse_center_us},
                   {"control_off_us", t.control_off_us},
                   {"storage_duration_us", t.storage_duration_us},
                   {"retrieval_window_us", t.retrieval_window_us},
                   {"calib_window_us", {t.calib_start_us, t.calib_end_us}},
                   {"acq_window_us", t.acq_window_us},
                   {"sample_rate_per_us", t.sample_rate_per_us},
                   {"rep_period_ms", t.rep_period_ms},
                   {"lo_ramp_period_s", t.lo_ramp_period_s},
                   {"shots", t.shots},
                   {"sweep_shots", c.sweep_shots}};
    j["detection"] = {{"lo_offset_rad", c.detection.lo_offset_rad},
                      {"sideband_noise", c.detection.sideband_noise},
                      {"detector_gain", c.detection.detector_gain}};
    j["tomography"] = {{"dim", c.tomography.dim},
                       {"max_iters", c.tomography.max_iters},
                       {"loglik_rel_tol", c.tomography.loglik_rel_tol},
                       {"binning", c.tomography.binning},
                       {"x_bins", c.tomography.x_binning.bins},
                       {"x_range_abs", c.tomography.x_binning.range_abs},
                       {"phase_bins", c.tomography.x_binning.phase_bins},
                       {"bootstrap_resamples", c.tomography.bootstrap_resamples},
                       {"variance_bins", c.tomography.variance_bins}};
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    return j.dump(2) + "\n";
}

RunConfig load_run_config(const std::string& path) { return run_config_from_json(read_text_file(path)); }

}  // namespace sqzmem

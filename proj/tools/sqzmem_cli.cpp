// sqzmem: batch driver for simulation, reconstruction, reporting and sweeps.
//
// Exit codes: 0 success, 1 unexpected failure, 2 validation (config, flags,
// parameters), 3 IO or malformed input, 4 MLE did not converge, 5 degenerate
// phase (phase-symmetric state or LO contrast too low).

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include "sqzmem/config.hpp"
#include "sqzmem/dataset_io.hpp"
#include "sqzmem/errors.hpp"
#include "sqzmem/pipeline.hpp"

using namespace sqzmem;

namespace {

enum ExitCode { exit_ok = 0, exit_other = 1, exit_validation = 2, exit_io = 3, exit_convergence = 4, exit_degenerate = 5 };

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::io_error:
        case ErrorCode::malformed_csv: return exit_io;
        case ErrorCode::degenerate_phase:
        case ErrorCode::low_contrast: return exit_degenerate;
        default: return exit_validation;
    }
}

struct Common {
    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> dim;
    std::optional<std::int64_t> shots;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "Run configuration JSON (defaults when omitted)");
    cmd->add_option("--out", c.out, "Output directory (overrides output_dir)");
    cmd->add_option("--seed", c.seed, "64-bit RNG seed (overrides config)");
}

RunConfig load(const Common& c) {
    RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_run_config(c.config_path);
    if (!c.out.empty()) cfg.output_dir = c.out;
    if (c.seed) cfg.seed = *c.seed;
    if (c.dim) cfg.tomography.dim = *c.dim;
    cfg.validate();
    return cfg;
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InvalidParameterError("--values: cannot parse '" + item + "'");
        }
    }
    return out;
}

std::string stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Squeezed-light quantum memory simulation and tomography"};
    app.require_subcommand(1);

    Common common;
    std::string variant = "standard";
    std::string data_csv, rho_in_path, rho_retr_path, log_base = "2", param;
    std::string values;
    std::optional<double> phase_noise;
    std::optional<int> resamples;

    auto* sim = app.add_subcommand("simulate", "Synthesize input and retrieved quadrature datasets");
    add_common(sim, common);
    sim->add_option("--variant", variant, "standard | store-vacuum | no-retrieval");
    sim->add_option("--shots", common.shots, "Shot count (overrides timing.shots)");

    auto* rec = app.add_subcommand("reconstruct", "Maximum-likelihood reconstruction of a quadrature CSV");
    add_common(rec, common);
    rec->add_option("data", data_csv, "Quadrature CSV (phase_rad,quadrature_snl)")->required();
    rec->add_option("--dim", common.dim, "Fock cutoff");
    rec->add_option("--resamples", resamples, "Bootstrap resamples (0 disables)");

    auto* rep = app.add_subcommand("report", "Fidelity, benchmarks, entanglement potential and plot grids");
    add_common(rep, common);
    rep->add_option("rho_in", rho_in_path, "Input-state density matrix JSON")->required();
    rep->add_option("rho_retr", rho_retr_path, "Retrieved-state density matrix JSON")->required();
    rep->add_option("--log-base", log_base, "Entanglement potential log base: 2 | e");

    auto* sweep = app.add_subcommand("sweep", "Storage-phase sweep over detuning or storage time");
    add_common(sweep, common);
    sweep->add_option("--param", param, "detuning | storage_time")->required();
    sweep->add_option("--values", values, "Comma-separated control values (MHz or us)")->required();
    sweep->add_option("--shots", common.shots, "Shots per point (overrides timing.sweep_shots)");
    sweep->add_option("--dim", common.dim, "Fock cutoff");
    sweep->add_option("--phase-noise", phase_noise,
                      "Use the storage-phase model with this Gaussian phase noise (rad) instead of simulating");

    auto* traces = app.add_subcommand("traces", "Variance trace, classical waveforms and temporal modes");
    add_common(traces, common);
    traces->add_option("--variant", variant, "standard | store-vacuum | no-retrieval");
    traces->add_option("--shots", common.shots, "Shot count (overrides timing.shots)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_validation;
    }

    try {
        const std::string started = utc_timestamp();
        RunConfig cfg = load(common);
        OutputSet out(cfg.output_dir);

        if (*sim || *traces) {
            SimulateOptions so;
            so.variant = parse_variant(variant);
            so.shots = common.shots;
            if (*traces) so.input_dataset = so.retrieved_dataset = false;
            const auto result = simulate(cfg, so);
            emit_simulation(out, result);
            std::map<std::string, double> extra{{"lo_contrast_snl", result.lo_contrast},
                                                {"shots", static_cast<double>(result.shots)}};
            if (*sim) {
                extra["calibration_scale_input"] = result.input_scale;
                extra["calibration_scale_retrieval"] = result.retrieval_scale;
            }
            out.write_manifest(sim->parsed() ? "simulate " + variant : "traces " + variant, cfg, started, extra);
            std::printf("wrote %zu files to %s\n", out.hashes().size(), cfg.output_dir.c_str());
            return exit_ok;
        }

        if (*rec) {
            if (resamples) cfg.tomography.bootstrap_resamples = *resamples;
            const auto records = load_quadrature_csv(data_csv);
            const auto report = reconstruct_dataset(records, cfg, cfg.tomography.bootstrap_resamples >= 2);
            const std::string base = stem(data_csv);
            out.write(base + "_rho.json", to_json(report.result.rho));
            out.write(base + "_report.json", to_json(report));
            out.write_manifest("reconstruct " + data_csv, cfg, started);
            std::printf("squeezing %.3f dB, antisqueezing %.3f dB, %d iterations%s\n", report.summary.squeezing_db,
                        report.summary.antisqueezing_db, report.result.iterations,
                        report.result.converged ? "" : " (not converged)");
            return report.result.converged ? exit_ok : exit_convergence;
        }

        if (*rep) {
            const auto rho_in = load_density_matrix(rho_in_path);
            const auto rho_retr = load_density_matrix(rho_retr_path);
            const auto metrics = performance_metrics(rho_in, rho_retr, parse_log_base(log_base));
            emit_report(out, rho_in, rho_retr, metrics);
            out.write_manifest("report", cfg, started);
            std::printf("fidelity %.4f, classical %.4f / %.4f, EP %.4f -> %.4f (log base %s)\n", metrics.fidelity,
                        metrics.classical_fidelity_addnoise, metrics.classical_fidelity_vacuum, metrics.ep_in,
                        metrics.ep_retr, log_base.c_str());
            return exit_ok;
        }

        if (*sweep) {
            if (common.shots) cfg.sweep_shots = *common.shots;
            SweepOptions so;
            so.phase_noise = phase_noise;
            const auto result = run_sweep(cfg, parse_sweep_param(param), parse_values(values), so);
            emit_sweep(out, result);
            out.write_manifest("sweep " + param, cfg, started);
            std::printf("slope %.5f (expected %.5f)%s\n", result.fit.slope, result.fit.expected_slope,
                        result.fit.ambiguous ? " [ambiguous unwrap]" : "");
            return exit_ok;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_other;
    }
    return exit_other;
}

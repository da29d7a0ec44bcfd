#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sqzmem/density_matrix.hpp"
#include "sqzmem/timedomain.hpp"

namespace sqzmem {

struct XBinning {
    int bins = 500;
    double range_abs = 6.0;  ///< bins cover [-range, range] in absolute units
    int phase_bins = 100;    ///< over [0, pi)
};

struct ReconstructionOptions {
    int dim = default_fock_cutoff;
    int max_iters = 2000;
    double loglik_rel_tol = 1e-8;
    /// Binning mode: unset means binned above 10^4 records, unbinned otherwise.
    std::optional<bool> binned;
    XBinning binning;
    /// Optional starting point (default: maximally mixed).
    std::optional<DensityMatrix> initial;

    void validate() const;
    bool use_binning(std::size_t records) const { return binned.value_or(records > 10000); }
};

struct ReconstructionResult {
    DensityMatrix rho;
    std::vector<double> loglik_trace;
    int iterations = 0;
    bool converged = false;
};

/// Projector |x_theta><x_theta| in the Fock basis: Pi_mn = psi_m psi_n e^{i (m - n) theta}.
MatrixC povm_element(double theta, double x_abs, int dim);

/// Iterative R rho R likelihood maximization on (phase, SNL value) records.
/// Throws InsufficientSamplesError (< 1000 records) and InsufficientCoverageError
/// (< 10 occupied phase bins or zero spread in the values).
ReconstructionResult mle_reconstruct(std::span<const QuadratureRecord> records, const ReconstructionOptions& opts);

/// Log-likelihood sum_j log Tr(rho Pi_j) of the records (unbinned, exact).
double log_likelihood(const DensityMatrix& rho, std::span<const QuadratureRecord> records);

struct VarianceBin {
    double mean_phase;
    double variance_snl;
    double variance_db;
    double error_db;
    std::size_t count;
};

/// Equal-count phase bins, per-bin sample variance, error (10 / ln 10) sqrt(2 / N) dB.
std::vector<VarianceBin> binned_variance(std::span<const QuadratureRecord> records, int n_bins = 5);

/// Squeezing (dB below SNL, positive when squeezed) and antisqueezing (dB).
struct SqueezingSummary {
    double squeezing_db;
    double antisqueezing_db;
    double theta_min;
};
SqueezingSummary squeezing_summary(const DensityMatrix& rho);

struct BootstrapResult {
    double squeezing_std_db;
    double antisqueezing_std_db;
    double uncertainty_db;  ///< max of the two
    int resamples;
};

/// Standard deviation over reconstructions of `resamples` with-replacement
/// resamples, each warm-started from `reference` when given.
BootstrapResult bootstrap_uncertainty(std::span<const QuadratureRecord> records, const ReconstructionOptions& opts,
                                      int resamples = 20, std::uint64_t seed = 1,
                                      const std::optional<DensityMatrix>& reference = std::nullopt);

/// theta_min of the state mod pi. Throws DegeneratePhaseError when the
/// variance contrast vmax - vmin is below `min_contrast_snl`.
double extract_phase(const DensityMatrix& rho, double min_contrast_snl = 1e-9);

enum class SweepMode { detuning, storage_time };

struct PhasePoint {
    double control = 0.0;        ///< MHz (detuning sweep) or us (time sweep)
    double phase_mod_pi = 0.0;
    double unwrapped = 0.0;
};

struct UnwrapResult {
    std::vector<PhasePoint> points;
    std::vector<double> model;      ///< predicted phase at each control value
    std::vector<double> residuals;  ///< unwrapped - fitted line
    double slope = 0.0;
    double intercept = 0.0;
    double expected_slope = 0.0;
    bool ambiguous = false;
};

/// Assigns multiples of pi against the storage-phase model
///     phi = intercept0 + 2 pi Delta tau,
/// sweeping Delta at fixed tau (`fixed` = tau, us) or tau at fixed Delta
/// (`fixed` = Delta, MHz), then fits a line. Throws FitError for fewer than
/// 3 points or non-monotone control values.
UnwrapResult unwrap_to_line(std::span<const PhasePoint> points, SweepMode mode, double fixed,
                            double intercept0 = 0.0);

}  // namespace sqzmem

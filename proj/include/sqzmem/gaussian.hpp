#pragma once

#include <Eigen/Dense>

#include "sqzmem/entanglement.hpp"
#include "sqzmem/states.hpp"

namespace sqzmem {

/**
 * Single-mode Gaussian state as (mean, covariance) of (x, p) in absolute
 * units, vacuum covariance diag(1/2, 1/2).
 *
 * Closed-form counterpart of the Fock-basis routines; used as an independent
 * check on every Gaussian state and channel.
 */
struct GaussianStateOracle {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d cov = 0.5 * Eigen::Matrix2d::Identity();

    static GaussianStateOracle vacuum();
    static GaussianStateOracle squeezed_thermal(const SqueezedThermalParams& params);
    static GaussianStateOracle coherent(cplx alpha);

    /// Throws UnphysicalStateError if cov is not positive definite or det(cov) < 1/4.
    void validate() const;

    double variance_snl(double theta) const;
    double mean_abs(double theta) const;
    double min_variance_snl() const;
    double max_variance_snl() const;
    /// Angle of the squeezed quadrature in [0, pi).
    double theta_min() const;

    double pdf(double theta, double x) const;
    double wigner(double x, double p) const;

    GaussianStateOracle rotated(double phi) const;
    GaussianStateOracle with_added_noise(double units_snl) const;
    /// Beamsplitter loss against a phase-symmetric environment of variance env_snl.
    GaussianStateOracle after_loss(double eta, double env_snl) const;

    /// Logarithmic negativity after a balanced split with vacuum.
    double split_log_negativity(LogBase base) const;
};

/// Closed-form fidelity between single-mode Gaussian states.
double gaussian_fidelity(const GaussianStateOracle& a, const GaussianStateOracle& b);

}  // namespace sqzmem

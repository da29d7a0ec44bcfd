#pragma once

#include "sqzmem/density_matrix.hpp"

namespace sqzmem {

/// Squeezed thermal state parameters. `phase` is the LO angle of the squeezed quadrature.
struct SqueezedThermalParams {
    double r = 0.0;
    double nbar = 0.0;
    double phase = 0.0;

    /// Squeezed / antisqueezed variances in SNL units.
    double vmin_snl() const;
    double vmax_snl() const;
};

/// R(phase) S(r) rho_th(nbar) S(r)^dagger R(phase)^dagger, built at 2*dim and truncated.
/// Throws CutoffTooSmallError when the populations at n >= dim-2 exceed 1e-4.
DensityMatrix make_squeezed_thermal(const SqueezedThermalParams& params, int dim = default_fock_cutoff);

/// Inverts vmin = (2 nbar + 1) e^{-2r}, vmax = (2 nbar + 1) e^{2r}.
SqueezedThermalParams fit_squeezed_thermal(double vmin_snl, double vmax_snl, double phase);

/// Same, from squeezing (dB below SNL) and antisqueezing (dB above SNL).
SqueezedThermalParams fit_squeezed_thermal_db(double squeezing_db, double antisqueezing_db, double phase);

DensityMatrix thermal_state(double nbar, int dim);

/// Coherent state |alpha><alpha|, renormalized after truncation.
DensityMatrix coherent_state(cplx alpha, int dim);

/// Fock-basis matrix of D(alpha) = exp(alpha a^dagger - alpha^* a), truncated to dim.
MatrixC displacement_matrix(cplx alpha, int dim);

/// Classical additive Gaussian noise: every quadrature variance grows by
/// `units` SNL. Gaussian-weighted average of displaced copies.
DensityMatrix add_vacuum_units(const DensityMatrix& rho, double units);

/// Uhlmann fidelity (Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2.
double fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2);

/// Hermitian square root of a PSD matrix via eigendecomposition; negative
/// eigenvalues from round-off are clipped.
MatrixC psd_sqrt(const MatrixC& m);

double snl_to_db(double variance_snl);
double db_to_snl(double db);

}  // namespace sqzmem

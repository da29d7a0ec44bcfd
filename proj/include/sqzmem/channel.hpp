#pragma once

#include "sqzmem/density_matrix.hpp"
#include "sqzmem/gaussian.hpp"

namespace sqzmem {

/// Phenomenological EIT memory: efficiency, lifetime, Raman floor and
/// two-photon detuning. Times in microseconds, detuning in MHz.
struct MemoryChannelParams {
    double eta_ref = 0.15;
    double tau_mem_us = 1.3;
    double raman_db = 0.1;
    double delta_2photon_mhz = 0.54;
    double tau_storage_us = 1.0;

    /// Storage time at which eta_ref was measured.
    static constexpr double tau_ref_us = 1.0;

    void validate() const;

    /// eta_ref * exp(-(tau - tau_ref) / tau_mem), capped at 1.
    double efficiency(double tau_storage_us) const;
    double efficiency() const { return efficiency(tau_storage_us); }

    /// Environment (Raman) variance in SNL units, 10^{raman_db/10}.
    double env_variance_snl() const;
};

struct PhaseShift {
    double raw;     ///< 2 pi Delta tau, radians
    double mod_pi;  ///< raw reduced to [0, pi)
};

PhaseShift phase_shift(const MemoryChannelParams& params);

double wrap_mod_pi(double angle);

/// Transmissivity-eta beamsplitter against a phase-symmetric thermal
/// environment of variance env_vnoise_snl (>= 1), environment traced out.
DensityMatrix loss_channel(const DensityMatrix& rho, double eta, double env_vnoise_snl);

/// Phase rotation by the storage phase, then loss with the Raman environment.
DensityMatrix memory_channel(const DensityMatrix& rho, const MemoryChannelParams& params);

/// Same composition on the Gaussian oracle.
GaussianStateOracle memory_channel(const GaussianStateOracle& state, const MemoryChannelParams& params);

}  // namespace sqzmem

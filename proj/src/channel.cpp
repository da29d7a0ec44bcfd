#include "sqzmem/channel.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "sqzmem/entanglement.hpp"
#include "sqzmem/errors.hpp"
#include "sqzmem/states.hpp"

namespace sqzmem {

void MemoryChannelParams::validate() const {
    if (!(eta_ref >= 0.0 && eta_ref <= 1.0)) throw InvalidParameterError("eta_ref must lie in [0, 1]");
    if (!(tau_mem_us > 0.0)) throw InvalidParameterError("tau_mem_us must be positive");
    if (!(raman_db >= 0.0)) throw InvalidParameterError("raman_db must be nonnegative");
    if (!(tau_storage_us >= 0.0)) throw InvalidParameterError("tau_storage_us must be nonnegative");
    if (!std::isfinite(delta_2photon_mhz)) throw InvalidParameterError("delta_2photon_mhz must be finite");
}

double MemoryChannelParams::efficiency(double tau_storage) const {
    return std::min(1.0, eta_ref * std::exp(-(tau_storage - tau_ref_us) / tau_mem_us));
}

double MemoryChannelParams::env_variance_snl() const { return db_to_snl(raman_db); }

double wrap_mod_pi(double angle) {
    double w = std::fmod(angle, std::numbers::pi);
    if (w < 0.0) w += std::numbers::pi;
    if (w >= std::numbers::pi) w -= std::numbers::pi;
    return w;
}

PhaseShift phase_shift(const MemoryChannelParams& params) {
    const double raw = 2.0 * std::numbers::pi * params.delta_2photon_mhz * params.tau_storage_us;
    return {raw, wrap_mod_pi(raw)};
}

DensityMatrix loss_channel(const DensityMatrix& rho, double eta, double env_vnoise_snl) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidParameterError("eta must lie in [0, 1]");
    if (!(env_vnoise_snl >= 1.0 - 1e-12)) throw InvalidParameterError("environment variance below the vacuum level");
    if (eta == 1.0) return rho;

    const int dim = rho.dim();
    const double env_nbar = std::max(0.0, 0.5 * (env_vnoise_snl - 1.0));

    // Environment populations, cut where they stop mattering.
    std::vector<double> env_pops;
    {
        const double q = env_nbar / (1.0 + env_nbar);
        double pk = 1.0 / (1.0 + env_nbar);
        double remaining = 1.0;
        while (env_pops.size() < 64) {
            env_pops.push_back(pk);
            remaining -= pk;
            if (remaining < 1e-15 || q == 0.0) break;
            pk *= q;
        }
    }
    const int env_dim = static_cast<int>(env_pops.size());
    const int work = dim + env_dim - 1;

    std::vector<MatrixR> sectors;
    sectors.reserve(work);
    for (int n = 0; n < work; ++n) sectors.push_back(beamsplitter_sector(n, eta));

    MatrixC out = MatrixC::Zero(work, work);
    for (int k = 0; k < env_dim; ++k) {
        const double pk = env_pops[k];
        for (int m = 0; m < dim; ++m) {
            const MatrixR& um = sectors[m + k];
            for (int n = 0; n < dim; ++n) {
                const cplx rmn = rho(m, n);
                if (rmn == cplx(0.0)) continue;
                const MatrixR& un = sectors[n + k];
                // Environment photon number after the split must agree: m - j = n - j'.
                const int shift = n - m;
                const int j_lo = std::max(0, -shift);
                const int j_hi = std::min(m + k, n + k - shift);
                for (int j = j_lo; j <= j_hi; ++j) {
                    out(j, j + shift) += pk * rmn * um(j, m) * un(j + shift, n);
                }
            }
        }
    }

    double tail = 0.0;
    for (int n = std::max(0, dim - 2); n < work; ++n) tail += out(n, n).real();
    if (tail >= StateTolerance::truncation_tail) {
        throw CutoffTooSmallError("loss_channel output population " + std::to_string(tail) + " near cutoff " +
                                  std::to_string(dim));
    }
    return DensityMatrix::normalized(out.topLeftCorner(dim, dim));
}

DensityMatrix memory_channel(const DensityMatrix& rho, const MemoryChannelParams& params) {
    params.validate();
    const DensityMatrix shifted = rho.rotated(phase_shift(params).raw);
    return loss_channel(shifted, params.efficiency(), params.env_variance_snl());
}

GaussianStateOracle memory_channel(const GaussianStateOracle& state, const MemoryChannelParams& params) {
    params.validate();
    return state.rotated(phase_shift(params).raw).after_loss(params.efficiency(), params.env_variance_snl());
}

}  // namespace sqzmem

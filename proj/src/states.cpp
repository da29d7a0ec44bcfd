#include "sqzmem/states.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "sqzmem/errors.hpp"
#include "sqzmem/oscillator.hpp"

namespace sqzmem {

double SqueezedThermalParams::vmin_snl() const { return (2.0 * nbar + 1.0) * std::exp(-2.0 * r); }
double SqueezedThermalParams::vmax_snl() const { return (2.0 * nbar + 1.0) * std::exp(2.0 * r); }

double snl_to_db(double variance_snl) { return 10.0 * std::log10(variance_snl); }
double db_to_snl(double db) { return std::pow(10.0, db / 10.0); }

namespace {

VectorR thermal_populations(double nbar, int dim) {
    VectorR p(dim);
    const double q = nbar / (1.0 + nbar);
    double pn = 1.0 / (1.0 + nbar);
    for (int n = 0; n < dim; ++n) {
        p(n) = pn;
        pn *= q;
    }
    return p;
}

void check_tail(const MatrixC& working, int dim, const char* who) {
    double tail = 0.0;
    for (int n = std::max(0, dim - 2); n < working.rows(); ++n) tail += working(n, n).real();
    tail /= working.trace().real();
    if (tail >= StateTolerance::truncation_tail) {
        throw CutoffTooSmallError(std::string(who) + ": population " + std::to_string(tail) +
                                  " at n >= " + std::to_string(dim - 2) + " for cutoff " + std::to_string(dim));
    }
}

/// Gauss-Hermite rule for weight exp(-t^2) via the Golub-Welsch eigenproblem.
void gauss_hermite(int order, std::vector<double>& nodes, std::vector<double>& weights) {
    MatrixR jacobi = MatrixR::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        jacobi(k - 1, k) = jacobi(k, k - 1) = std::sqrt(0.5 * k);
    }
    Eigen::SelfAdjointEigenSolver<MatrixR> es(jacobi);
    nodes.resize(order);
    weights.resize(order);
    for (int k = 0; k < order; ++k) {
        nodes[k] = es.eigenvalues()(k);
        const double v0 = es.eigenvectors()(0, k);
        weights[k] = std::sqrt(std::numbers::pi) * v0 * v0;
    }
}

}  // namespace

DensityMatrix thermal_state(double nbar, int dim) {
    if (nbar < 0.0) throw InvalidParameterError("nbar must be nonnegative");
    const VectorR p = thermal_populations(nbar, dim);
    return DensityMatrix::normalized(p.cast<cplx>().asDiagonal().toDenseMatrix());
}

DensityMatrix make_squeezed_thermal(const SqueezedThermalParams& params, int dim) {
    if (!(params.r >= 0.0)) throw InvalidParameterError("squeezing parameter r must be >= 0");
    if (!(params.nbar >= 0.0)) throw InvalidParameterError("nbar must be >= 0");
    if (dim < 2 || dim > max_fock_cutoff) throw InvalidParameterError("cutoff must lie in [2, 25]");

    const int work = 2 * dim;
    const MatrixR a = annihilation(work);
    const MatrixR a2 = a * a;
    const MatrixR generator = 0.5 * params.r * (a2 - a2.transpose());
    const MatrixR squeeze = generator.exp();
    const VectorR pops = thermal_populations(params.nbar, work);
    const MatrixR rho_work = squeeze * pops.asDiagonal() * squeeze.transpose();

    MatrixC working = rho_work.cast<cplx>();
    check_tail(working, dim, "make_squeezed_thermal");
    return DensityMatrix::normalized(working.topLeftCorner(dim, dim)).rotated(params.phase);
}

SqueezedThermalParams fit_squeezed_thermal(double vmin_snl, double vmax_snl, double phase) {
    if (!(vmin_snl > 0.0) || !(vmax_snl > 0.0)) throw InvalidParameterError("variances must be positive");
    if (vmin_snl > vmax_snl) throw InvalidParameterError("vmin must not exceed vmax");
    const double product = vmin_snl * vmax_snl;
    if (product < 1.0 - 1e-9) {
        throw UnphysicalStateError("vmin * vmax = " + std::to_string(product) + " violates the uncertainty bound");
    }
    SqueezedThermalParams p;
    p.r = 0.25 * std::log(vmax_snl / vmin_snl);
    p.nbar = std::max(0.0, 0.5 * (std::sqrt(product) - 1.0));
    p.phase = phase;
    return p;
}

SqueezedThermalParams fit_squeezed_thermal_db(double squeezing_db, double antisqueezing_db, double phase) {
    return fit_squeezed_thermal(db_to_snl(-squeezing_db), db_to_snl(antisqueezing_db), phase);
}

MatrixC displacement_matrix(cplx alpha, int dim) {
    MatrixC d(dim, dim);
    const double a2 = std::norm(alpha);
    const double envelope = std::exp(-0.5 * a2);
    // Powers of alpha and -conj(alpha) up to dim-1.
    std::vector<cplx> pow_a(dim), pow_mc(dim);
    pow_a[0] = pow_mc[0] = 1.0;
    for (int k = 1; k < dim; ++k) {
        pow_a[k] = pow_a[k - 1] * alpha;
        pow_mc[k] = pow_mc[k - 1] * (-std::conj(alpha));
    }
    for (int m = 0; m < dim; ++m) {
        for (int n = 0; n < dim; ++n) {
            if (m >= n) {
                d(m, n) = sqrt_factorial_ratio(n, m) * pow_a[m - n] * envelope * laguerre(n, m - n, a2);
            } else {
                d(m, n) = sqrt_factorial_ratio(m, n) * pow_mc[n - m] * envelope * laguerre(m, n - m, a2);
            }
        }
    }
    return d;
}

DensityMatrix coherent_state(cplx alpha, int dim) {
    VectorC psi(dim);
    const double envelope = std::exp(-0.5 * std::norm(alpha));
    cplx term = envelope;
    for (int n = 0; n < dim; ++n) {
        psi(n) = term;
        term *= alpha / std::sqrt(static_cast<double>(n + 1));
    }
    return DensityMatrix::normalized(psi * psi.adjoint());
}

DensityMatrix add_vacuum_units(const DensityMatrix& rho, double units) {
    if (!(units >= 0.0)) throw InvalidParameterError("noise units must be nonnegative");
    if (units == 0.0) return rho;

    const int dim = rho.dim();
    const int work = 2 * dim;
    // Each of x, p (absolute units) receives Gaussian noise of variance units/2.
    const double sigma = std::sqrt(0.5 * units);
    constexpr int order = 40;
    std::vector<double> t, w;
    gauss_hermite(order, t, w);

    const MatrixC padded = rho.resized(work).matrix();
    MatrixC acc = MatrixC::Zero(work, work);
    const double norm = 1.0 / std::numbers::pi;
    for (int i = 0; i < order; ++i) {
        for (int j = 0; j < order; ++j) {
            const double weight = w[i] * w[j] * norm;
            if (weight < 1e-16) continue;
            const double x = std::sqrt(2.0) * sigma * t[i];
            const double p = std::sqrt(2.0) * sigma * t[j];
            const MatrixC disp = displacement_matrix(cplx(x, p) / std::sqrt(2.0), work);
            acc.noalias() += weight * (disp * padded * disp.adjoint());
        }
    }
    check_tail(acc, dim, "add_vacuum_units");
    return DensityMatrix::normalized(acc.topLeftCorner(dim, dim));
}

MatrixC psd_sqrt(const MatrixC& m) {
    Eigen::SelfAdjointEigenSolver<MatrixC> es(0.5 * (m + m.adjoint()));
    const VectorR roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * roots.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

double fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2) {
    if (rho1.dim() != rho2.dim()) {
        throw DimensionMismatchError("fidelity needs equal cutoffs (" + std::to_string(rho1.dim()) + " vs " +
                                     std::to_string(rho2.dim()) + ")");
    }
    // Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)) = || sqrt(rho1) sqrt(rho2) ||_1, symmetric in the arguments.
    const MatrixC product = psd_sqrt(rho1.matrix()) * psd_sqrt(rho2.matrix());
    Eigen::JacobiSVD<MatrixC> svd(product);
    const double nuclear = svd.singularValues().sum();
    return std::clamp(nuclear * nuclear, 0.0, 1.0);
}

}  // namespace sqzmem

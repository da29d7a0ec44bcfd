#include "sqzmem/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "sqzmem/errors.hpp"

namespace sqzmem {

namespace {

Eigen::Vector2d direction(double theta) { return {std::cos(theta), std::sin(theta)}; }

Eigen::Matrix2d rotation(double phi) {
    Eigen::Matrix2d r;
    r << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    return r;
}

}  // namespace

GaussianStateOracle GaussianStateOracle::vacuum() { return {}; }

GaussianStateOracle GaussianStateOracle::squeezed_thermal(const SqueezedThermalParams& params) {
    GaussianStateOracle g;
    const Eigen::Vector2d u = direction(params.phase);
    const Eigen::Vector2d v = direction(params.phase + 0.5 * std::numbers::pi);
    g.cov = 0.5 * (params.vmin_snl() * u * u.transpose() + params.vmax_snl() * v * v.transpose());
    return g;
}

GaussianStateOracle GaussianStateOracle::coherent(cplx alpha) {
    GaussianStateOracle g;
    g.mean = std::sqrt(2.0) * Eigen::Vector2d(alpha.real(), alpha.imag());
    return g;
}

void GaussianStateOracle::validate() const {
    if (cov(0, 0) <= 0.0 || cov.determinant() <= 0.0) throw UnphysicalStateError("covariance not positive definite");
    if (cov.determinant() < 0.25 - 1e-12) throw UnphysicalStateError("covariance violates det >= 1/4");
}

double GaussianStateOracle::variance_snl(double theta) const {
    const Eigen::Vector2d u = direction(theta);
    return 2.0 * u.dot(cov * u);
}

double GaussianStateOracle::mean_abs(double theta) const { return direction(theta).dot(mean); }

double GaussianStateOracle::min_variance_snl() const {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    return 2.0 * es.eigenvalues()(0);
}

double GaussianStateOracle::max_variance_snl() const {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    return 2.0 * es.eigenvalues()(1);
}

double GaussianStateOracle::theta_min() const {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    const Eigen::Vector2d u = es.eigenvectors().col(0);
    double theta = std::atan2(u(1), u(0));
    theta = std::fmod(theta, std::numbers::pi);
    if (theta < 0.0) theta += std::numbers::pi;
    return theta;
}

double GaussianStateOracle::pdf(double theta, double x) const {
    const double var = 0.5 * variance_snl(theta);
    const double d = x - mean_abs(theta);
    return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

double GaussianStateOracle::wigner(double x, double p) const {
    const Eigen::Vector2d d = Eigen::Vector2d(x, p) - mean;
    const double q = d.dot(cov.inverse() * d);
    return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * std::sqrt(cov.determinant()));
}

GaussianStateOracle GaussianStateOracle::rotated(double phi) const {
    const Eigen::Matrix2d r = rotation(phi);
    return {r * mean, r * cov * r.transpose()};
}

GaussianStateOracle GaussianStateOracle::with_added_noise(double units_snl) const {
    return {mean, cov + 0.5 * units_snl * Eigen::Matrix2d::Identity()};
}

GaussianStateOracle GaussianStateOracle::after_loss(double eta, double env_snl) const {
    return {std::sqrt(eta) * mean, eta * cov + (1.0 - eta) * 0.5 * env_snl * Eigen::Matrix2d::Identity()};
}

double GaussianStateOracle::split_log_negativity(LogBase base) const {
    // Modes a, b after a balanced split with vacuum; blocks in absolute units.
    const Eigen::Matrix2d vac = 0.5 * Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d a = 0.5 * (cov + vac);
    const Eigen::Matrix2d c = 0.5 * (cov - vac);
    const Eigen::Matrix2d b = a;
    Eigen::Matrix4d full;
    full << a, c, c.transpose(), b;
    // Partial transposition flips the sign of det C in the symplectic invariant.
    const double delta_pt = a.determinant() + b.determinant() - 2.0 * c.determinant();
    const double disc = std::max(0.0, delta_pt * delta_pt - 4.0 * full.determinant());
    const double nu_min = std::sqrt(0.5 * (delta_pt - std::sqrt(disc)));
    const double two_nu = 2.0 * nu_min;
    if (two_nu >= 1.0) return 0.0;
    return -log_in_base(two_nu, base);
}

double gaussian_fidelity(const GaussianStateOracle& a, const GaussianStateOracle& b) {
    // SNL units (vacuum covariance = identity).
    const Eigen::Matrix2d va = 2.0 * a.cov;
    const Eigen::Matrix2d vb = 2.0 * b.cov;
    const Eigen::Vector2d delta = std::sqrt(2.0) * (a.mean - b.mean);
    const Eigen::Matrix2d sum = va + vb;
    const double big_delta = sum.determinant();
    const double big_lambda = std::max(0.0, (va.determinant() - 1.0) * (vb.determinant() - 1.0));
    const double prefactor = 2.0 / (std::sqrt(big_delta + big_lambda) - std::sqrt(big_lambda));
    return prefactor * std::exp(-0.5 * delta.dot(sum.inverse() * delta));
}

}  // namespace sqzmem

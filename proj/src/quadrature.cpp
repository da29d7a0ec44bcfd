#include "sqzmem/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "sqzmem/errors.hpp"
#include "sqzmem/oscillator.hpp"

namespace sqzmem {

LadderMoments ladder_moments(const DensityMatrix& rho) {
    LadderMoments mom{0.0, 0.0, 0.0};
    for (int m = 1; m < rho.dim(); ++m) mom.a += rho(m, m - 1) * std::sqrt(static_cast<double>(m));
    for (int m = 2; m < rho.dim(); ++m) mom.a2 += rho(m, m - 2) * std::sqrt(static_cast<double>(m) * (m - 1));
    mom.n = rho.mean_photon_number();
    return mom;
}

namespace {

struct CentralMoments {
    double n_excess;  // <da^dagger da>
    cplx m2;          // <da^2>
};

CentralMoments central_moments(const DensityMatrix& rho) {
    const LadderMoments mom = ladder_moments(rho);
    return {mom.n - std::norm(mom.a), mom.a2 - mom.a * mom.a};
}

}  // namespace

double quad_variance(const DensityMatrix& rho, double theta) {
    const CentralMoments c = central_moments(rho);
    return 2.0 * c.n_excess + 1.0 + 2.0 * (c.m2 * std::polar(1.0, -2.0 * theta)).real();
}

double quad_mean(const DensityMatrix& rho, double theta) {
    return std::sqrt(2.0) * (ladder_moments(rho).a * std::polar(1.0, -theta)).real();
}

VarianceExtrema min_max_variance(const DensityMatrix& rho) {
    const CentralMoments c = central_moments(rho);
    const double centre = 2.0 * c.n_excess + 1.0;
    const double swing = 2.0 * std::abs(c.m2);
    VarianceExtrema e{centre - swing, centre + swing, 0.0, false};
    if (e.vmax - e.vmin < 1e-9) {
        e.degenerate = true;
        return e;
    }
    // Minimum where e^{-2 i theta} m2 = -|m2|.
    double theta = 0.5 * (std::arg(c.m2) + std::numbers::pi);
    theta = std::fmod(theta, std::numbers::pi);
    if (theta < 0.0) theta += std::numbers::pi;
    if (theta >= std::numbers::pi) theta -= std::numbers::pi;
    e.theta_min = theta;
    return e;
}

std::vector<double> quadrature_pdf(const DensityMatrix& rho, double theta, std::span<const double> x_grid) {
    check_grid(x_grid, "quadrature_pdf");
    const int d = rho.dim();
    MatrixR s(d, d);
    for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n) s(m, n) = (rho(m, n) * std::polar(1.0, (n - m) * theta)).real();

    std::vector<double> out;
    out.reserve(x_grid.size());
    VectorR psi(d);
    for (double x : x_grid) {
        oscillator_wavefunctions(x, std::span<double>(psi.data(), static_cast<std::size_t>(d)));
        out.push_back(psi.dot(s * psi));
    }
    return out;
}

namespace {

double wigner_point(const MatrixC& rho, double x, double p) {
    const int d = static_cast<int>(rho.rows());
    const double r2 = x * x + p * p;
    const double arg = 2.0 * r2;
    const double gauss = std::exp(-r2) / std::numbers::pi;
    const cplx z = std::sqrt(2.0) * cplx(x, -p);

    double w = 0.0;
    cplx z_pow = 1.0;  // z^k
    for (int k = 0; k < d; ++k) {
        // Laguerre L_n^{(k)}(arg) for n = 0.. by recurrence; pair (m, n) = (n + k, n).
        double l_prev = 0.0;
        double l = 1.0;
        for (int n = 0; n + k < d; ++n) {
            if (n == 1) {
                l_prev = 1.0;
                l = 1.0 + k - arg;
            } else if (n > 1) {
                const double next = ((2.0 * (n - 1) + 1.0 + k - arg) * l - (n - 1 + k) * l_prev) / n;
                l_prev = l;
                l = next;
            }
            const double sign = (n % 2 == 0) ? 1.0 : -1.0;
            const double coeff = sign * sqrt_factorial_ratio(n, n + k) * l;
            const cplx term = rho(n + k, n) * z_pow * coeff;
            // Off-diagonal pairs contribute term + conj(term).
            w += (k == 0) ? term.real() : 2.0 * term.real();
        }
        z_pow *= z;
    }
    return gauss * w;
}

}  // namespace

double wigner_at(const DensityMatrix& rho, double x, double p) {
    const double pts[2] = {x, p};
    check_grid(pts, "wigner");
    return wigner_point(rho.matrix(), x, p);
}

std::vector<double> wigner(const DensityMatrix& rho, std::span<const double> x_grid, std::span<const double> p_grid) {
    check_grid(x_grid, "wigner x");
    check_grid(p_grid, "wigner p");
    std::vector<double> out;
    out.reserve(x_grid.size() * p_grid.size());
    for (double x : x_grid)
        for (double p : p_grid) out.push_back(wigner_point(rho.matrix(), x, p));
    return out;
}

}  // namespace sqzmem

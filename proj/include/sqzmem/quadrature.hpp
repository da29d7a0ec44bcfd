#pragma once

#include <span>
#include <vector>

#include "sqzmem/density_matrix.hpp"

namespace sqzmem {

/// Ladder-operator moments <a>, <a^2>, <a^dagger a>.
struct LadderMoments {
    cplx a;
    cplx a2;
    double n;
};

LadderMoments ladder_moments(const DensityMatrix& rho);

/// Variance of x_theta = (a e^{-i theta} + a^dagger e^{i theta}) / sqrt(2), in SNL units.
double quad_variance(const DensityMatrix& rho, double theta);

/// Mean of x_theta in absolute units.
double quad_mean(const DensityMatrix& rho, double theta);

struct VarianceExtrema {
    double vmin;       ///< SNL
    double vmax;       ///< SNL
    double theta_min;  ///< in [0, pi); 0 when degenerate
    bool degenerate;   ///< vmax - vmin < 1e-9
};

VarianceExtrema min_max_variance(const DensityMatrix& rho);

/// pr(x | theta) on an absolute-unit grid (|x| <= 8).
std::vector<double> quadrature_pdf(const DensityMatrix& rho, double theta, std::span<const double> x_grid);

/// Wigner function value at one phase-space point (absolute units).
double wigner_at(const DensityMatrix& rho, double x, double p);

/// Row-major grid: result[i * p_grid.size() + j] = W(x_grid[i], p_grid[j]).
std::vector<double> wigner(const DensityMatrix& rho, std::span<const double> x_grid, std::span<const double> p_grid);

}  // namespace sqzmem

#pragma once

#include <span>
#include <vector>

#include "sqzmem/density_matrix.hpp"

namespace sqzmem {

/// Largest |x| (absolute quadrature units) accepted by grid-based functions.
inline constexpr double max_quadrature_abs = 8.0;

/// Harmonic-oscillator eigenfunctions psi_0..psi_{count-1} at x, vacuum
/// variance 1/2, by the normalized three-term recurrence.
VectorR oscillator_wavefunctions(double x, int count);

/// Same, written into `out` (size = count).
void oscillator_wavefunctions(double x, std::span<double> out);

/// Generalized Laguerre polynomial L_n^{(alpha)}(x) by upward recurrence.
double laguerre(int n, int alpha, double x);

/// Annihilation operator truncated to `dim` (a_{n-1,n} = sqrt(n)).
MatrixR annihilation(int dim);

/// sqrt(n!/m!) for n <= m, evaluated as a running product.
double sqrt_factorial_ratio(int n, int m);

void check_grid(std::span<const double> grid, const char* what);

}  // namespace sqzmem

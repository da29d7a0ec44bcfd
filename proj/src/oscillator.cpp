#include "sqzmem/oscillator.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sqzmem/errors.hpp"

namespace sqzmem {

void oscillator_wavefunctions(double x, std::span<double> out) {
    if (out.empty()) return;
    // psi_0 = pi^{-1/4} exp(-x^2/2)
    out[0] = std::exp(-0.5 * x * x) / std::sqrt(std::sqrt(std::numbers::pi));
    if (out.size() == 1) return;
    out[1] = std::sqrt(2.0) * x * out[0];
    for (std::size_t n = 1; n + 1 < out.size(); ++n) {
        const double np1 = static_cast<double>(n + 1);
        out[n + 1] = std::sqrt(2.0 / np1) * x * out[n] - std::sqrt(static_cast<double>(n) / np1) * out[n - 1];
    }
}

VectorR oscillator_wavefunctions(double x, int count) {
    VectorR v(count);
    oscillator_wavefunctions(x, std::span<double>(v.data(), static_cast<std::size_t>(count)));
    return v;
}

double laguerre(int n, int alpha, double x) {
    if (n == 0) return 1.0;
    double l_prev = 1.0;
    double l = 1.0 + alpha - x;
    for (int k = 1; k < n; ++k) {
        const double next = ((2.0 * k + 1.0 + alpha - x) * l - (k + alpha) * l_prev) / (k + 1.0);
        l_prev = l;
        l = next;
    }
    return l;
}

MatrixR annihilation(int dim) {
    MatrixR a = MatrixR::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

double sqrt_factorial_ratio(int n, int m) {
    double r = 1.0;
    for (int k = n + 1; k <= m; ++k) r /= std::sqrt(static_cast<double>(k));
    return r;
}

void check_grid(std::span<const double> grid, const char* what) {
    for (double g : grid) {
        if (!std::isfinite(g) || std::abs(g) > max_quadrature_abs) {
            throw GridOutOfRangeError(std::string(what) + " grid point " + std::to_string(g) + " outside |x| <= 8");
        }
    }
}

}  // namespace sqzmem

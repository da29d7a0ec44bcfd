#pragma once

#include <complex>
#include <string>

#include <Eigen/Dense>

namespace sqzmem {

using cplx = std::complex<double>;
using MatrixC = Eigen::MatrixXcd;
using VectorC = Eigen::VectorXcd;
using MatrixR = Eigen::MatrixXd;
using VectorR = Eigen::VectorXd;

inline constexpr int default_fock_cutoff = 20;
inline constexpr int max_fock_cutoff = 25;

/// Tolerances every state handed out by the library satisfies.
struct StateTolerance {
    static constexpr double hermitian = 1e-12;
    static constexpr double trace = 1e-9;
    static constexpr double min_eigenvalue = -1e-10;
    static constexpr double truncation_tail = 1e-4;
};

/**
 * Single-mode density matrix in the Fock basis |0>..|dim-1>.
 *
 * Construction through `from_matrix` checks Hermiticity, unit trace and
 * positivity, so any instance in circulation is a valid state.
 */
class DensityMatrix {
public:
    /// Vacuum |0><0| at the given cutoff.
    explicit DensityMatrix(int dim = default_fock_cutoff);

    /// Validates and wraps `m`. Small anti-Hermitian parts (below tolerance) are
    /// symmetrized away; trace is not renormalized.
    static DensityMatrix from_matrix(const MatrixC& m);

    /// Symmetrizes, rescales to unit trace, then validates. For outputs of
    /// numerical maps whose trace drifts by truncation.
    static DensityMatrix normalized(const MatrixC& m);

    static DensityMatrix fock(int n, int dim);
    static DensityMatrix maximally_mixed(int dim);

    int dim() const noexcept { return static_cast<int>(m_.rows()); }
    const MatrixC& matrix() const noexcept { return m_; }
    cplx operator()(int m, int n) const { return m_(m, n); }

    /// Sum of populations at n >= dim-2.
    double truncation_tail() const;
    double min_eigenvalue() const;
    double mean_photon_number() const;

    /// Embeds into a larger cutoff (zero padding) or truncates and renormalizes.
    DensityMatrix resized(int new_dim) const;

    /// e^{i phi n} rho e^{-i phi n}: shifts every quadrature feature by +phi.
    DensityMatrix rotated(double phi) const;

private:
    explicit DensityMatrix(MatrixC m, int /*tag*/) : m_(std::move(m)) {}
    MatrixC m_;
};

/// Two-mode state on (dim x dim); row index = m_a * dim + m_b.
class TwoModeDensityMatrix {
public:
    static TwoModeDensityMatrix from_matrix(const MatrixC& m, int dim_per_mode);

    int dim_per_mode() const noexcept { return d_; }
    const MatrixC& matrix() const noexcept { return m_; }

    DensityMatrix reduced_a() const;
    DensityMatrix reduced_b() const;

    /// Local rotation e^{i(phi_a n_a + phi_b n_b)}.
    TwoModeDensityMatrix locally_rotated(double phi_a, double phi_b) const;

private:
    TwoModeDensityMatrix(MatrixC m, int d) : m_(std::move(m)), d_(d) {}
    MatrixC m_;
    int d_;
};

/// Throws InvalidStateError describing the first violated invariant.
void validate_state_matrix(const MatrixC& m);

/// JSON text {"dim": d, "re": [[...]], "im": [[...]]}.
std::string to_json(const DensityMatrix& rho);
DensityMatrix density_matrix_from_json(const std::string& text);

void save_density_matrix(const DensityMatrix& rho, const std::string& path);
DensityMatrix load_density_matrix(const std::string& path);

}  // namespace sqzmem

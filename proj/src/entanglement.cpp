#include "sqzmem/entanglement.hpp"

#include <cmath>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "sqzmem/errors.hpp"

namespace sqzmem {

double log_in_base(double value, LogBase base) {
    return base == LogBase::two ? std::log2(value) : std::log(value);
}

std::string to_string(LogBase base) { return base == LogBase::two ? "2" : "e"; }

LogBase parse_log_base(const std::string& text) {
    if (text == "2") return LogBase::two;
    if (text == "e") return LogBase::e;
    throw InvalidParameterError("log base must be '2' or 'e', got '" + text + "'");
}

MatrixR beamsplitter_sector(int total_photons, double transmissivity) {
    if (transmissivity < 0.0 || transmissivity > 1.0) throw InvalidParameterError("transmissivity outside [0, 1]");
    const int size = total_photons + 1;
    // Generator a b^dagger - a^dagger b in the basis |j, N-j>.
    MatrixR gen = MatrixR::Zero(size, size);
    for (int j = 0; j <= total_photons; ++j) {
        if (j >= 1) gen(j - 1, j) += std::sqrt(static_cast<double>(j) * (total_photons - j + 1));
        if (j < total_photons) gen(j + 1, j) -= std::sqrt(static_cast<double>(j + 1) * (total_photons - j));
    }
    const double angle = std::acos(std::sqrt(transmissivity));
    return (angle * gen).exp();
}

TwoModeDensityMatrix split_on_beamsplitter(const DensityMatrix& rho) {
    const int d = rho.dim();
    if (d > max_fock_cutoff) throw CutoffTooSmallError("split_on_beamsplitter supports cutoffs up to 25");
    std::vector<MatrixR> sectors;
    sectors.reserve(d);
    for (int n = 0; n < d; ++n) sectors.push_back(beamsplitter_sector(n, 0.5));

    MatrixC out = MatrixC::Zero(d * d, d * d);
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            const cplx rmn = rho(m, n);
            if (rmn == cplx(0.0)) continue;
            for (int j = 0; j <= m; ++j) {
                const double um = sectors[m](j, m);
                const int row = j * d + (m - j);
                for (int jp = 0; jp <= n; ++jp) {
                    out(row, jp * d + (n - jp)) += rmn * um * sectors[n](jp, n);
                }
            }
        }
    }
    const double tr = out.trace().real();
    if (std::abs(tr - 1.0) > 1e-9) throw CutoffTooSmallError("beamsplitter output lost trace");
    return TwoModeDensityMatrix::from_matrix(0.5 * (out + out.adjoint()), d);
}

double log_negativity(const TwoModeDensityMatrix& rho2, LogBase base) {
    const int d = rho2.dim_per_mode();
    const MatrixC& m = rho2.matrix();
    MatrixC pt(d * d, d * d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int ap = 0; ap < d; ++ap)
                for (int bp = 0; bp < d; ++bp) pt(a * d + b, ap * d + bp) = m(a * d + bp, ap * d + b);
    Eigen::SelfAdjointEigenSolver<MatrixC> es(pt, Eigen::EigenvaluesOnly);
    const double trace_norm = es.eigenvalues().cwiseAbs().sum();
    return std::max(0.0, log_in_base(trace_norm, base));
}

double entanglement_potential(const DensityMatrix& rho, LogBase base) {
    return log_negativity(split_on_beamsplitter(rho), base);
}

}  // namespace sqzmem

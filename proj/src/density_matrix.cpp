#include "sqzmem/density_matrix.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sqzmem/errors.hpp"

namespace sqzmem {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_parameter: return "invalid parameter";
        case ErrorCode::cutoff_too_small: return "cutoff too small";
        case ErrorCode::unphysical_state: return "unphysical state";
        case ErrorCode::invalid_state: return "invalid state";
        case ErrorCode::dimension_mismatch: return "dimension mismatch";
        case ErrorCode::grid_out_of_range: return "grid out of range";
        case ErrorCode::zero_energy: return "zero energy";
        case ErrorCode::config_inconsistency: return "config inconsistency";
        case ErrorCode::window_mismatch: return "window mismatch";
        case ErrorCode::insufficient_samples: return "insufficient samples";
        case ErrorCode::insufficient_coverage: return "insufficient phase coverage";
        case ErrorCode::low_contrast: return "low contrast";
        case ErrorCode::degenerate_phase: return "degenerate phase";
        case ErrorCode::seed_reuse: return "seed reuse";
        case ErrorCode::fit_error: return "fit error";
        case ErrorCode::malformed_csv: return "malformed csv";
        case ErrorCode::io_error: return "io error";
        case ErrorCode::config_error: return "config error";
    }
    return "error";
}

namespace {

MatrixC hermitian_part(const MatrixC& m) { return 0.5 * (m + m.adjoint()); }

double min_eig(const MatrixC& m) {
    Eigen::SelfAdjointEigenSolver<MatrixC> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

void validate_state_matrix(const MatrixC& m) {
    if (m.rows() < 1 || m.rows() != m.cols()) {
        throw InvalidStateError("matrix must be square and non-empty");
    }
    const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (asym > StateTolerance::hermitian) {
        throw InvalidStateError("not Hermitian (max |rho - rho^dagger| = " + std::to_string(asym) + ")");
    }
    const double tr = m.trace().real();
    if (std::abs(tr - 1.0) > StateTolerance::trace) {
        throw InvalidStateError("trace " + std::to_string(tr) + " differs from 1");
    }
    const double lmin = min_eig(m);
    if (lmin < StateTolerance::min_eigenvalue) {
        throw InvalidStateError("negative eigenvalue " + std::to_string(lmin));
    }
}

DensityMatrix::DensityMatrix(int dim) : m_(MatrixC::Zero(dim, dim)) {
    if (dim < 1) throw InvalidParameterError("dimension must be positive");
    m_(0, 0) = 1.0;
}

DensityMatrix DensityMatrix::from_matrix(const MatrixC& m) {
    validate_state_matrix(m);
    return DensityMatrix(hermitian_part(m), 0);
}

DensityMatrix DensityMatrix::normalized(const MatrixC& m) {
    MatrixC h = hermitian_part(m);
    const double tr = h.trace().real();
    if (!(tr > 0.0)) throw InvalidStateError("non-positive trace");
    h /= tr;
    validate_state_matrix(h);
    return DensityMatrix(std::move(h), 0);
}

DensityMatrix DensityMatrix::fock(int n, int dim) {
    if (n < 0 || n >= dim) throw InvalidParameterError("Fock index outside cutoff");
    MatrixC m = MatrixC::Zero(dim, dim);
    m(n, n) = 1.0;
    return DensityMatrix(std::move(m), 0);
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
    if (dim < 1) throw InvalidParameterError("dimension must be positive");
    return DensityMatrix(MatrixC::Identity(dim, dim) / static_cast<double>(dim), 0);
}

double DensityMatrix::truncation_tail() const {
    double tail = 0.0;
    for (int n = std::max(0, dim() - 2); n < dim(); ++n) tail += m_(n, n).real();
    return tail;
}

double DensityMatrix::min_eigenvalue() const { return min_eig(m_); }

double DensityMatrix::mean_photon_number() const {
    double n_mean = 0.0;
    for (int n = 0; n < dim(); ++n) n_mean += n * m_(n, n).real();
    return n_mean;
}

DensityMatrix DensityMatrix::resized(int new_dim) const {
    if (new_dim < 1) throw InvalidParameterError("dimension must be positive");
    if (new_dim >= dim()) {
        MatrixC m = MatrixC::Zero(new_dim, new_dim);
        m.topLeftCorner(dim(), dim()) = m_;
        return DensityMatrix(std::move(m), 0);
    }
    return normalized(m_.topLeftCorner(new_dim, new_dim));
}

DensityMatrix DensityMatrix::rotated(double phi) const {
    MatrixC m = m_;
    for (int r = 0; r < dim(); ++r) {
        for (int c = 0; c < dim(); ++c) m(r, c) *= std::polar(1.0, phi * (r - c));
    }
    return DensityMatrix(hermitian_part(m), 0);
}

TwoModeDensityMatrix TwoModeDensityMatrix::from_matrix(const MatrixC& m, int dim_per_mode) {
    if (m.rows() != static_cast<Eigen::Index>(dim_per_mode) * dim_per_mode) {
        throw DimensionMismatchError("two-mode matrix size does not match dim_per_mode^2");
    }
    validate_state_matrix(m);
    return TwoModeDensityMatrix(hermitian_part(m), dim_per_mode);
}

DensityMatrix TwoModeDensityMatrix::reduced_a() const {
    MatrixC r = MatrixC::Zero(d_, d_);
    for (int m = 0; m < d_; ++m)
        for (int n = 0; n < d_; ++n)
            for (int k = 0; k < d_; ++k) r(m, n) += m_(m * d_ + k, n * d_ + k);
    return DensityMatrix::normalized(r);
}

DensityMatrix TwoModeDensityMatrix::reduced_b() const {
    MatrixC r = MatrixC::Zero(d_, d_);
    for (int m = 0; m < d_; ++m)
        for (int n = 0; n < d_; ++n)
            for (int k = 0; k < d_; ++k) r(m, n) += m_(k * d_ + m, k * d_ + n);
    return DensityMatrix::normalized(r);
}

TwoModeDensityMatrix TwoModeDensityMatrix::locally_rotated(double phi_a, double phi_b) const {
    MatrixC m = m_;
    const int n_tot = d_ * d_;
    for (int r = 0; r < n_tot; ++r) {
        for (int c = 0; c < n_tot; ++c) {
            const int da = r / d_ - c / d_;
            const int db = r % d_ - c % d_;
            m(r, c) *= std::polar(1.0, phi_a * da + phi_b * db);
        }
    }
    return TwoModeDensityMatrix(hermitian_part(m), d_);
}

std::string to_json(const DensityMatrix& rho) {
    nlohmann::json j;
    j["dim"] = rho.dim();
    auto re = nlohmann::json::array();
    auto im = nlohmann::json::array();
    for (int r = 0; r < rho.dim(); ++r) {
        auto row_re = nlohmann::json::array();
        auto row_im = nlohmann::json::array();
        for (int c = 0; c < rho.dim(); ++c) {
            row_re.push_back(rho(r, c).real());
            row_im.push_back(rho(r, c).imag());
        }
        re.push_back(std::move(row_re));
        im.push_back(std::move(row_im));
    }
    j["re"] = std::move(re);
    j["im"] = std::move(im);
    return j.dump(1) + "\n";
}

DensityMatrix density_matrix_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidStateError(std::string("density matrix JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("dim") || !j.contains("re") || !j.contains("im")) {
        throw InvalidStateError("density matrix JSON needs keys dim, re, im");
    }
    const int d = j.at("dim").get<int>();
    if (d < 1 || d > max_fock_cutoff) throw InvalidStateError("dim outside [1, 25]");
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (!re.is_array() || !im.is_array() || static_cast<int>(re.size()) != d || static_cast<int>(im.size()) != d) {
        throw InvalidStateError("re/im must have dim rows");
    }
    MatrixC m(d, d);
    for (int r = 0; r < d; ++r) {
        if (static_cast<int>(re[r].size()) != d || static_cast<int>(im[r].size()) != d) {
            throw InvalidStateError("row " + std::to_string(r) + " has wrong length");
        }
        for (int c = 0; c < d; ++c) m(r, c) = cplx(re[r][c].get<double>(), im[r][c].get<double>());
    }
    return DensityMatrix::from_matrix(m);
}

void save_density_matrix(const DensityMatrix& rho, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << to_json(rho);
    if (!out) throw IoError("write failed for " + path);
}

DensityMatrix load_density_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return density_matrix_from_json(ss.str());
}

}  // namespace sqzmem

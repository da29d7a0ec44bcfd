#pragma once

#include <string>

#include "sqzmem/density_matrix.hpp"

namespace sqzmem {

enum class LogBase { two, e };

double log_in_base(double value, LogBase base);
std::string to_string(LogBase base);
LogBase parse_log_base(const std::string& text);

/// Beamsplitter unitary restricted to the N-photon sector, basis |j, N-j>
/// (j photons in the first port). |1,0> -> sqrt(t)|1,0> + sqrt(1-t)|0,1>.
MatrixR beamsplitter_sector(int total_photons, double transmissivity);

/// Balanced beamsplitter with vacuum in the second port.
TwoModeDensityMatrix split_on_beamsplitter(const DensityMatrix& rho);

/// log ||rho^{T_B}||_1 in the requested base.
double log_negativity(const TwoModeDensityMatrix& rho2, LogBase base);

/// Logarithmic negativity of the split state: a nonclassicality measure.
double entanglement_potential(const DensityMatrix& rho, LogBase base);

}  // namespace sqzmem

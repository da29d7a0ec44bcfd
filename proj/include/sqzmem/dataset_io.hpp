#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sqzmem/density_matrix.hpp"
#include "sqzmem/timedomain.hpp"

namespace sqzmem {

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// CSV with header `phase_rad,quadrature_snl`, LF line endings.
std::string quadrature_csv(std::span<const QuadratureRecord> records);

/// Parses quadrature CSV text. Throws MalformedCsvError with the 1-based line.
std::vector<QuadratureRecord> parse_quadrature_csv(const std::string& text);

/// CSV with header `time_us,variance_snl`.
std::string variance_trace_csv(std::span<const VarianceTracePoint> trace);

/// Columns with a header row; all columns must have equal length.
std::string columns_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns);

/// Wigner grid as rows (x, p, W); rows ordered by x then p.
std::string wigner_csv(std::span<const double> xs, std::span<const double> ps, std::span<const double> w);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

std::vector<QuadratureRecord> load_quadrature_csv(const std::filesystem::path& path);

}  // namespace sqzmem

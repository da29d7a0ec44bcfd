#include "sqzmem/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sqzmem/errors.hpp"

namespace sqzmem {

namespace {

constexpr const char* quadrature_header = "phase_rad,quadrature_snl";

bool parse_double(std::string_view field, double& out) {
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
    if (field.empty()) return false;
    const char* end = field.data() + field.size();
    const auto res = std::from_chars(field.data(), end, out);
    return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string quadrature_csv(std::span<const QuadratureRecord> records) {
    std::string out = std::string(quadrature_header) + "\n";
    out.reserve(records.size() * 40);
    for (const auto& r : records) {
        out += format_double(r.phase);
        out += ',';
        out += format_double(r.value);
        out += '\n';
    }
    return out;
}

std::vector<QuadratureRecord> parse_quadrature_csv(const std::string& text) {
    if (text.empty()) throw MalformedCsvError(1, "empty file");
    std::vector<QuadratureRecord> out;
    std::size_t line_no = 0, pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line_no == 1) {
            if (line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
            if (line != quadrature_header) {
                throw MalformedCsvError(1, "expected header '" + std::string(quadrature_header) + "'");
            }
            continue;
        }
        if (line.empty()) {
            if (pos >= text.size()) break;  // trailing newline
            throw MalformedCsvError(line_no, "empty row");
        }
        const auto comma = line.find(',');
        if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
            throw MalformedCsvError(line_no, "expected 2 fields");
        }
        QuadratureRecord r;
        if (!parse_double(line.substr(0, comma), r.phase)) throw MalformedCsvError(line_no, "bad phase value");
        if (!parse_double(line.substr(comma + 1), r.value)) throw MalformedCsvError(line_no, "bad quadrature value");
        if (r.phase < 0.0 || r.phase >= std::numbers::pi) {
            throw MalformedCsvError(line_no, "phase outside [0, pi)");
        }
        out.push_back(r);
    }
    if (line_no <= 1 && out.empty() && text.find('\n') == std::string::npos && text != quadrature_header) {
        throw MalformedCsvError(1, "missing header");
    }
    return out;
}

std::string variance_trace_csv(std::span<const VarianceTracePoint> trace) {
    std::string out = "time_us,variance_snl\n";
    for (const auto& p : trace) out += format_double(p.time_us) + "," + format_double(p.variance_snl) + "\n";
    return out;
}

std::string columns_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns) {
    if (header.size() != columns.size()) throw InvalidParameterError("columns_csv: header/column count mismatch");
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns) {
        if (c.size() != rows) throw InvalidParameterError("columns_csv: ragged columns");
    }
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) out += ',';
            out += format_double(columns[c][r]);
        }
        out += '\n';
    }
    return out;
}

std::string wigner_csv(std::span<const double> xs, std::span<const double> ps, std::span<const double> w) {
    if (w.size() != xs.size() * ps.size()) throw InvalidParameterError("wigner_csv: grid size mismatch");
    std::string out = "x,p,W\n";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < ps.size(); ++j) {
            out += format_double(xs[i]) + "," + format_double(ps[j]) + "," + format_double(w[i * ps.size() + j]) + "\n";
        }
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("failed reading " + path.string());
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<QuadratureRecord> load_quadrature_csv(const std::filesystem::path& path) {
    return parse_quadrature_csv(read_text_file(path));
}

}  // namespace sqzmem

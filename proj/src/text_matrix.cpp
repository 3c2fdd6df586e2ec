#include "dualbli/text_matrix.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

namespace dualbli {

std::string format_number(double value, int significant_digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, value);
  return buf;
}

bool parse_number(std::string_view field, double& out) {
  if (field.empty()) return false;
  // from_chars rejects a leading '+', which some writers emit.
  if (field.front() == '+') field.remove_prefix(1);
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::vector<std::string_view> split_fields(std::string_view line, std::string_view separators) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    std::size_t start = line.find_first_not_of(separators, pos);
    if (start == std::string_view::npos) break;
    std::size_t stop = line.find_first_of(separators, start);
    if (stop == std::string_view::npos) stop = line.size();
    fields.push_back(line.substr(start, stop - start));
    pos = stop;
  }
  return fields;
}

void write_matrix_section(std::ostream& out, const std::string& name, const Matrix& m,
                          int significant_digits) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_number(m(i, j), significant_digits);
    }
    out << '\n';
  }
}

Matrix read_matrix_section(std::istream& in, const std::string& expected_name) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("missing section '" + expected_name + "'");
  auto header = split_fields(line);
  double rows = 0, cols = 0;
  if (header.size() != 3 || header[0] != expected_name || !parse_number(header[1], rows) ||
      !parse_number(header[2], cols) || rows < 0 || cols < 0) {
    throw DataError("bad section header '" + line + "', expected '" + expected_name + " <rows> <cols>'");
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (!std::getline(in, line)) throw DataError("section '" + expected_name + "' truncated");
    auto fields = split_fields(line);
    if (static_cast<Eigen::Index>(fields.size()) != m.cols()) {
      throw DataError("section '" + expected_name + "' row " + std::to_string(i) + " has " +
                      std::to_string(fields.size()) + " values, expected " + std::to_string(m.cols()));
    }
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!parse_number(fields[j], m(i, j))) {
        throw DataError("section '" + expected_name + "' row " + std::to_string(i) +
                        ": bad number '" + std::string(fields[j]) + "'");
      }
    }
  }
  return m;
}

}  // namespace dualbli

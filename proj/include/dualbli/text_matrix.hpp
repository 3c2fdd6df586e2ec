#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dualbli/types.hpp"

namespace dualbli {

// Shortest "%.<digits>g" rendering of a value.
std::string format_number(double value, int significant_digits);

// Parses a finite double covering the whole field; returns false otherwise.
bool parse_number(std::string_view field, double& out);

// Splits on runs of the given separator characters, dropping empty fields.
std::vector<std::string_view> split_fields(std::string_view line, std::string_view separators = " ");

// One named matrix block: "<name> <rows> <cols>" followed by `rows` lines of
// `cols` space-separated numbers.
void write_matrix_section(std::ostream& out, const std::string& name, const Matrix& m,
                          int significant_digits = 9);
Matrix read_matrix_section(std::istream& in, const std::string& expected_name);

}  // namespace dualbli

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace shapkit {

// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

struct NumericTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

// Comma-delimited text with a header row; every data cell must be numeric.
NumericTable parse_numeric_csv(std::string_view text);
NumericTable read_numeric_csv(const std::filesystem::path& path);
std::string numeric_csv(const NumericTable& table);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view content);

}  // namespace shapkit

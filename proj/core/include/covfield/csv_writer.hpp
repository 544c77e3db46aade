#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace covfield {

/// Shortest round-trip-safe rendering: 17 significant digits.
std::string format_number(double value);
std::string format_number(std::size_t value);

/// Comma-separated output with a mandatory header row. An optional first
/// comment line records the UTC write time.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header, bool timestamp);

  void row(const std::vector<std::string>& fields);
  void row(std::initializer_list<double> values);

  std::size_t rows_written() const noexcept { return rows_; }
  std::size_t columns() const noexcept { return columns_; }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t columns_;
  std::size_t rows_ = 0;
};

}  // namespace covfield

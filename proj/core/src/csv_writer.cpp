#include "covfield/csv_writer.hpp"

#include <cstdio>
#include <ctime>

#include "covfield/errors.hpp"

namespace covfield {

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_number(std::size_t value) { return std::to_string(value); }

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header, bool timestamp)
    : out_(path), path_(path), columns_(header.size()) {
  if (!out_) throw Error("cannot open '" + path.string() + "' for writing");
  if (header.empty()) throw InvalidArgument("CSV header must name at least one column");
  if (timestamp) {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out_ << "# generated " << buf << '\n';
  }
  for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) {
    throw InvalidArgument("CSV row has " + std::to_string(fields.size()) + " fields, header has " +
                          std::to_string(columns_));
  }
  for (std::size_t k = 0; k < fields.size(); ++k) out_ << (k ? "," : "") << fields[k];
  out_ << '\n';
  if (!out_) throw Error("write to '" + path_.string() + "' failed");
  ++rows_;
}

void CsvWriter::row(std::initializer_list<double> values) {
  std::vector<std::string> fields;
  fields.reserve(values.size());
  for (const double v : values) fields.push_back(format_number(v));
  row(fields);
}

}  // namespace covfield

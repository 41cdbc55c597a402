#include "hsflow/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "hsflow/error.hpp"

namespace hsflow {
namespace {

std::string quote(std::string_view cell) {
  if (cell.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(cell);
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw InvalidInput("CSV row width does not match header");
  rows_.push_back(std::move(cells));
}

void CsvTable::add_row(std::initializer_list<double> values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  add_row(std::move(cells));
}

std::string CsvTable::str() const {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += quote(row[i]);
    }
    out += "\r\n";
  };
  emit(header_);
  for (const auto& row : rows_) emit(row);
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << str();
}

}  // namespace hsflow

#ifndef HSFLOW_CSV_HPP_
#define HSFLOW_CSV_HPP_

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace hsflow {

// 17 significant digits, '.' decimal separator, locale independent.
std::string format_double(double v);

/// Minimal RFC-4180 table: header plus rows of already formatted cells.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells);
  void add_row(std::initializer_list<double> values);

  std::string str() const;
  void write(const std::filesystem::path& path) const;

  std::size_t row_count() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace hsflow

#endif  // HSFLOW_CSV_HPP_

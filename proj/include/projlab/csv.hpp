#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace projlab {

/// Formats a double with 17 significant digits ("nan", "inf", "-inf" for
/// non-finite values).
std::string format_double(double v);

/// Quotes a field if it contains a comma, quote or newline.
std::string csv_escape(std::string_view s);

/// Writes a CSV file row by row. Throws std::runtime_error if the file cannot
/// be opened.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  template <typename... Ts>
  void row(const Ts&... fields) {
    std::vector<std::string> cells;
    (cells.push_back(cell(fields)), ...);
    write_cells(cells);
  }

  void write_cells(const std::vector<std::string>& cells);
  const std::string& path() const { return path_; }

 private:
  template <typename T>
  static std::string cell(const T& v) {
    if constexpr (std::is_same_v<T, bool>) {
      return v ? "1" : "0";
    } else if constexpr (std::is_floating_point_v<T>) {
      return format_double(static_cast<double>(v));
    } else if constexpr (std::is_integral_v<T>) {
      return std::to_string(v);
    } else {
      return csv_escape(std::string_view(v));
    }
  }

  std::string path_;
  std::size_t columns_;
  std::ofstream out_;
};

/// Parsed CSV table (header plus rows of string cells).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws std::out_of_range naming the column.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

}  // namespace projlab

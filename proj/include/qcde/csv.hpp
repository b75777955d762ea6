#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qcde {

//! Numbers are written with 17 significant digits so they parse back
//! bit-exactly; an empty cell stands for an undefined value.
std::string format_number(double v);
std::string format_cell(const std::optional<double>& v);

struct CsvTable
{
  std::vector<std::string> header;
  std::vector<std::vector<std::optional<double>>> rows;

  //! Index of a header column; throws std::runtime_error when absent.
  std::size_t column(std::string_view name) const;
  //! All values of a column; throws if any cell is empty.
  std::vector<double> numeric_column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

//! Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content);

} // namespace qcde

#include "qcde/csv.hpp"

#include <fmt/format.h>

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qcde {

std::string format_number(double v)
{
  return fmt::format("{:.17g}", v);
}

std::string format_cell(const std::optional<double>& v)
{
  return v ? format_number(*v) : std::string();
}

std::size_t CsvTable::column(std::string_view name) const
{
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) {
      return i;
    }
  }
  throw std::runtime_error(fmt::format("csv: missing column '{}'", name));
}

std::vector<double> CsvTable::numeric_column(std::string_view name) const
{
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r][c]) {
      throw std::runtime_error(
        fmt::format("csv: empty '{}' cell on data row {}", name, r + 1));
    }
    out.push_back(*rows[r][c]);
  }
  return out;
}

namespace {

std::vector<std::string> split_line(std::string_view line)
{
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_cell(const std::string& cell, std::size_t line_no)
{
  if (cell.empty()) {
    return std::nullopt;
  }
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || errno == ERANGE) {
    throw std::runtime_error(
      fmt::format("csv: line {}: cannot parse '{}' as a number", line_no, cell));
  }
  return v;
}

} // namespace

CsvTable parse_csv(std::string_view text)
{
  CsvTable table;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      nl = text.size();
    }
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (line.empty()) {
      continue;
    }
    auto cells = split_line(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw std::runtime_error(
        fmt::format("csv: line {} has {} cells, header has {}",
                    line_no,
                    cells.size(),
                    table.header.size()));
    }
    std::vector<std::optional<double>> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      row.push_back(parse_cell(c, line_no));
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) {
    throw std::runtime_error("csv: missing header row");
  }
  return table;
}

std::string read_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable read_csv(const std::filesystem::path& path)
{
  return parse_csv(read_file(path));
}

void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content)
{
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot write '" + tmp.string() + "'");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

} // namespace qcde

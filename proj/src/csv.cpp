#include "ssm/csv.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ssm {

namespace {

std::string trim(const std::string& s) {
  size_t begin = 0, end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string lowercase(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_missing_token(const std::string& cell) {
  return cell.empty() || cell == "NaN" || cell == "NA";
}

double parse_cell(const std::string& cell, size_t line_number, const std::string& column) {
  if (is_missing_token(cell)) return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double value = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0')
    throw std::invalid_argument("line " + std::to_string(line_number) + ", column '" + column +
                                "': cannot parse '" + cell + "' as a number");
  return value;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "NaN";
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", x);
  return buffer;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw std::invalid_argument("cannot open '" + path.string() + "'");

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(file, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.size() < 2) throw std::invalid_argument("'" + path.string() + "' has no data rows");

  std::vector<std::string> header = split(lines.front());
  if (header.empty()) throw std::invalid_argument("'" + path.string() + "' has an empty header");

  CsvTable table;
  size_t first_data_column = 0;
  const std::string first = lowercase(header.front());
  if (first == "date" || first == "t") {
    table.label_column = header.front();
    first_data_column = 1;
  }
  for (size_t c = first_data_column; c < header.size(); ++c) table.columns.push_back(header[c]);
  if (table.columns.empty())
    throw std::invalid_argument("'" + path.string() + "' has no data columns");

  const size_t rows = lines.size() - 1;
  table.values.resize(static_cast<Index>(rows), static_cast<Index>(table.columns.size()));
  for (size_t row = 0; row < rows; ++row) {
    const size_t line_number = row + 2;
    std::vector<std::string> cells = split(lines[row + 1]);
    if (cells.size() != header.size())
      throw std::invalid_argument("line " + std::to_string(line_number) + " has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(header.size()));
    if (first_data_column == 1) table.labels.push_back(cells.front());
    for (size_t c = 0; c < table.columns.size(); ++c)
      table.values(static_cast<Index>(row), static_cast<Index>(c)) =
          parse_cell(cells[c + first_data_column], line_number, table.columns[c]);
  }
  return table;
}

ObservationSeries load_csv(const std::filesystem::path& path) {
  CsvTable table = read_csv(path);
  return ObservationSeries(std::move(table.values), std::move(table.columns),
                           std::move(table.labels),
                           table.label_column.empty() ? "t" : table.label_column);
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
               const Matrix& values, const std::string& label_column,
               const std::vector<std::string>& labels) {
  if (static_cast<Index>(columns.size()) != values.cols())
    throw std::invalid_argument("column count does not match the value matrix");
  const bool with_labels = !label_column.empty();
  if (with_labels && static_cast<Index>(labels.size()) != values.rows())
    throw std::invalid_argument("label count does not match the value matrix");

  std::ofstream file(path);
  if (!file) throw std::invalid_argument("cannot write '" + path.string() + "'");

  if (with_labels) file << label_column << (columns.empty() ? "" : ",");
  for (size_t c = 0; c < columns.size(); ++c) file << columns[c] << (c + 1 < columns.size() ? "," : "");
  file << '\n';
  for (Index row = 0; row < values.rows(); ++row) {
    if (with_labels) file << labels[static_cast<size_t>(row)] << (values.cols() ? "," : "");
    for (Index c = 0; c < values.cols(); ++c)
      file << format_double(values(row, c)) << (c + 1 < values.cols() ? "," : "");
    file << '\n';
  }
}

}  // namespace ssm

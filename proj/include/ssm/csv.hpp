#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ssm/model.hpp"

namespace ssm {

/// A parsed CSV: numeric columns plus an optional leading label column
/// (named "date" or "t") that is carried as text, not data.
struct CsvTable {
  std::vector<std::string> columns;  // numeric column names
  std::string label_column;          // empty when absent
  std::vector<std::string> labels;   // one per row when label_column is set
  Matrix values;                     // rows x columns; NaN for missing cells
};

/// Reads a CSV with a header row. Empty cells and the literal tokens "NaN"
/// and "NA" parse as missing. Throws on ragged rows (with the row number),
/// other non-numeric cells, or zero data columns.
CsvTable read_csv(const std::filesystem::path& path);

/// read_csv + wrap as an ObservationSeries.
ObservationSeries load_csv(const std::filesystem::path& path);

/// Writes a CSV with all numbers at 17 significant digits (round-trip exact
/// for double precision). NaN entries are written as "NaN". labels may be
/// empty, in which case only numeric columns are written.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
               const Matrix& values, const std::string& label_column = {},
               const std::vector<std::string>& labels = {});

/// "%.17g" rendering used for every numeric cell.
std::string format_double(double x);

}  // namespace ssm

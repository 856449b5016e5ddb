#pragma once

#include "benign/common.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace benign {

/// Rectangular numeric table with named columns. Missing cells (e.g. bound
/// terms when the critical index is infinite) stay empty in the CSV.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;

  int column_index(const std::string& name) const;  // -1 when absent
  void append_row(std::vector<std::optional<double>> row);
};

// RFC 4180: CRLF line endings, header row, 17 significant digits.
// Byte-identical output for equal tables.
void emit_csv(const Table& table, std::ostream& out);
void emit_csv(const Table& table, const std::string& path);

Table parse_csv(std::istream& in);
Table parse_csv_file(const std::string& path);

struct PlotOptions {
  bool log_x = false;
  bool log_y = false;
  std::string title;
  int width = 720;
  int height = 480;
  // Annotate each series with its least-squares slope in the plotted
  // coordinates (log-log slopes when both axes are logarithmic).
  bool annotate_slope = true;
};

// Standalone SVG line chart of y_cols against x_col; deterministic bytes for
// fixed inputs. Requires at least two rows with finite values.
void emit_plot(const Table& table, const std::string& x_col,
               const std::vector<std::string>& y_cols, const std::string& path,
               const PlotOptions& opts = {});
void emit_plot(const Table& table, const std::string& x_col,
               const std::vector<std::string>& y_cols, std::ostream& out,
               const PlotOptions& opts = {});

// Least-squares slope of y against x over rows where both are present.
double least_squares_slope(const Table& table, const std::string& x_col,
                           const std::string& y_col, bool log_x, bool log_y);

}  // namespace benign

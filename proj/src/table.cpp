#include "benign/table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace benign {

int Table::column_index(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

void Table::append_row(std::vector<std::optional<double>> row) {
  if (row.size() != columns.size())
    throw config_error("table: row width does not match columns");
  rows.push_back(std::move(row));
}

namespace {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\r\n") != std::string::npos;
}

std::string csv_field(const std::string& s) {
  if (!needs_quoting(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void emit_csv(const Table& table, std::ostream& out) {
  for (size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out << ',';
    out << csv_field(table.columns[i]);
  }
  out << "\r\n";
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      if (row[i].has_value()) out << format_value(*row[i]);
    }
    out << "\r\n";
  }
}

void emit_csv(const Table& table, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw config_error("emit_csv: cannot open '" + path + "' for writing");
  emit_csv(table, f);
  if (!f) throw config_error("emit_csv: write failed for '" + path + "'");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

Table parse_csv(std::istream& in) {
  Table table;
  std::string line;
  if (!std::getline(in, line)) return table;
  table.columns = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    std::vector<std::optional<double>> row;
    row.reserve(table.columns.size());
    for (const auto& f : fields) {
      if (f.empty())
        row.push_back(std::nullopt);
      else
        row.push_back(std::stod(f));
    }
    row.resize(table.columns.size());
    table.rows.push_back(std::move(row));
  }
  return table;
}

Table parse_csv_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw config_error("parse_csv: cannot open '" + path + "'");
  return parse_csv(f);
}

double least_squares_slope(const Table& table, const std::string& x_col,
                           const std::string& y_col, bool log_x, bool log_y) {
  const int xi = table.column_index(x_col);
  const int yi = table.column_index(y_col);
  if (xi < 0 || yi < 0) throw config_error("least_squares_slope: missing column");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long m = 0;
  for (const auto& row : table.rows) {
    if (!row[xi].has_value() || !row[yi].has_value()) continue;
    double x = *row[xi], y = *row[yi];
    if (log_x) {
      if (!(x > 0)) continue;
      x = std::log(x);
    }
    if (log_y) {
      if (!(y > 0)) continue;
      y = std::log(y);
    }
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) throw config_error("least_squares_slope: need >= 2 usable rows");
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0) throw numeric_error("least_squares_slope: degenerate x");
  return (m * sxy - sx * sy) / denom;
}

namespace {

struct AxisScale {
  double lo = 0, hi = 1;
  bool log = false;

  double to_unit(double v) const {
    const double a = log ? std::log10(lo) : lo;
    const double b = log ? std::log10(hi) : hi;
    const double x = log ? std::log10(v) : v;
    return b > a ? (x - a) / (b - a) : 0.5;
  }
};

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

const char* kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                               "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

void emit_plot(const Table& table, const std::string& x_col,
               const std::vector<std::string>& y_cols, std::ostream& out,
               const PlotOptions& opts) {
  const int xi = table.column_index(x_col);
  if (xi < 0) throw config_error("emit_plot: missing x column '" + x_col + "'");
  std::vector<int> yis;
  for (const auto& c : y_cols) {
    int idx = table.column_index(c);
    if (idx < 0) throw config_error("emit_plot: missing y column '" + c + "'");
    yis.push_back(idx);
  }
  if (yis.empty()) throw config_error("emit_plot: no y columns");

  // Collect usable points per series.
  std::vector<std::vector<std::pair<double, double>>> series(yis.size());
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool any = false;
  for (const auto& row : table.rows) {
    if (!row[xi].has_value()) continue;
    const double x = *row[xi];
    if (opts.log_x && !(x > 0)) continue;
    for (size_t s = 0; s < yis.size(); ++s) {
      if (!row[yis[s]].has_value()) continue;
      const double y = *row[yis[s]];
      if (opts.log_y && !(y > 0)) continue;
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      series[s].emplace_back(x, y);
      if (!any) {
        xmin = xmax = x;
        ymin = ymax = y;
        any = true;
      } else {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
  }
  size_t total = 0;
  for (const auto& s : series) total += s.size();
  if (!any || total < 2) throw config_error("emit_plot: need >= 2 data points");
  if (xmin == xmax) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymin == ymax) {
    ymin = ymin - (ymin != 0 ? std::abs(ymin) * 0.5 : 0.5);
    ymax = ymax + (ymax != 0 ? std::abs(ymax) * 0.5 : 0.5);
  }

  AxisScale xs{xmin, xmax, opts.log_x};
  AxisScale ys{ymin, ymax, opts.log_y};
  const int W = opts.width, H = opts.height;
  const int ml = 72, mr = 24, mt = opts.title.empty() ? 24 : 44, mb = 48;
  auto px = [&](double x) { return ml + xs.to_unit(x) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - ys.to_unit(y) * (H - mt - mb); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  if (!opts.title.empty())
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">"
        << opts.title << "</text>\n";

  // Frame and ticks.
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
      << "\" height=\"" << H - mt - mb
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  const int nticks = 5;
  for (int i = 0; i <= nticks; ++i) {
    const double f = static_cast<double>(i) / nticks;
    double xv = opts.log_x
                    ? std::pow(10.0, std::log10(xmin) +
                                         f * (std::log10(xmax) - std::log10(xmin)))
                    : xmin + f * (xmax - xmin);
    double yv = opts.log_y
                    ? std::pow(10.0, std::log10(ymin) +
                                         f * (std::log10(ymax) - std::log10(ymin)))
                    : ymin + f * (ymax - ymin);
    out << "<line x1=\"" << short_num(px(xv)) << "\" y1=\"" << H - mb
        << "\" x2=\"" << short_num(px(xv)) << "\" y2=\"" << H - mb + 5
        << "\" stroke=\"#333333\"/>\n";
    out << "<text x=\"" << short_num(px(xv)) << "\" y=\"" << H - mb + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << short_num(xv) << "</text>\n";
    out << "<line x1=\"" << ml - 5 << "\" y1=\"" << short_num(py(yv))
        << "\" x2=\"" << ml << "\" y2=\"" << short_num(py(yv))
        << "\" stroke=\"#333333\"/>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << short_num(py(yv) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << short_num(yv) << "</text>\n";
  }
  out << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">"
      << x_col << (opts.log_x ? " (log)" : "") << "</text>\n";

  // Series.
  for (size_t s = 0; s < series.size(); ++s) {
    if (series[s].empty()) continue;
    const char* color = kSeriesColors[s % 8];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[s])
      out << short_num(px(x)) << "," << short_num(py(y)) << " ";
    out << "\"/>\n";
    for (const auto& [x, y] : series[s])
      out << "<circle cx=\"" << short_num(px(x)) << "\" cy=\""
          << short_num(py(y)) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    std::string label = y_cols[s];
    if (opts.annotate_slope && series[s].size() >= 2) {
      try {
        double slope =
            least_squares_slope(table, x_col, y_cols[s], opts.log_x, opts.log_y);
        label += " (slope ";
        label += short_num(slope);
        label += ")";
      } catch (const std::exception&) {
        // not enough usable points in plotted coordinates
      }
    }
    out << "<text x=\"" << ml + 8 << "\" y=\"" << mt + 16 + 16 * s
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color
        << "\">" << label << "</text>\n";
  }
  out << "</svg>\n";
}

void emit_plot(const Table& table, const std::string& x_col,
               const std::vector<std::string>& y_cols, const std::string& path,
               const PlotOptions& opts) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw config_error("emit_plot: cannot open '" + path + "'");
  emit_plot(table, x_col, y_cols, f, opts);
  if (!f) throw config_error("emit_plot: write failed for '" + path + "'");
}

}  // namespace benign

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hdisp {

// Round-trip exact text for a double ("%.17g"), so identical values always
// produce identical bytes.
std::string format_number(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);
  CsvTable& row(std::vector<std::string> cells);
  CsvTable& row(const std::vector<double>& cells);
  std::string str() const;
  void write(const std::filesystem::path& path) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

// Scatter plot with an optional fitted line, drawn in log or linear axes.
struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = true;
  bool log_y = true;
  std::vector<double> x, y;            // data points
  std::vector<double> fit_x, fit_y;    // polyline, same coordinates as the data
  std::string annotation;              // e.g. "slope -0.501 +/- 0.004"
};

std::string render_svg(const PlotSpec& plot);
void write_svg(const std::filesystem::path& path, const PlotSpec& plot);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace hdisp

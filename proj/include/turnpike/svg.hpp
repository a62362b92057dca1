#pragma once

#include <optional>
#include <string>
#include <vector>

namespace turnpike {

/// Minimal self-contained SVG line plot: inline styling, auto-scaled axes,
/// optional horizontal reference line for the desired level.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label);

  void add_series(std::string label, const std::vector<double>& x, const std::vector<double>& y);
  void set_reference_level(double y, std::string label);
  void write(const std::string& path) const;

 private:
  struct Series {
    std::string label;
    std::vector<double> x, y;
  };
  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
  std::optional<double> reference_;
  std::string reference_label_;
};

}  // namespace turnpike

#pragma once

#include <string>
#include <vector>

namespace turnpike {

/// Column-oriented CSV writer; floats are printed with 17 significant
/// digits so values round-trip exactly.
class CsvWriter {
 public:
  void add_column(std::string name, std::vector<double> values);
  void add_text_column(std::string name, std::vector<std::string> values);
  void write(const std::string& path) const;

 private:
  struct Column {
    std::string name;
    std::vector<std::string> cells;
  };
  std::vector<Column> columns_;
};

std::string format_double(double v);

}  // namespace turnpike

#include "turnpike/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace turnpike {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void CsvWriter::add_column(std::string name, std::vector<double> values) {
  Column col;
  col.name = std::move(name);
  col.cells.reserve(values.size());
  for (double v : values) col.cells.push_back(format_double(v));
  columns_.push_back(std::move(col));
}

void CsvWriter::add_text_column(std::string name, std::vector<std::string> values) {
  columns_.push_back(Column{std::move(name), std::move(values)});
}

void CsvWriter::write(const std::string& path) const {
  if (columns_.empty()) throw std::invalid_argument("CsvWriter: no columns");
  const size_t rows = columns_.front().cells.size();
  for (const Column& c : columns_) {
    if (c.cells.size() != rows) throw std::invalid_argument("CsvWriter: ragged columns");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("CsvWriter: cannot open " + path);
  for (size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i].name;
  out << "\n";
  for (size_t r = 0; r < rows; ++r) {
    for (size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i].cells[r];
    out << "\n";
  }
}

}  // namespace turnpike

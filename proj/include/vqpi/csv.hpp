#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vqpi {

// Formats a double with enough digits to round-trip typical experiment
// outputs while staying readable. Locale-independent.
inline std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) {
    if (row.size() != columns.size())
      throw std::invalid_argument("CsvTable: row width does not match header");
    rows.push_back(std::move(row));
  }

  // Writes to a temporary file in the same directory, then renames it into
  // place so readers never observe a half-written table.
  void write(const std::string& path) const {
    std::filesystem::path target(path);
    if (target.has_parent_path())
      std::filesystem::create_directories(target.parent_path());
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
      std::ofstream out(tmp);
      if (!out) throw std::runtime_error("CsvTable: cannot open " + tmp.string());
      out << join(columns) << '\n';
      for (const auto& row : rows) out << join(row) << '\n';
      if (!out) throw std::runtime_error("CsvTable: write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
  }

  static CsvTable read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("CsvTable: cannot open " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line))
      throw std::runtime_error("CsvTable: empty file " + path);
    table.columns = split(line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto row = split(line);
      if (row.size() != table.columns.size())
        throw std::runtime_error("CsvTable: ragged row in " + path);
      table.rows.push_back(std::move(row));
    }
    return table;
  }

  int column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return static_cast<int>(i);
    throw std::invalid_argument("CsvTable: no column named " + name);
  }

 private:
  static std::string join(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    return out;
  }

  static std::vector<std::string> split(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  }
};

}  // namespace vqpi

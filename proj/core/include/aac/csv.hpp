#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace aac {

// Shortest round-trip decimal form; identical bytes for identical doubles.
std::string format_double(double v);

// RFC-style quoting: fields containing comma, quote, or newline are wrapped
// in double quotes with inner quotes doubled.
std::string csv_escape(const std::string& field);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void write_row(const std::vector<std::string>& fields);
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
  std::size_t width_;
};

// Minimal reader for our own output: header row plus quoted fields.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  static CsvTable read_file(const std::string& path);
  int column(const std::string& name) const;  // -1 when absent
};

}  // namespace aac

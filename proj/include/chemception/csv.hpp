#pragma once

#include <string>
#include <vector>

namespace chemception {

// Comma-delimited, UTF-8, header row required. Double quotes protect commas
// and embedded quotes double up. Good enough for the public benchmark files.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);
std::vector<std::string> split_csv_line(const std::string& line);
std::string csv_escape(const std::string& field);

}  // namespace chemception

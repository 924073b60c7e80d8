#pragma once

#include <string>
#include <vector>

namespace chppi {

// Delimited-text plumbing. Writers are deterministic: doubles use the
// shortest round-trip decimal form, row order is the caller's, newline is
// always '\n'.

std::string format_double(double v);          // "inf"/"-inf" for infinities, "" for NaN
double parse_double(const std::string& s);    // inverse of format_double

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Throws parse on missing files, empty files, or ragged rows.
CsvTable read_csv(const std::string& path);

// Throws parse unless the header matches exactly.
void expect_header(const CsvTable& t, const std::vector<std::string>& expected,
                   const std::string& what);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

bool file_exists(const std::string& path);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace chppi

// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef SMM_CORE_CSV_HPP
#define SMM_CORE_CSV_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace smm {

// Minimal RFC-4180 CSV support: comma separated, double-quote quoting with
// "" escapes, quoted fields may contain commas and newlines. Input may use
// LF or CRLF line endings; output always uses LF.

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based file line of each row (header is line 1), for error reporting.
  std::vector<size_t> row_lines;
};

CsvTable read_csv(const std::string& path);

std::string csv_escape(const std::string& field);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace smm

#endif  // SMM_CORE_CSV_HPP

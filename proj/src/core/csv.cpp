// Apache License, Version 2.0, refer to LICENSE.txt

#include "core/csv.hpp"

#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace smm {

namespace {

// Parses one record starting at position `pos`. Advances pos past the
// record's trailing newline and counts lines consumed (quoted fields may
// span lines).
std::vector<std::string> parse_record(const std::string& text, size_t& pos,
                                      size_t& line, const std::string& path) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool done = false;
  while (!done) {
    if (pos >= text.size()) {
      if (in_quotes) {
        throw data_error(path + ": unterminated quoted field at line " +
                         std::to_string(line));
      }
      break;
    }
    char c = text[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field.push_back('"');
          pos += 2;
        } else {
          in_quotes = false;
          ++pos;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
        ++pos;
      }
    } else {
      switch (c) {
        case '"':
          in_quotes = true;
          ++pos;
          break;
        case ',':
          fields.push_back(std::move(field));
          field.clear();
          ++pos;
          break;
        case '\r':
          ++pos;
          break;
        case '\n':
          ++pos;
          ++line;
          done = true;
          break;
        default:
          field.push_back(c);
          ++pos;
      }
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  if (text.empty()) throw data_error(path + ": empty file");

  CsvTable table;
  size_t pos = 0;
  size_t line = 1;
  table.header = parse_record(text, pos, line, path);
  while (pos < text.size()) {
    size_t record_line = line;
    auto fields = parse_record(text, pos, line, path);
    // A trailing newline produces one empty record; skip blank lines.
    if (fields.size() == 1 && fields[0].empty()) continue;
    table.rows.push_back(std::move(fields));
    table.row_lines.push_back(record_line);
  }
  return table;
}

std::string csv_escape(const std::string& field) {
  bool needs_quote = field.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs_quote) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(fields[i]);
  }
  out << '\n';
}

}  // namespace smm

#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "prl/error.hpp"

namespace prl::csv {

// Splits one line of delimiter-separated text. Double quotes may wrap a cell;
// a doubled quote inside a quoted cell is a literal quote. Quoted cells cannot
// span lines.
inline std::vector<std::string> split_line(std::string_view line, char delimiter) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delimiter) {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  if (quoted) throw ValidationError("unterminated quoted cell");
  cells.push_back(std::move(cell));
  return cells;
}

inline bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
};

// Reads a whole file with a header row. Blank lines are skipped; rows whose
// cell count differs from the header are rejected.
inline Table read_table(const std::string& path, char delimiter = ',') {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  Table table;
  std::string line;
  if (!read_line(in, line)) throw ValidationError("'" + path + "' is empty (missing header)");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  table.header = split_line(line, delimiter);
  std::size_t line_no = 1;
  while (read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split_line(line, delimiter);
    if (cells.size() != table.header.size())
      throw ValidationError("'" + path + "' line " + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header.size()) + " cells, found " +
                            std::to_string(cells.size()));
    table.rows.push_back(std::move(cells));
  }
  return table;
}

template <class T>
T parse_number(std::string_view text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ValidationError("not a number: '" + std::string(text) + "'");
  return value;
}

// Shortest representation that round-trips; stable across runs.
inline std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

inline std::string quote(std::string_view cell, char delimiter = ',') {
  if (cell.find_first_of(std::string{delimiter, '"', '\n', '\r'}) == std::string_view::npos)
    return std::string(cell);
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

class Writer {
 public:
  explicit Writer(std::ostream& out, char delimiter = ',') : out_(out), delimiter_(delimiter) {}

  Writer& cell(std::string_view s) {
    sep();
    out_ << quote(s, delimiter_);
    return *this;
  }
  Writer& cell(double x) {
    sep();
    out_ << format_double(x);
    return *this;
  }
  Writer& cell(std::int64_t x) {
    sep();
    out_ << x;
    return *this;
  }
  Writer& cell(std::size_t x) {
    sep();
    out_ << x;
    return *this;
  }
  Writer& cell(int x) { return cell(static_cast<std::int64_t>(x)); }
  Writer& cell(std::uint32_t x) { return cell(static_cast<std::int64_t>(x)); }
  Writer& empty() {
    sep();
    return *this;
  }
  void end_row() {
    out_ << '\n';
    first_ = true;
  }
  template <class... Cells>
  void row(const Cells&... cells) {
    (cell(cells), ...);
    end_row();
  }

 private:
  void sep() {
    if (!first_) out_ << delimiter_;
    first_ = false;
  }

  std::ostream& out_;
  char delimiter_;
  bool first_ = true;
};

}  // namespace prl::csv

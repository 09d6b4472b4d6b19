#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "prl/csv.hpp"
#include "prl/error.hpp"

namespace prl {

enum class FileId { A, B };

struct Record {
  std::size_t record_index = 0;
  // Empty cells are stored as std::nullopt.
  std::vector<std::optional<std::string>> fields;
  std::optional<std::string> blocking_key;
};

struct RecordFile {
  FileId file_id = FileId::A;
  std::vector<std::string> header;
  std::vector<Record> records;

  std::size_t size() const { return records.size(); }
  std::size_t arity() const { return header.size(); }

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
};

struct LoadOptions {
  char delimiter = ',';
  // Column whose values must be unique record identifiers.
  std::optional<std::string> id_column;
  // Column copied into Record::blocking_key.
  std::optional<std::string> blocking_column;
};

inline RecordFile make_record_file(FileId id, std::vector<std::string> header,
                                   std::vector<std::vector<std::string>> rows,
                                   const LoadOptions& options = {}) {
  RecordFile file;
  file.file_id = id;
  file.header = std::move(header);

  std::optional<std::size_t> id_col;
  if (options.id_column) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < file.header.size(); ++i) {
      if (file.header[i] == *options.id_column) {
        id_col = i;
        ++hits;
      }
    }
    if (hits == 0) throw ValidationError("id column '" + *options.id_column + "' not found");
    if (hits > 1) throw ValidationError("id column '" + *options.id_column + "' appears twice");
  }
  std::optional<std::size_t> key_col;
  if (options.blocking_column) {
    key_col = file.column(*options.blocking_column);
    if (!key_col)
      throw ValidationError("blocking key column '" + *options.blocking_column + "' not found");
  }

  std::set<std::string> seen_ids;
  file.records.reserve(rows.size());
  for (auto& row : rows) {
    if (row.size() != file.header.size())
      throw ValidationError("ragged row " + std::to_string(file.records.size()));
    Record rec;
    rec.record_index = file.records.size();
    if (id_col && !seen_ids.insert(row[*id_col]).second)
      throw ValidationError("duplicate id '" + row[*id_col] + "'");
    if (key_col) rec.blocking_key = row[*key_col];
    rec.fields.reserve(row.size());
    for (auto& cell : row) {
      if (cell.empty())
        rec.fields.emplace_back(std::nullopt);
      else
        rec.fields.emplace_back(std::move(cell));
    }
    file.records.push_back(std::move(rec));
  }
  return file;
}

inline RecordFile load_records(const std::string& path, FileId id, const LoadOptions& options = {}) {
  auto table = csv::read_table(path, options.delimiter);
  return make_record_file(id, std::move(table.header), std::move(table.rows), options);
}

inline void write_records(std::ostream& out, const RecordFile& file) {
  csv::Writer w(out);
  for (const auto& h : file.header) w.cell(h);
  w.end_row();
  for (const auto& rec : file.records) {
    for (const auto& f : rec.fields) {
      if (f)
        w.cell(*f);
      else
        w.empty();
    }
    w.end_row();
  }
}

}  // namespace prl

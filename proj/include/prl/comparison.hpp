#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "prl/csv.hpp"
#include "prl/error.hpp"
#include "prl/levenshtein.hpp"
#include "prl/parallel.hpp"
#include "prl/records.hpp"

namespace prl {

enum class ComparatorKind { exact, levenshtein };

// One field of the comparison vector. Levels are 1-based; higher means
// stronger agreement. When `missing_level` is set, one extra level
// (agreement_levels() + 1) is appended for pairs where either value is empty.
struct FieldComparator {
  std::string column;
  std::size_t column_index = 0;
  ComparatorKind kind = ComparatorKind::exact;
  // Upper bin edges on normalized distance, strictly increasing, ending at 1.
  // The first bin (distance <= cut_points[0]) is the highest agreement level.
  std::vector<double> cut_points;
  bool missing_level = false;

  int agreement_levels() const {
    return kind == ComparatorKind::exact ? 2 : static_cast<int>(cut_points.size());
  }
  int levels() const { return agreement_levels() + (missing_level ? 1 : 0); }
  int missing_code() const { return agreement_levels() + 1; }
};

class ComparisonSchema {
 public:
  ComparisonSchema() = default;
  explicit ComparisonSchema(std::vector<FieldComparator> fields) : fields_(std::move(fields)) {
    validate();
  }

  // Levels used by the simulation study: exact, (0,.25], (.25,.5], (.5,1].
  static std::vector<double> four_level_cuts() { return {0.0, 0.25, 0.5, 1.0}; }

  void validate() const {
    if (fields_.empty()) throw ValidationError("comparison schema has no fields");
    for (const auto& f : fields_) {
      if (f.kind == ComparatorKind::levenshtein) {
        const auto& c = f.cut_points;
        if (c.size() < 2)
          throw ValidationError("field '" + f.column + "': need at least two cut points");
        if (c.front() < 0.0) throw ValidationError("field '" + f.column + "': negative cut point");
        for (std::size_t i = 1; i < c.size(); ++i)
          if (!(c[i] > c[i - 1]))
            throw ValidationError("field '" + f.column + "': cut points must be strictly increasing");
        if (c.back() != 1.0)
          throw ValidationError("field '" + f.column + "': last cut point must be 1.0");
      }
      if (f.levels() > 255) throw ValidationError("field '" + f.column + "': too many levels");
    }
  }

  // Resolves column names against a file header.
  void bind(const std::vector<std::string>& header) {
    for (auto& f : fields_) {
      auto it = std::find(header.begin(), header.end(), f.column);
      if (it == header.end()) throw ValidationError("schema column '" + f.column + "' not in header");
      f.column_index = static_cast<std::size_t>(it - header.begin());
    }
  }

  std::size_t size() const { return fields_.size(); }
  const std::vector<FieldComparator>& fields() const { return fields_; }
  const FieldComparator& operator[](std::size_t j) const { return fields_[j]; }

  std::vector<int> level_counts() const {
    std::vector<int> k;
    for (const auto& f : fields_) k.push_back(f.levels());
    return k;
  }
  std::vector<int> agreement_level_counts() const {
    std::vector<int> k;
    for (const auto& f : fields_) k.push_back(f.agreement_levels());
    return k;
  }

 private:
  std::vector<FieldComparator> fields_;
};

struct ComparisonPattern {
  std::vector<std::uint8_t> levels;

  std::size_t size() const { return levels.size(); }
  int operator[](std::size_t j) const { return levels[j]; }
  auto operator<=>(const ComparisonPattern&) const = default;
  bool operator==(const ComparisonPattern&) const = default;
};

struct PatternHash {
  std::size_t operator()(const ComparisonPattern& p) const {
    std::size_t h = 1469598103934665603ull;
    for (auto l : p.levels) h = (h ^ l) * 1099511628211ull;
    return h;
  }
};

// Level of one normalized distance under a set of cut points. A distance
// equal to a cut point falls in the lower-distance bin.
inline int distance_level(double distance, std::span<const double> cut_points) {
  const int bins = static_cast<int>(cut_points.size());
  for (int i = 0; i < bins; ++i)
    if (distance <= cut_points[i]) return bins - i;
  return 1;
}

inline int compare_values(std::string_view x, std::string_view y, const FieldComparator& f) {
  if (f.kind == ComparatorKind::exact) return normalize_text(x) == normalize_text(y) ? 2 : 1;
  return distance_level(normalized_levenshtein(x, y), f.cut_points);
}

inline int compare_values(const std::optional<std::string>& x, const std::optional<std::string>& y,
                          const FieldComparator& f) {
  if ((!x || !y) && f.missing_level) return f.missing_code();
  // Without a missing level an empty value compares as the empty string.
  return compare_values(std::string_view(x ? *x : std::string()), std::string_view(y ? *y : std::string()), f);
}

inline ComparisonPattern compare_pair(const Record& a, const Record& b, const ComparisonSchema& schema) {
  if (a.fields.size() != b.fields.size())
    throw ValidationError("record arity mismatch: " + std::to_string(a.fields.size()) + " vs " +
                          std::to_string(b.fields.size()));
  ComparisonPattern p;
  p.levels.reserve(schema.size());
  for (const auto& f : schema.fields()) {
    if (f.column_index >= a.fields.size())
      throw ValidationError("schema column '" + f.column + "' beyond record arity");
    p.levels.push_back(static_cast<std::uint8_t>(
        compare_values(a.fields[f.column_index], b.fields[f.column_index], f)));
  }
  return p;
}

struct RecordPair {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  auto operator<=>(const RecordPair&) const = default;
};

// Records sharing one blocking key. Its candidate pairs are the full cross
// product a_members x b_members, stored row-major from `offset`.
struct PairGroup {
  std::string key;
  std::vector<std::uint32_t> a_members;
  std::vector<std::uint32_t> b_members;
  std::size_t offset = 0;

  std::size_t pair_count() const { return a_members.size() * b_members.size(); }
};

class CandidatePairSet {
 public:
  CandidatePairSet() = default;
  CandidatePairSet(std::size_t n_a, std::size_t n_b, std::vector<PairGroup> groups)
      : n_a_(n_a), n_b_(n_b), groups_(std::move(groups)) {
    std::size_t offset = 0;
    for (auto& g : groups_) {
      g.offset = offset;
      for (auto a : g.a_members)
        for (auto b : g.b_members) pairs_.push_back({a, b});
      offset += g.pair_count();
    }
  }

  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  std::size_t n_a() const { return n_a_; }
  std::size_t n_b() const { return n_b_; }
  const std::vector<PairGroup>& groups() const { return groups_; }
  const std::vector<RecordPair>& pairs() const { return pairs_; }
  const RecordPair& operator[](std::size_t i) const { return pairs_[i]; }

  std::size_t index_of(const PairGroup& g, std::size_t row, std::size_t col) const {
    return g.offset + row * g.b_members.size() + col;
  }

  // Pair index of (a, b), if it is a candidate.
  std::optional<std::size_t> find(std::uint32_t a, std::uint32_t b) const {
    if (lookup_.empty() && !pairs_.empty()) build_lookup();
    auto it = lookup_.find(key(a, b));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

 private:
  static std::uint64_t key(std::uint32_t a, std::uint32_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }
  void build_lookup() const {
    lookup_.reserve(pairs_.size());
    for (std::size_t i = 0; i < pairs_.size(); ++i) lookup_.emplace(key(pairs_[i].a, pairs_[i].b), i);
  }

  std::size_t n_a_ = 0;
  std::size_t n_b_ = 0;
  std::vector<PairGroup> groups_;
  std::vector<RecordPair> pairs_;
  mutable std::unordered_map<std::uint64_t, std::size_t> lookup_;
};

// Without a blocking column every A x B pair is a candidate. With one, only
// pairs whose records carry equal keys are kept, grouped by key in key order.
inline CandidatePairSet build_candidate_pairs(const RecordFile& file_a, const RecordFile& file_b,
                                              const std::optional<std::string>& blocking_column = {}) {
  std::vector<PairGroup> groups;
  if (!blocking_column) {
    PairGroup g;
    for (std::uint32_t i = 0; i < file_a.size(); ++i) g.a_members.push_back(i);
    for (std::uint32_t i = 0; i < file_b.size(); ++i) g.b_members.push_back(i);
    if (g.pair_count() > 0) groups.push_back(std::move(g));
    return CandidatePairSet(file_a.size(), file_b.size(), std::move(groups));
  }
  auto col_a = file_a.column(*blocking_column);
  auto col_b = file_b.column(*blocking_column);
  if (!col_a || !col_b) throw ValidationError("blocking key column '" + *blocking_column + "' absent");
  auto key_of = [](const Record& r, std::size_t col) -> std::optional<std::string> {
    if (r.blocking_key) return r.blocking_key;
    return r.fields[col];
  };
  std::map<std::string, PairGroup> by_key;
  for (const auto& r : file_a.records)
    if (auto k = key_of(r, *col_a)) by_key[*k].a_members.push_back(static_cast<std::uint32_t>(r.record_index));
  for (const auto& r : file_b.records)
    if (auto k = key_of(r, *col_b)) {
      auto it = by_key.find(*k);
      if (it != by_key.end()) it->second.b_members.push_back(static_cast<std::uint32_t>(r.record_index));
    }
  for (auto& [k, g] : by_key) {
    if (g.pair_count() == 0) continue;
    g.key = k;
    groups.push_back(std::move(g));
  }
  return CandidatePairSet(file_a.size(), file_b.size(), std::move(groups));
}

inline std::vector<ComparisonPattern> compare_pairs(const CandidatePairSet& pairs, const RecordFile& file_a,
                                                    const RecordFile& file_b, const ComparisonSchema& schema,
                                                    int workers = 1) {
  std::vector<ComparisonPattern> out(pairs.size());
  constexpr std::size_t chunk = 4096;
  const std::size_t chunks = (pairs.size() + chunk - 1) / chunk;
  parallel_for(chunks, workers, [&](std::size_t c) {
    const std::size_t end = std::min(pairs.size(), (c + 1) * chunk);
    for (std::size_t i = c * chunk; i < end; ++i)
      out[i] = compare_pair(file_a.records[pairs[i].a], file_b.records[pairs[i].b], schema);
  });
  return out;
}

// Unique comparison patterns (sorted) with their counts, plus the pattern id
// of every candidate pair.
struct PatternTable {
  std::vector<int> level_counts;
  std::vector<ComparisonPattern> patterns;
  std::vector<std::int64_t> counts;
  std::vector<std::uint32_t> pair_pattern;
  std::int64_t total_pairs = 0;

  std::size_t size() const { return patterns.size(); }
  std::size_t fields() const { return level_counts.size(); }

  // Per field and level, how many pairs show that level.
  std::vector<std::vector<std::int64_t>> level_totals() const {
    std::vector<std::vector<std::int64_t>> t;
    for (int k : level_counts) t.emplace_back(static_cast<std::size_t>(k), 0);
    for (std::size_t g = 0; g < patterns.size(); ++g)
      for (std::size_t j = 0; j < t.size(); ++j) t[j][patterns[g][j] - 1] += counts[g];
    return t;
  }
};

inline PatternTable aggregate_patterns(const CandidatePairSet& pairs, std::span<const ComparisonPattern> per_pair,
                                       std::vector<int> level_counts) {
  if (per_pair.size() != pairs.size())
    throw ValidationError("aggregate_patterns: one pattern per candidate pair required");
  PatternTable t;
  t.level_counts = std::move(level_counts);
  std::map<ComparisonPattern, std::int64_t> counts;
  for (const auto& p : per_pair) {
    if (p.size() != t.level_counts.size()) throw ValidationError("pattern length does not match schema");
    for (std::size_t j = 0; j < p.size(); ++j)
      if (p[j] < 1 || p[j] > t.level_counts[j]) throw ValidationError("pattern level out of range");
    ++counts[p];
  }
  std::unordered_map<ComparisonPattern, std::uint32_t, PatternHash> id;
  for (auto& [p, c] : counts) {
    id.emplace(p, static_cast<std::uint32_t>(t.patterns.size()));
    t.patterns.push_back(p);
    t.counts.push_back(c);
  }
  t.pair_pattern.reserve(per_pair.size());
  for (const auto& p : per_pair) t.pair_pattern.push_back(id.at(p));
  t.total_pairs = static_cast<std::int64_t>(per_pair.size());
  return t;
}

inline PatternTable aggregate_patterns(const CandidatePairSet& pairs, std::span<const ComparisonPattern> per_pair,
                                       const ComparisonSchema& schema) {
  return aggregate_patterns(pairs, per_pair, schema.level_counts());
}

// Columns level_1..level_d,count.
inline void write_pattern_table(std::ostream& out, const PatternTable& t) {
  csv::Writer w(out);
  for (std::size_t j = 0; j < t.fields(); ++j) w.cell("level_" + std::to_string(j + 1));
  w.cell("count");
  w.end_row();
  for (std::size_t g = 0; g < t.size(); ++g) {
    for (std::size_t j = 0; j < t.fields(); ++j) w.cell(t.patterns[g][j]);
    w.cell(t.counts[g]);
    w.end_row();
  }
}

}  // namespace prl

#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "prl/csv.hpp"
#include "prl/error.hpp"

namespace prl {

struct Link {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  auto operator<=>(const Link&) const = default;
};

// Set of links between files A and B in which every record appears at most
// once. Links are kept sorted.
class Matching {
 public:
  Matching() = default;
  Matching(std::size_t n_a, std::size_t n_b, std::vector<Link> links = {}) : n_a_(n_a), n_b_(n_b), links_(std::move(links)) {
    std::sort(links_.begin(), links_.end());
    std::vector<char> used_a(n_a, 0), used_b(n_b, 0);
    for (const auto& l : links_) {
      if (l.a >= n_a || l.b >= n_b)
        throw ValidationError("link (" + std::to_string(l.a) + "," + std::to_string(l.b) + ") out of range");
      if (used_a[l.a]++ || used_b[l.b]++)
        throw ValidationError("matching is not one-to-one at (" + std::to_string(l.a) + "," + std::to_string(l.b) + ")");
    }
  }

  std::size_t n_a() const { return n_a_; }
  std::size_t n_b() const { return n_b_; }
  std::size_t size() const { return links_.size(); }
  bool empty() const { return links_.empty(); }
  const std::vector<Link>& links() const { return links_; }
  auto begin() const { return links_.begin(); }
  auto end() const { return links_.end(); }

  bool contains(Link l) const { return std::binary_search(links_.begin(), links_.end(), l); }

  bool operator==(const Matching& o) const { return links_ == o.links_ && n_a_ == o.n_a_ && n_b_ == o.n_b_; }

 private:
  std::size_t n_a_ = 0;
  std::size_t n_b_ = 0;
  std::vector<Link> links_;
};

inline std::size_t intersection_size(const Matching& x, const Matching& y) {
  std::size_t n = 0;
  for (const auto& l : x)
    if (y.contains(l)) ++n;
  return n;
}

// Columns a_index,b_index,weight. `weights` is parallel to the links, or
// empty to leave the weight column blank.
inline void write_matching(std::ostream& out, const Matching& m, std::span<const double> weights = {}) {
  csv::Writer w(out);
  w.row("a_index", "b_index", "weight");
  for (std::size_t i = 0; i < m.size(); ++i) {
    w.cell(m.links()[i].a).cell(m.links()[i].b);
    if (i < weights.size())
      w.cell(weights[i]);
    else
      w.empty();
    w.end_row();
  }
}

inline Matching read_matching(const std::string& path, std::size_t n_a, std::size_t n_b) {
  auto t = csv::read_table(path);
  auto ca = t.column("a_index");
  auto cb = t.column("b_index");
  if (!ca || !cb) throw ValidationError("'" + path + "' lacks a_index/b_index columns");
  std::vector<Link> links;
  for (const auto& r : t.rows)
    links.push_back({csv::parse_number<std::uint32_t>(r[*ca]), csv::parse_number<std::uint32_t>(r[*cb])});
  return Matching(n_a, n_b, std::move(links));
}

}  // namespace prl

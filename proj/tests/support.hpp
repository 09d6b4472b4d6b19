#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "prl/prl.hpp"

namespace support {

// A single-group candidate set over rows x cols in which every pair has its
// own pattern, and params giving pair (i, j) the weight w(i, j) exactly up to
// a shared constant that is folded into the returned offset:
// fitted weight = w(i, j) + offset.
struct MatrixProblem {
  prl::CandidatePairSet pairs;
  prl::PatternTable table;
  prl::MixtureParams params;
  double offset = 0.0;
};

inline MatrixProblem matrix_problem(const prl::WeightMatrix& w) {
  MatrixProblem p;
  prl::PairGroup g;
  for (std::uint32_t i = 0; i < w.rows(); ++i) g.a_members.push_back(i);
  for (std::uint32_t j = 0; j < w.cols(); ++j) g.b_members.push_back(j);
  p.pairs = prl::CandidatePairSet(w.rows(), w.cols(), {g});
  // One level per pair plus an unused last level, so even a 1 x 1 problem
  // has the two levels a field needs.
  const int k = static_cast<int>(w.rows() * w.cols());
  std::vector<prl::ComparisonPattern> per_pair;
  for (int x = 0; x < k; ++x) per_pair.push_back({{static_cast<std::uint8_t>(x + 1)}});
  p.table = prl::aggregate_patterns(p.pairs, per_pair, std::vector<int>{k + 1});
  double z = 0.0;
  for (double x : w.data()) z += std::exp(x);
  const double kk = k + 1.0;
  std::vector<double> m, u(static_cast<std::size_t>(k + 1), 1.0 / kk);
  for (double x : w.data()) m.push_back(std::exp(x) / z * (1.0 - 1.0 / kk));
  m.push_back(1.0 / kk);
  p.params.m = {m};
  p.params.u = {u};
  p.offset = std::log(static_cast<double>(k) / z);
  return p;
}

inline prl::WeightMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  prl::WeightMatrix w(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) w(i, j) = d(rng);
  return w;
}

// Pattern table straight from a list of patterns, one candidate pair each.
inline prl::PatternTable table_of(const std::vector<prl::ComparisonPattern>& per_pair, std::vector<int> levels) {
  prl::PairGroup g;
  g.a_members.push_back(0);
  for (std::uint32_t j = 0; j < per_pair.size(); ++j) g.b_members.push_back(j);
  prl::CandidatePairSet pairs(1, per_pair.size(), {g});
  return prl::aggregate_patterns(pairs, per_pair, std::move(levels));
}

// Draws n_pairs patterns from a known independent mixture.
inline std::vector<prl::ComparisonPattern> sample_mixture(const prl::MixtureParams& p, std::size_t n_pairs,
                                                         std::mt19937_64& rng) {
  std::bernoulli_distribution is_match(p.pi);
  std::vector<prl::ComparisonPattern> out;
  out.reserve(n_pairs);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const bool match = is_match(rng);
    prl::ComparisonPattern g;
    for (std::size_t j = 0; j < p.fields(); ++j) {
      const auto& probs = match ? p.m[j] : p.u[j];
      std::discrete_distribution<int> d(probs.begin(), probs.end());
      g.levels.push_back(static_cast<std::uint8_t>(d(rng) + 1));
    }
    out.push_back(std::move(g));
  }
  return out;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / ("prl_test_" + name)) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string str(const std::string& file = "") const { return (file.empty() ? path : path / file).string(); }
};

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace support

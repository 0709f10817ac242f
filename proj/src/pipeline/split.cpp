#include "tabml/pipeline/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tabml/core/error.hpp"
#include "tabml/core/random.hpp"
#include "tabml/preprocess/sampler.hpp"

namespace tabml::pipeline {

namespace {

// Row indices per class, ascending.
std::vector<std::vector<std::size_t>> ByClass(std::span<const double> labels) {
  const auto counts = preprocess::ClassCounts(labels);
  std::vector<std::vector<std::size_t>> out(counts.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[static_cast<std::size_t>(labels[i])].push_back(i);
  return out;
}

}  // namespace

Split TrainTestSplit(std::size_t n, std::span<const double> labels, const SplitSpec& spec) {
  Require(n >= 4, ErrorCode::kTooFewRows, "split needs at least 4 rows, got " + std::to_string(n));
  Require(spec.test_fraction > 0.0 && spec.test_fraction < 1.0, ErrorCode::kInvalidConfig,
          "test_fraction must lie in (0, 1)");
  Require(labels.empty() || labels.size() == n, ErrorCode::kLengthMismatch,
          "split labels do not match the row count");
  Rng rng(spec.seed);
  Split out;
  if (spec.stratified && !labels.empty()) {
    const auto groups = ByClass(labels);
    for (std::size_t c = 0; c < groups.size(); ++c) {
      std::vector<std::size_t> rows = groups[c];
      if (rows.empty()) continue;
      rng.shuffle(rows);
      std::size_t n_test = 0;
      if (rows.size() == 1) {
        out.warnings.push_back("StratumTooSmall: class " + std::to_string(c) +
                               " has a single row; it stays in the training split");
      } else {
        const double want = static_cast<double>(rows.size()) * spec.test_fraction;
        n_test = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(want)), 0, rows.size() - 1);
      }
      out.test.insert(out.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
      out.train.insert(out.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
    }
    if (out.test.empty()) {
      // Tiny strata rounded to nothing; move one row from the largest class.
      std::size_t best = 0;
      for (std::size_t c = 1; c < groups.size(); ++c) {
        if (groups[c].size() > groups[best].size()) best = c;
      }
      for (auto it = out.train.begin(); it != out.train.end(); ++it) {
        if (static_cast<std::size_t>(labels[*it]) == best) {
          out.test.push_back(*it);
          out.train.erase(it);
          break;
        }
      }
    }
  } else {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    rng.shuffle(rows);
    const double want = static_cast<double>(n) * spec.test_fraction;
    const std::size_t n_test = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(want)), 1, n - 1);
    out.test.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.train.assign(rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<std::size_t> FoldAssignment(std::size_t n, std::span<const double> labels,
                                        std::size_t folds, std::uint64_t seed) {
  Require(folds >= 2, ErrorCode::kInvalidConfig, "cross-validation needs at least 2 folds");
  Require(n >= folds, ErrorCode::kInsufficientRowsForFolds,
          std::to_string(n) + " rows cannot fill " + std::to_string(folds) + " folds");
  Rng rng(seed);
  std::vector<std::size_t> fold(n, 0);
  if (labels.empty()) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    rng.shuffle(rows);
    for (std::size_t i = 0; i < n; ++i) fold[rows[i]] = i % folds;
    return fold;
  }
  Require(labels.size() == n, ErrorCode::kLengthMismatch, "fold labels do not match the row count");
  const auto groups = ByClass(labels);
  std::size_t next = 0;
  for (std::size_t c = 0; c < groups.size(); ++c) {
    std::vector<std::size_t> rows = groups[c];
    if (rows.empty()) continue;
    Require(rows.size() >= folds, ErrorCode::kInsufficientRowsForFolds,
            "class " + std::to_string(c) + " has " + std::to_string(rows.size()) +
                " rows, fewer than " + std::to_string(folds) + " folds");
    rng.shuffle(rows);
    for (std::size_t r : rows) fold[r] = next++ % folds;
  }
  return fold;
}

}  // namespace tabml::pipeline
